#pragma once

#include "ldfm/dataset.hpp"
#include "ldfm/ldfm.hpp"
#include "ldfm/metrics.hpp"
#include "ldfm/pca.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ldfm {

struct ExperimentConfig {
  std::filesystem::path train;
  std::filesystem::path test;
  std::filesystem::path labels_xml;
  std::vector<double> lambdas{1.0};               // a single value except for sweeps
  std::vector<std::size_t> max_iterations{100};   // likewise
  double objective_tolerance = 1e-6;
  double pca_variance = 0.95;                     // 0 disables PCA
  bool standardize = false;
  std::vector<std::size_t> feature_counts;        // empty means 1..100
  std::vector<std::uint64_t> seeds{0};
  std::vector<double> missing_proportions{0.2, 0.4, 0.6, 0.8};
  std::size_t k_neighbors = 10;
  double smoothing = 1.0;
  bool random_baseline = false;
  std::filesystem::path output_dir{"results"};
  std::string format{"csv"};

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

struct CurvePoint {
  std::size_t feature_count = 0;
  MetricsReport metrics;
  bool operator==(const CurvePoint&) const = default;
};

struct ReconstructionErrors {
  double logical_train = 0.0;    // X_train against W^T Y_train
  double predicted_train = 0.0;  // X_train against W^T Y~
  double logical_test = 0.0;     // X_test against W^T Y_test
  bool operator==(const ReconstructionErrors&) const = default;
};

struct MissingLabelPoint {
  double proportion = 0.0;
  std::size_t feature_count = 0;
  MetricsReport base;  // Y~ frozen at the corrupted logical labels
  MetricsReport ldfm;  // full alternating fit
  bool operator==(const MissingLabelPoint&) const = default;
};

/// Everything one experiment run produced. `wall_seconds` is the only field
/// that is not a deterministic function of `config` and the input files.
struct RunRecord {
  std::string experiment;
  std::string dataset;
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::size_t feature_space_dim = 0;
  std::vector<Eigen::Index> ranking;  // best first
  std::vector<CurvePoint> curve;
  std::vector<CurvePoint> random_curve;  // mean over seeds of random feature orderings
  std::optional<ReconstructionErrors> reconstruction;
  std::vector<MissingLabelPoint> missing;
  std::vector<double> objective_trace;
  std::string notes;
  double wall_seconds = 0.0;

  bool operator==(const RunRecord&) const = default;
};

/// Train/test features after optional PCA (fitted on train only).
struct PreparedData {
  MultiLabelDataset train;
  MultiLabelDataset test;
  std::optional<PcaModel> pca;
};

PreparedData prepare(const DatasetPair& pair, const ExperimentConfig& config);

/// Requested counts clamped to [1, dim], sorted and deduplicated.
std::vector<std::size_t> effective_feature_counts(std::span<const std::size_t> requested,
                                                  std::size_t dim);

/// ML-KNN metrics on the test split for each prefix length of `order`.
std::vector<CurvePoint> feature_curve(const MultiLabelDataset& train, const MultiLabelDataset& test,
                                      std::span<const Eigen::Index> order,
                                      std::span<const std::size_t> counts, std::size_t k_neighbors,
                                      double smoothing);

/// Random feature orderings, one per seed, averaged point-wise.
std::vector<CurvePoint> random_feature_curve(const MultiLabelDataset& train,
                                             const MultiLabelDataset& test,
                                             std::span<const std::size_t> counts,
                                             std::span<const std::uint64_t> seeds,
                                             std::size_t k_neighbors, double smoothing);

RunRecord run_feature_curve(const DatasetPair& data, const ExperimentConfig& config);
RunRecord run_reconstruction(const DatasetPair& data, const ExperimentConfig& config);
RunRecord run_missing_labels(const DatasetPair& data, const ExperimentConfig& config);
/// Every (lambda, max_iterations) pair of the config grid, in row-major grid order.
std::vector<RunRecord> run_sweep(const DatasetPair& data, const ExperimentConfig& config);

DatasetPair load_dataset(const ExperimentConfig& config);

/// JSON array of records; parse_records(records_to_json(r)) == r.
std::string records_to_json(std::span<const RunRecord> records);
std::vector<RunRecord> parse_records(std::string_view json);

/// Writes result tables and plot-data files for `experiment` into `dir`.
/// Returns the paths written, in write order.
std::vector<std::filesystem::path> emit_results(std::string_view experiment,
                                                std::span<const RunRecord> records,
                                                std::string_view format,
                                                const std::filesystem::path& dir);

}  // namespace ldfm

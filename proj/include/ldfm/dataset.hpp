#pragma once

#include "ldfm/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ldfm {

/// Features are stored d x n and labels k x n: one column per instance.
struct MultiLabelDataset {
  linalg::Matrix features;
  linalg::Matrix labels;
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;

  Eigen::Index num_features() const { return features.rows(); }
  Eigen::Index num_labels() const { return labels.rows(); }
  Eigen::Index num_instances() const { return features.cols(); }

  /// Checks shapes, name counts, name uniqueness, and that labels are 0/1.
  void validate() const;

  bool operator==(const MultiLabelDataset& other) const;
};

struct DatasetPair {
  MultiLabelDataset train;
  MultiLabelDataset test;
  std::string name;
};

/// Label names from a Mulan XML header, flattened in document order.
std::vector<std::string> parse_label_header(std::string_view xml);

/// Parses a dense or sparse ARFF document. Attributes named in `label_names`
/// become label rows in that order; the rest become feature rows in file order.
MultiLabelDataset parse_arff(std::string_view text, std::span<const std::string> label_names);

/// Dense ARFF serialization: features first, then labels as {0,1} nominals.
std::string write_arff(const MultiLabelDataset& data, std::string_view relation);

std::string read_file(const std::filesystem::path& path);

DatasetPair load_mulan_pair(const std::filesystem::path& train_path,
                            const std::filesystem::path& test_path,
                            const std::filesystem::path& xml_path);

/// Sets floor(proportion * #positives) positive label entries to 0, chosen
/// uniformly without replacement from a generator seeded with `seed`.
MultiLabelDataset corrupt_labels(const MultiLabelDataset& data, double proportion,
                                 std::uint64_t seed);

/// Keeps the given feature rows, in the given order.
MultiLabelDataset select_features(const MultiLabelDataset& data,
                                  std::span<const Eigen::Index> rows);

}  // namespace ldfm

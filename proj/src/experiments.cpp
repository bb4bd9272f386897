#include "ldfm/experiments.hpp"

#include "ldfm/error.hpp"
#include "ldfm/mlknn.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>
#include <tuple>

namespace ldfm {

using nlohmann::json;

namespace {

constexpr const char* kBaseArmNote =
    "base arm: numeric labels frozen at the corrupted logical labels, only W is solved; "
    "ldfm arm: full alternating fit; ML-KNN trained on corrupted labels, scored on clean test labels";

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void require_single_point(const ExperimentConfig& config) {
  if (config.lambdas.size() != 1 || config.max_iterations.size() != 1) {
    throw Error(ErrorCode::InvalidArgument, "only the sweep command accepts several lambda or max-iter values");
  }
}

LdfmConfig ldfm_config(const ExperimentConfig& config) {
  return LdfmConfig{config.lambdas.front(), config.max_iterations.front(), config.objective_tolerance};
}

std::vector<Eigen::Index> ranking_of(const LdfmModel& model) {
  std::vector<Eigen::Index> out;
  for (const auto& fs : rank_features(model)) out.push_back(fs.feature);
  return out;
}

MetricsReport mean_report(std::span<const MetricsReport> reports) {
  MetricsReport mean;
  for (const auto& r : reports) {
    mean.hamming_loss += r.hamming_loss;
    mean.average_precision += r.average_precision;
    mean.micro_f1 += r.micro_f1;
  }
  const double n = static_cast<double>(reports.size());
  mean.hamming_loss /= n;
  mean.average_precision /= n;
  mean.micro_f1 /= n;
  return mean;
}

// Curve on an already-prepared split; shared by the feature-curve run and each sweep point.
RunRecord curve_run(const PreparedData& data, const std::string& dataset, const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.experiment = "feature-curve";
  record.dataset = dataset;
  record.config = config;
  record.seed = config.seeds.front();
  record.feature_space_dim = static_cast<std::size_t>(data.train.num_features());

  const LdfmModel model = fit(data.train.features, data.train.labels, ldfm_config(config));
  record.objective_trace = model.objective_trace;
  record.ranking = ranking_of(model);

  const auto counts = effective_feature_counts(config.feature_counts, record.feature_space_dim);
  record.curve = feature_curve(data.train, data.test, record.ranking, counts, config.k_neighbors,
                               config.smoothing);
  if (config.random_baseline) {
    record.random_curve = random_feature_curve(data.train, data.test, counts, config.seeds,
                                               config.k_neighbors, config.smoothing);
  }
  record.wall_seconds = seconds_since(start);
  return record;
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (lambdas.empty()) bad("at least one lambda is required");
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) bad("lambda values must be positive");
  }
  if (max_iterations.empty()) bad("at least one max-iter value is required");
  for (auto it : max_iterations) {
    if (it < 1) bad("max-iter values must be at least 1");
  }
  if (!(objective_tolerance >= 0.0)) bad("objective tolerance must be nonnegative");
  if (!(pca_variance >= 0.0 && pca_variance <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "pca-variance must lie in [0,1]");
  }
  for (auto c : feature_counts) {
    if (c < 1) bad("feature counts must be at least 1");
  }
  if (!std::is_sorted(feature_counts.begin(), feature_counts.end())) bad("feature counts must be ascending");
  if (seeds.empty()) bad("at least one seed is required");
  for (double p : missing_proportions) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::OutOfRange, "missing proportions must lie in [0,1]");
  }
  if (k_neighbors < 1) bad("k-neighbors must be at least 1");
  if (!(smoothing > 0.0)) bad("smoothing must be positive");
  if (format != "csv" && format != "json") bad("format must be csv or json");
}

PreparedData prepare(const DatasetPair& pair, const ExperimentConfig& config) {
  PreparedData out{pair.train, pair.test, std::nullopt};
  if (config.pca_variance <= 0.0) return out;

  PcaModel pca = fit_pca(pair.train.features, PcaOptions{config.pca_variance, config.standardize});
  out.train.features = apply_pca(pca, pair.train.features);
  out.test.features = apply_pca(pca, pair.test.features);
  out.train.feature_names.clear();
  for (Eigen::Index c = 0; c < pca.output_dim(); ++c) {
    out.train.feature_names.push_back("pc" + std::to_string(c + 1));
  }
  out.test.feature_names = out.train.feature_names;
  out.pca = std::move(pca);
  return out;
}

std::vector<std::size_t> effective_feature_counts(std::span<const std::size_t> requested,
                                                  std::size_t dim) {
  std::vector<std::size_t> out;
  if (requested.empty()) {
    for (std::size_t m = 1; m <= 100; ++m) out.push_back(std::min(m, dim));
  } else {
    for (auto m : requested) out.push_back(std::clamp<std::size_t>(m, 1, dim));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<CurvePoint> feature_curve(const MultiLabelDataset& train, const MultiLabelDataset& test,
                                      std::span<const Eigen::Index> order,
                                      std::span<const std::size_t> counts, std::size_t k_neighbors,
                                      double smoothing) {
  if (train.num_features() != test.num_features() || train.num_labels() != test.num_labels()) {
    throw Error(ErrorCode::SchemaMismatch, "train and test splits disagree on shape");
  }
  std::vector<CurvePoint> out;
  if (counts.empty()) return out;
  if (counts.back() > order.size()) throw Error(ErrorCode::OutOfRange, "feature count exceeds ordering length");

  IncrementalMlknn knn(train.features, train.labels, test.features, k_neighbors, smoothing);
  for (const auto m : counts) {
    while (knn.feature_count() < m) knn.add_feature(order[knn.feature_count()]);
    const auto pred = knn.predict();
    out.push_back({m, evaluate(pred.scores, pred.predictions, test.labels)});
  }
  return out;
}

std::vector<CurvePoint> random_feature_curve(const MultiLabelDataset& train,
                                             const MultiLabelDataset& test,
                                             std::span<const std::size_t> counts,
                                             std::span<const std::uint64_t> seeds,
                                             std::size_t k_neighbors, double smoothing) {
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "random baseline needs at least one seed");
  std::vector<std::vector<MetricsReport>> per_count(counts.size());
  for (const auto seed : seeds) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(train.num_features()));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto curve = feature_curve(train, test, order, counts, k_neighbors, smoothing);
    for (std::size_t i = 0; i < curve.size(); ++i) per_count[i].push_back(curve[i].metrics);
  }
  std::vector<CurvePoint> out;
  for (std::size_t i = 0; i < counts.size(); ++i) out.push_back({counts[i], mean_report(per_count[i])});
  return out;
}

DatasetPair load_dataset(const ExperimentConfig& config) {
  return load_mulan_pair(config.train, config.test, config.labels_xml);
}

RunRecord run_feature_curve(const DatasetPair& data, const ExperimentConfig& config) {
  config.validate();
  require_single_point(config);
  const auto start = std::chrono::steady_clock::now();
  RunRecord record = curve_run(prepare(data, config), data.name, config);
  record.wall_seconds = seconds_since(start);
  return record;
}

RunRecord run_reconstruction(const DatasetPair& data, const ExperimentConfig& config) {
  config.validate();
  require_single_point(config);
  const auto start = std::chrono::steady_clock::now();
  const PreparedData prepared = prepare(data, config);

  RunRecord record;
  record.experiment = "reconstruct";
  record.dataset = data.name;
  record.config = config;
  record.seed = config.seeds.front();
  record.feature_space_dim = static_cast<std::size_t>(prepared.train.num_features());

  const LdfmModel model = fit(prepared.train.features, prepared.train.labels, ldfm_config(config));
  record.objective_trace = model.objective_trace;
  record.ranking = ranking_of(model);
  record.reconstruction = ReconstructionErrors{
      reconstruction_error(prepared.train.features, model.w, prepared.train.labels),
      reconstruction_error(prepared.train.features, model.w, model.y_numeric),
      reconstruction_error(prepared.test.features, model.w, prepared.test.labels)};
  record.wall_seconds = seconds_since(start);
  return record;
}

RunRecord run_missing_labels(const DatasetPair& data, const ExperimentConfig& config) {
  config.validate();
  require_single_point(config);
  if (config.missing_proportions.empty()) {
    throw Error(ErrorCode::InvalidArgument, "at least one missing-label proportion is required");
  }
  const auto start = std::chrono::steady_clock::now();
  const PreparedData prepared = prepare(data, config);
  const LdfmConfig fit_config = ldfm_config(config);

  RunRecord record;
  record.experiment = "missing-labels";
  record.dataset = data.name;
  record.config = config;
  record.seed = config.seeds.front();
  record.feature_space_dim = static_cast<std::size_t>(prepared.train.num_features());
  record.notes = kBaseArmNote;

  const auto counts = effective_feature_counts(config.feature_counts, record.feature_space_dim);
  for (const double p : config.missing_proportions) {
    std::vector<std::vector<MetricsReport>> base(counts.size());
    std::vector<std::vector<MetricsReport>> full(counts.size());
    for (const auto seed : config.seeds) {
      const MultiLabelDataset corrupted = corrupt_labels(prepared.train, p, seed);
      const LdfmModel base_model = fit_frozen_labels(corrupted.features, corrupted.labels, fit_config);
      const LdfmModel ldfm_model = fit(corrupted.features, corrupted.labels, fit_config);
      const auto base_curve = feature_curve(corrupted, prepared.test, ranking_of(base_model), counts,
                                            config.k_neighbors, config.smoothing);
      const auto ldfm_curve = feature_curve(corrupted, prepared.test, ranking_of(ldfm_model), counts,
                                            config.k_neighbors, config.smoothing);
      for (std::size_t i = 0; i < counts.size(); ++i) {
        base[i].push_back(base_curve[i].metrics);
        full[i].push_back(ldfm_curve[i].metrics);
      }
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
      record.missing.push_back({p, counts[i], mean_report(base[i]), mean_report(full[i])});
    }
  }
  record.wall_seconds = seconds_since(start);
  return record;
}

std::vector<RunRecord> run_sweep(const DatasetPair& data, const ExperimentConfig& config) {
  config.validate();
  const PreparedData prepared = prepare(data, config);

  std::vector<ExperimentConfig> points;
  for (const double lambda : config.lambdas) {
    for (const auto iterations : config.max_iterations) {
      ExperimentConfig point = config;
      point.lambdas = {lambda};
      point.max_iterations = {iterations};
      points.push_back(std::move(point));
    }
  }

  // Points are independent; each worker writes only its own slots.
  std::vector<RunRecord> records(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        records[i] = curve_run(prepared, data.name, points[i]);
        records[i].experiment = "sweep";
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(points.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

// --- JSON -------------------------------------------------------------------

void to_json(json& j, const MetricsReport& m) {
  j = json{{"hamming_loss", m.hamming_loss},
           {"average_precision", m.average_precision},
           {"micro_f1", m.micro_f1}};
}

void from_json(const json& j, MetricsReport& m) {
  j.at("hamming_loss").get_to(m.hamming_loss);
  j.at("average_precision").get_to(m.average_precision);
  j.at("micro_f1").get_to(m.micro_f1);
}

void to_json(json& j, const CurvePoint& p) {
  j = json{{"feature_count", p.feature_count}, {"metrics", p.metrics}};
}

void from_json(const json& j, CurvePoint& p) {
  j.at("feature_count").get_to(p.feature_count);
  j.at("metrics").get_to(p.metrics);
}

void to_json(json& j, const MissingLabelPoint& p) {
  j = json{{"proportion", p.proportion}, {"feature_count", p.feature_count}, {"base", p.base}, {"ldfm", p.ldfm}};
}

void from_json(const json& j, MissingLabelPoint& p) {
  j.at("proportion").get_to(p.proportion);
  j.at("feature_count").get_to(p.feature_count);
  j.at("base").get_to(p.base);
  j.at("ldfm").get_to(p.ldfm);
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"train", c.train.string()},
           {"test", c.test.string()},
           {"labels_xml", c.labels_xml.string()},
           {"lambda", c.lambdas},
           {"max_iter", c.max_iterations},
           {"objective_tolerance", c.objective_tolerance},
           {"pca_variance", c.pca_variance},
           {"standardize", c.standardize},
           {"features", c.feature_counts},
           {"seeds", c.seeds},
           {"missing", c.missing_proportions},
           {"k_neighbors", c.k_neighbors},
           {"smoothing", c.smoothing},
           {"random_baseline", c.random_baseline},
           {"out", c.output_dir.string()},
           {"format", c.format}};
}

void from_json(const json& j, ExperimentConfig& c) {
  c.train = j.at("train").get<std::string>();
  c.test = j.at("test").get<std::string>();
  c.labels_xml = j.at("labels_xml").get<std::string>();
  j.at("lambda").get_to(c.lambdas);
  j.at("max_iter").get_to(c.max_iterations);
  j.at("objective_tolerance").get_to(c.objective_tolerance);
  j.at("pca_variance").get_to(c.pca_variance);
  j.at("standardize").get_to(c.standardize);
  j.at("features").get_to(c.feature_counts);
  j.at("seeds").get_to(c.seeds);
  j.at("missing").get_to(c.missing_proportions);
  j.at("k_neighbors").get_to(c.k_neighbors);
  j.at("smoothing").get_to(c.smoothing);
  j.at("random_baseline").get_to(c.random_baseline);
  c.output_dir = j.at("out").get<std::string>();
  j.at("format").get_to(c.format);
}

void to_json(json& j, const RunRecord& r) {
  j = json{{"experiment", r.experiment},
           {"dataset", r.dataset},
           {"config", r.config},
           {"seed", r.seed},
           {"feature_space_dim", r.feature_space_dim},
           {"ranking", r.ranking},
           {"curve", r.curve},
           {"random_curve", r.random_curve},
           {"missing", r.missing},
           {"objective_trace", r.objective_trace},
           {"notes", r.notes},
           {"wall_seconds", r.wall_seconds}};
  if (r.reconstruction) {
    j["reconstruction"] = json{{"logical_train", r.reconstruction->logical_train},
                               {"predicted_train", r.reconstruction->predicted_train},
                               {"logical_test", r.reconstruction->logical_test}};
  } else {
    j["reconstruction"] = nullptr;
  }
}

void from_json(const json& j, RunRecord& r) {
  j.at("experiment").get_to(r.experiment);
  j.at("dataset").get_to(r.dataset);
  j.at("config").get_to(r.config);
  j.at("seed").get_to(r.seed);
  j.at("feature_space_dim").get_to(r.feature_space_dim);
  j.at("ranking").get_to(r.ranking);
  j.at("curve").get_to(r.curve);
  j.at("random_curve").get_to(r.random_curve);
  j.at("missing").get_to(r.missing);
  j.at("objective_trace").get_to(r.objective_trace);
  j.at("notes").get_to(r.notes);
  j.at("wall_seconds").get_to(r.wall_seconds);
  const auto& rec = j.at("reconstruction");
  if (rec.is_null()) {
    r.reconstruction.reset();
  } else {
    r.reconstruction = ReconstructionErrors{rec.at("logical_train").get<double>(),
                                            rec.at("predicted_train").get<double>(),
                                            rec.at("logical_test").get<double>()};
  }
}

std::string records_to_json(std::span<const RunRecord> records) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back(r);
  return arr.dump(2) + "\n";
}

std::vector<RunRecord> parse_records(std::string_view text) {
  try {
    return json::parse(text).get<std::vector<RunRecord>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SyntaxError, std::string("results JSON: ") + e.what());
  }
}

// --- CSV --------------------------------------------------------------------

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, std::string_view header) : path_(path), out_(path) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out_.precision(17);
    out_ << header << '\n';
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << fields, first = false), ...);
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::IoError, "failed writing '" + path_.string() + "'");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

constexpr const char* kMetricColumns = "hamming_loss,average_precision,micro_f1";

std::string file_stem(std::string_view experiment, std::span<const RunRecord> records) {
  std::string name(experiment);
  std::replace(name.begin(), name.end(), '-', '_');
  if (!records.empty() && !records.front().dataset.empty()) return records.front().dataset + "_" + name;
  return name;
}

}  // namespace

std::vector<std::filesystem::path> emit_results(std::string_view experiment,
                                                std::span<const RunRecord> records,
                                                std::string_view format,
                                                const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());

  const std::string stem = file_stem(experiment, records);
  std::vector<std::filesystem::path> written;

  if (format == "json") {
    const auto path = dir / (stem + ".json");
    std::ofstream out(path);
    out << records_to_json(records);
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
    written.push_back(path);
    return written;
  }
  if (format != "csv") throw Error(ErrorCode::InvalidArgument, "format must be csv or json");

  const auto open = [&](const std::string& suffix, const std::string& header) {
    written.push_back(dir / (stem + suffix + ".csv"));
    return CsvFile(written.back(), header);
  };
  const auto metric_cells = [](const MetricsReport& m) {
    return std::tuple{m.hamming_loss, m.average_precision, m.micro_f1};
  };

  if (experiment == "feature-curve") {
    auto table = open("", std::string("feature_count,") + kMetricColumns);
    auto random = open("_random", std::string("feature_count,") + kMetricColumns);
    auto trace = open("_objective", "iteration,objective");
    for (const auto& r : records) {
      for (const auto& p : r.curve) {
        std::apply([&](auto... m) { table.row(p.feature_count, m...); }, metric_cells(p.metrics));
      }
      for (const auto& p : r.random_curve) {
        std::apply([&](auto... m) { random.row(p.feature_count, m...); }, metric_cells(p.metrics));
      }
      for (std::size_t i = 0; i < r.objective_trace.size(); ++i) trace.row(i + 1, r.objective_trace[i]);
    }
    table.close();
    random.close();
    trace.close();
  } else if (experiment == "reconstruct") {
    auto table = open("", "dataset,logical_train,predicted_train,logical_test");
    for (const auto& r : records) {
      if (!r.reconstruction) continue;
      table.row(r.dataset, r.reconstruction->logical_train, r.reconstruction->predicted_train,
                r.reconstruction->logical_test);
    }
    table.close();
  } else if (experiment == "missing-labels") {
    auto table = open("", std::string("proportion,feature_count,arm,") + kMetricColumns);
    for (const auto& r : records) {
      for (const auto& p : r.missing) {
        std::apply([&](auto... m) { table.row(p.proportion, p.feature_count, "base", m...); },
                   metric_cells(p.base));
        std::apply([&](auto... m) { table.row(p.proportion, p.feature_count, "ldfm", m...); },
                   metric_cells(p.ldfm));
      }
    }
    table.close();
  } else if (experiment == "sweep") {
    auto table = open("", std::string("lambda,max_iterations,feature_count,") + kMetricColumns);
    auto trace = open("_objective", "lambda,max_iterations,iteration,objective");
    for (const auto& r : records) {
      const double lambda = r.config.lambdas.front();
      const auto iters = r.config.max_iterations.front();
      for (const auto& p : r.curve) {
        std::apply([&](auto... m) { table.row(lambda, iters, p.feature_count, m...); }, metric_cells(p.metrics));
      }
      for (std::size_t i = 0; i < r.objective_trace.size(); ++i) {
        trace.row(lambda, iters, i + 1, r.objective_trace[i]);
      }
    }
    table.close();
    trace.close();
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown experiment '" + std::string(experiment) + "'");
  }
  return written;
}

}  // namespace ldfm

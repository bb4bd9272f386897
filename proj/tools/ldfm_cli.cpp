// Command-line harness for the LDFM experiments.
//
//   ldfm feature-curve --train X-train.arff --test X-test.arff --labels-xml X.xml --features 1..100
//   ldfm reconstruct | missing-labels | sweep  (same flags)
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include "ldfm/error.hpp"
#include "ldfm/experiments.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kUsageError = 2;
constexpr int kDataError = 3;
constexpr int kNumericalError = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_value(const std::string& text, const char* flag) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw UsageError(std::string("bad value '") + text + "' for " + flag);
  }
  return value;
}

// "a,b,c" or "lo..hi" (inclusive) for integers.
template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) {
    const auto dots = item.find("..");
    if constexpr (std::is_integral_v<T>) {
      if (dots != std::string::npos) {
        const T lo = parse_value<T>(item.substr(0, dots), flag);
        const T hi = parse_value<T>(item.substr(dots + 2), flag);
        if (hi < lo) throw UsageError(std::string("empty range '") + item + "' for " + flag);
        for (T v = lo; v <= hi; ++v) out.push_back(v);
        continue;
      }
    }
    out.push_back(parse_value<T>(item, flag));
  }
  return out;
}

int exit_code_for(const ldfm::Error& e) {
  switch (ldfm::category(e.code())) {
    case ldfm::ErrorCategory::Usage: return kUsageError;
    case ldfm::ErrorCategory::Data: return kDataError;
    case ldfm::ErrorCategory::Numerical: return kNumericalError;
  }
  return kDataError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LDFM multi-label feature selection experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value file mirroring the long flags; flags override it");

  std::string train, test, labels_xml, out_dir = "results", format = "csv";
  std::string lambdas = "1", iterations = "100", features, seeds = "0", missing = "0.2,0.4,0.6,0.8";
  std::string save_model;
  double pca_variance = 0.95;
  double tolerance = 1e-6;
  double smoothing = 1.0;
  std::size_t k_neighbors = 10;
  bool standardize = false;
  bool random_baseline = false;

  app.add_option("--train", train, "Training ARFF file")->required();
  app.add_option("--test", test, "Test ARFF file")->required();
  app.add_option("--labels-xml", labels_xml, "Mulan XML label header")->required();
  // Config files hand comma lists over as separate values; join them back.
  const auto list_option = [&](const std::string& name, std::string& target, const std::string& help) {
    return app.add_option(name, target, help)
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::Join)
        ->capture_default_str();
  };
  list_option("--lambda", lambdas, "Lambda (comma list for sweep)");
  list_option("--max-iter", iterations, "Max iterations (comma list for sweep)");
  app.add_option("--tolerance", tolerance, "Relative objective plateau for early stop; 0 disables")
      ->capture_default_str();
  app.add_option("--pca-variance", pca_variance, "Retained PCA variance; 0 disables PCA")
      ->capture_default_str();
  app.add_flag("--standardize", standardize, "Scale features to unit variance before PCA");
  list_option("--features", features, "Feature counts: comma list or lo..hi (default 1..100)");
  list_option("--seeds,--seed", seeds, "Seeds: comma list or lo..hi");
  list_option("--missing", missing, "Missing-label proportions, comma list");
  app.add_option("--k-neighbors", k_neighbors, "ML-KNN neighbourhood size")->capture_default_str();
  app.add_option("--smoothing", smoothing, "ML-KNN Laplace smoothing")->capture_default_str();
  app.add_flag("--random-baseline", random_baseline, "Also evaluate random feature orderings (one per seed)");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--save-model", save_model, "Write the fitted LDFM model (feature-curve, reconstruct)");

  for (const char* name : {"feature-curve", "reconstruct", "missing-labels", "sweep"}) {
    app.add_subcommand(name)->fallthrough();
  }
  app.get_subcommand("feature-curve")->description("Metrics against number of top-ranked features");
  app.get_subcommand("reconstruct")->description("Decoder reconstruction errors");
  app.get_subcommand("missing-labels")->description("Base vs LDFM under label removal");
  app.get_subcommand("sweep")->description("Grid over lambda and max-iter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ldfm::ExperimentConfig config;
    config.train = train;
    config.test = test;
    config.labels_xml = labels_xml;
    config.lambdas = parse_list<double>(lambdas, "--lambda");
    config.max_iterations = parse_list<std::size_t>(iterations, "--max-iter");
    config.objective_tolerance = tolerance;
    config.pca_variance = pca_variance;
    config.standardize = standardize;
    if (!features.empty()) config.feature_counts = parse_list<std::size_t>(features, "--features");
    config.seeds = parse_list<std::uint64_t>(seeds, "--seeds");
    config.missing_proportions = parse_list<double>(missing, "--missing");
    config.k_neighbors = k_neighbors;
    config.smoothing = smoothing;
    config.random_baseline = random_baseline;
    config.output_dir = out_dir;
    config.format = format;
    config.validate();

    const ldfm::DatasetPair data = ldfm::load_dataset(config);
    std::vector<ldfm::RunRecord> records;
    if (command == "feature-curve") {
      records.push_back(ldfm::run_feature_curve(data, config));
    } else if (command == "reconstruct") {
      records.push_back(ldfm::run_reconstruction(data, config));
    } else if (command == "missing-labels") {
      records.push_back(ldfm::run_missing_labels(data, config));
    } else {
      records = ldfm::run_sweep(data, config);
    }

    if (!save_model.empty()) {
      if (command != "feature-curve" && command != "reconstruct") {
        throw UsageError("--save-model applies to feature-curve and reconstruct only");
      }
      const ldfm::PreparedData prepared = ldfm::prepare(data, config);
      const auto model = ldfm::fit(prepared.train.features, prepared.train.labels,
                                   {config.lambdas.front(), config.max_iterations.front(),
                                    config.objective_tolerance});
      std::ofstream out(save_model);
      if (!out) throw ldfm::Error(ldfm::ErrorCode::IoError, "cannot write '" + save_model + "'");
      ldfm::save_model(model, out);
    }

    for (const auto& path : ldfm::emit_results(command, records, config.format, config.output_dir)) {
      std::cout << path.string() << '\n';
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ldfm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}

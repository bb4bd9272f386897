#pragma once

#include "ldfm/linalg.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace ldfm {

struct LdfmConfig {
  double lambda = 1.0;                // weight of the encoder term ||W X - Y~||^2
  std::size_t max_iterations = 100;
  double objective_tolerance = 1e-6;  // relative plateau threshold; 0 runs every iteration

  void validate() const;
  bool operator==(const LdfmConfig&) const = default;
};

/// A fitted encoder/decoder. `w` (k x d) maps features to numeric labels,
/// its transpose maps numeric labels back to features.
struct LdfmModel {
  LdfmConfig config;
  linalg::Matrix w;
  linalg::Matrix y_numeric;             // learned numeric labels, k x n
  std::vector<double> objective_trace;  // one value per completed iteration
  std::size_t iterations_run = 0;

  Eigen::Index num_labels() const { return w.rows(); }
  Eigen::Index num_features() const { return w.cols(); }

  bool operator==(const LdfmModel& other) const;
};

/// ||X - W^T Y~||_F^2 + lambda ||W X - Y~||_F^2
double objective(const linalg::Matrix& w, const linalg::Matrix& y_numeric, const linalg::Matrix& x,
                 double lambda);

/// Exact minimizer over W with Y~ fixed: (Y~ Y~^T) W + W (lambda X X^T) = (lambda + 1) Y~ X^T.
linalg::Matrix update_w(const linalg::Matrix& y_numeric, const linalg::Matrix& x, double lambda);

/// Exact minimizer over Y~ with W fixed: (W W^T + lambda I) Y~ = (lambda + 1) W X.
linalg::Matrix update_y(const linalg::Matrix& w, const linalg::Matrix& x, double lambda);

/// Alternating minimization starting from Y~ = C Y with Jaccard correlations C.
/// W needs no initial value: the first action of every iteration solves for it.
LdfmModel fit(const linalg::Matrix& x, const linalg::Matrix& labels, const LdfmConfig& config);

/// Reference arm for the missing-label study: Y~ stays equal to the logical
/// labels and only W is solved for.
LdfmModel fit_frozen_labels(const linalg::Matrix& x, const linalg::Matrix& labels,
                            const LdfmConfig& config);

linalg::Vector encode(const LdfmModel& model, const linalg::Vector& x);
linalg::Vector decode(const LdfmModel& model, const linalg::Vector& y);

struct FeatureScore {
  Eigen::Index feature;
  double score;
};

/// Features ordered by the Euclidean norm of their column of W, largest
/// first; ties go to the lower index.
std::vector<FeatureScore> rank_features(const LdfmModel& model);
std::vector<FeatureScore> rank_features(const linalg::Matrix& w);

/// ||X - W^T labels||_F / ||X||_F
double reconstruction_error(const linalg::Matrix& x, const linalg::Matrix& w,
                            const linalg::Matrix& labels);

// Text model format, see README. Values are written with 17 significant digits.
void save_model(const LdfmModel& model, std::ostream& out);
LdfmModel load_model(std::istream& in);

}  // namespace ldfm

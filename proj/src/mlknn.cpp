#include "ldfm/mlknn.hpp"

#include "ldfm/error.hpp"
#include "ldfm/label_semantics.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace ldfm {

using linalg::Matrix;
using linalg::Vector;

namespace {

using Candidates = std::vector<std::pair<double, Eigen::Index>>;

// Lexicographic (distance, index) order gives ascending-index tie-breaking.
std::vector<Eigen::Index> take_nearest(Candidates& dist, std::size_t count) {
  count = std::min(count, dist.size());
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(count);
  std::nth_element(dist.begin(), mid, dist.end());
  std::sort(dist.begin(), mid);
  std::vector<Eigen::Index> out;
  out.reserve(count);
  for (auto it = dist.begin(); it != mid; ++it) out.push_back(it->second);
  return out;
}

std::vector<Eigen::Index> nearest_from_distances(const double* dist, Eigen::Index n,
                                                 std::size_t count, Eigen::Index exclude) {
  Candidates cand;
  cand.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i != exclude) cand.emplace_back(dist[i], i);
  }
  return take_nearest(cand, count);
}

void check_training_args(const Matrix& x, const Matrix& y, std::size_t k_neighbors, double smoothing) {
  if (x.cols() != y.cols()) throw Error(ErrorCode::DimensionMismatch, "features and labels disagree on n");
  if (k_neighbors < 1) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
  if (!(smoothing > 0.0)) throw Error(ErrorCode::InvalidArgument, "smoothing must be positive");
  if (static_cast<std::size_t>(x.cols()) <= k_neighbors) {
    throw Error(ErrorCode::TooFewInstances,
                std::to_string(x.cols()) + " instances cannot supply " + std::to_string(k_neighbors) +
                    " neighbours");
  }
  linalg::require_finite(x, "X");
  require_binary(y);
}

// Number of positives for each label among the given neighbours.
Eigen::VectorXi positive_counts(const Matrix& labels, const std::vector<Eigen::Index>& neighbors) {
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(labels.rows());
  for (const auto i : neighbors) {
    for (Eigen::Index j = 0; j < labels.rows(); ++j) {
      if (labels(j, i) == 1.0) ++counts[j];
    }
  }
  return counts;
}

// Priors and smoothed conditionals from each training instance's neighbour list.
template <typename NeighborsOf>
void fit_statistics(MlknnModel& model, const Matrix& y, NeighborsOf neighbors_of) {
  const double smoothing = model.smoothing;
  const Eigen::Index n = y.cols();
  const Eigen::Index k = y.rows();
  const auto K = static_cast<Eigen::Index>(model.k_neighbors);

  const Vector positives = y.rowwise().sum();
  model.prior_positive =
      (smoothing + positives.array()) / (2.0 * smoothing + static_cast<double>(n));

  // Tallies of neighbour-positive counts, split by the instance's own label.
  Matrix tally_pos = Matrix::Zero(k, K + 1);
  Matrix tally_neg = Matrix::Zero(k, K + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto counts = positive_counts(y, neighbors_of(i));
    for (Eigen::Index j = 0; j < k; ++j) {
      if (y(j, i) == 1.0) {
        tally_pos(j, counts[j]) += 1.0;
      } else {
        tally_neg(j, counts[j]) += 1.0;
      }
    }
  }

  const double slots = smoothing * static_cast<double>(K + 1);
  model.conditional_positive.resize(k, K + 1);
  model.conditional_negative.resize(k, K + 1);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double npos = positives[j];
    const double nneg = static_cast<double>(n) - npos;
    for (Eigen::Index c = 0; c <= K; ++c) {
      model.conditional_positive(j, c) = (smoothing + tally_pos(j, c)) / (slots + npos);
      model.conditional_negative(j, c) = (smoothing + tally_neg(j, c)) / (slots + nneg);
    }
  }
}

void fill_posteriors(const MlknnModel& model, const Eigen::VectorXi& counts, Eigen::Index i,
                     MlknnPrediction& out) {
  for (Eigen::Index j = 0; j < counts.size(); ++j) {
    const double prior = model.prior_positive[j];
    const double pos = prior * model.conditional_positive(j, counts[j]);
    const double neg = (1.0 - prior) * model.conditional_negative(j, counts[j]);
    out.scores(j, i) = pos / (pos + neg);
    out.predictions(j, i) = pos > neg ? 1.0 : 0.0;
  }
}

}  // namespace

std::vector<Eigen::Index> nearest_neighbors(const Matrix& reference,
                                            const Eigen::Ref<const Vector>& query, std::size_t count,
                                            Eigen::Index exclude) {
  Candidates dist;
  dist.reserve(static_cast<std::size_t>(reference.cols()));
  const Eigen::Index r = reference.rows();
  for (Eigen::Index i = 0; i < reference.cols(); ++i) {
    if (i == exclude) continue;
    const double* col = reference.data() + i * r;
    double acc = 0.0;
    for (Eigen::Index f = 0; f < r; ++f) {
      const double diff = col[f] - query[f];
      acc += diff * diff;
    }
    dist.emplace_back(acc, i);
  }
  return take_nearest(dist, count);
}

MlknnModel mlknn_train(const Matrix& x, const Matrix& y, std::size_t k_neighbors, double smoothing) {
  check_training_args(x, y, k_neighbors, smoothing);
  MlknnModel model;
  model.k_neighbors = k_neighbors;
  model.smoothing = smoothing;
  model.train_features = x;
  model.train_labels = y;
  fit_statistics(model, y, [&](Eigen::Index i) { return nearest_neighbors(x, x.col(i), k_neighbors, i); });
  return model;
}

MlknnPrediction mlknn_predict(const MlknnModel& model, const Matrix& x_test) {
  if (x_test.rows() != model.train_features.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "test features have " + std::to_string(x_test.rows()) + " rows, model expects " +
                    std::to_string(model.train_features.rows()));
  }
  linalg::require_finite(x_test, "X_test");
  const Eigen::Index k = model.train_labels.rows();
  const Eigen::Index m = x_test.cols();

  MlknnPrediction out{Matrix(k, m), Matrix(k, m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto counts = positive_counts(
        model.train_labels, nearest_neighbors(model.train_features, x_test.col(i), model.k_neighbors));
    fill_posteriors(model, counts, i, out);
  }
  return out;
}

IncrementalMlknn::IncrementalMlknn(Matrix train_x, Matrix train_y, Matrix test_x,
                                   std::size_t k_neighbors, double smoothing)
    : train_x_(std::move(train_x)),
      train_y_(std::move(train_y)),
      test_x_(std::move(test_x)),
      k_neighbors_(k_neighbors),
      smoothing_(smoothing) {
  check_training_args(train_x_, train_y_, k_neighbors_, smoothing_);
  if (test_x_.rows() != train_x_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "train and test feature counts differ");
  }
  linalg::require_finite(test_x_, "X_test");
  train_dist_ = Matrix::Zero(train_x_.cols(), train_x_.cols());
  test_dist_ = Matrix::Zero(train_x_.cols(), test_x_.cols());
}

void IncrementalMlknn::add_feature(Eigen::Index row) {
  if (row < 0 || row >= train_x_.rows()) throw Error(ErrorCode::OutOfRange, "feature row out of range");
  const Eigen::Index n = train_x_.cols();
  for (Eigen::Index q = 0; q < n; ++q) {
    const double v = train_x_(row, q);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double diff = train_x_(row, i) - v;
      train_dist_(i, q) += diff * diff;
    }
  }
  for (Eigen::Index q = 0; q < test_x_.cols(); ++q) {
    const double v = test_x_(row, q);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double diff = train_x_(row, i) - v;
      test_dist_(i, q) += diff * diff;
    }
  }
  ++added_;
}

MlknnPrediction IncrementalMlknn::predict() const {
  const Eigen::Index n = train_x_.cols();
  MlknnModel model;
  model.k_neighbors = k_neighbors_;
  model.smoothing = smoothing_;
  fit_statistics(model, train_y_, [&](Eigen::Index i) {
    return nearest_from_distances(train_dist_.data() + i * n, n, k_neighbors_, i);
  });
  model.train_labels = train_y_;

  const Eigen::Index m = test_x_.cols();
  MlknnPrediction out{Matrix(train_y_.rows(), m), Matrix(train_y_.rows(), m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto counts =
        positive_counts(train_y_, nearest_from_distances(test_dist_.data() + i * n, n, k_neighbors_, -1));
    fill_posteriors(model, counts, i, out);
  }
  return out;
}

}  // namespace ldfm

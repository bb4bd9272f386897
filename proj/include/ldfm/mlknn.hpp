#pragma once

#include "ldfm/linalg.hpp"

#include <cstddef>
#include <vector>

namespace ldfm {

/// Trained ML-KNN classifier. Conditionals are k x (K+1): entry (j, c) is
/// the smoothed probability that an instance positive (resp. negative) for
/// label j has exactly c positive neighbours among its K nearest.
struct MlknnModel {
  std::size_t k_neighbors = 10;
  double smoothing = 1.0;
  linalg::Matrix train_features;  // r x n
  linalg::Matrix train_labels;    // k x n
  linalg::Vector prior_positive;  // length k
  linalg::Matrix conditional_positive;
  linalg::Matrix conditional_negative;
};

struct MlknnPrediction {
  linalg::Matrix scores;       // k x m, posterior probability of relevance
  linalg::Matrix predictions;  // k x m, 0/1
};

/// Indices of the `count` training columns closest to `query` in Euclidean
/// distance, nearest first, ties by ascending index. `exclude` (if >= 0) is skipped.
std::vector<Eigen::Index> nearest_neighbors(const linalg::Matrix& reference,
                                            const Eigen::Ref<const linalg::Vector>& query,
                                            std::size_t count, Eigen::Index exclude = -1);

MlknnModel mlknn_train(const linalg::Matrix& x, const linalg::Matrix& y, std::size_t k_neighbors = 10,
                       double smoothing = 1.0);

MlknnPrediction mlknn_predict(const MlknnModel& model, const linalg::Matrix& x_test);

/// Evaluates ML-KNN on growing prefixes of a feature ordering. Squared
/// distances are accumulated one feature at a time in the same order the
/// direct path sums them, so predict() after adding rows f_1..f_m equals
/// mlknn_predict(mlknn_train(X_train[f_1..f_m], ...), X_test[f_1..f_m]).
class IncrementalMlknn {
 public:
  IncrementalMlknn(linalg::Matrix train_x, linalg::Matrix train_y, linalg::Matrix test_x,
                   std::size_t k_neighbors = 10, double smoothing = 1.0);

  void add_feature(Eigen::Index row);
  std::size_t feature_count() const { return added_; }
  MlknnPrediction predict() const;

 private:
  linalg::Matrix train_x_;
  linalg::Matrix train_y_;
  linalg::Matrix test_x_;
  std::size_t k_neighbors_;
  double smoothing_;
  std::size_t added_ = 0;
  linalg::Matrix train_dist_;  // n x n
  linalg::Matrix test_dist_;   // n x m; column i holds distances from test instance i
};

}  // namespace ldfm

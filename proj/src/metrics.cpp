#include "ldfm/metrics.hpp"

#include "ldfm/error.hpp"
#include "ldfm/label_semantics.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <numeric>
#include <vector>

namespace ldfm {

using linalg::Matrix;

namespace {

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and truth shapes differ");
  }
}

}  // namespace

double hamming_loss(const Matrix& predictions, const Matrix& truth) {
  require_same_shape(predictions, truth);
  require_binary(predictions);
  require_binary(truth);
  if (truth.size() == 0) return 0.0;
  const auto wrong = (predictions.array() != truth.array()).count();
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

double average_precision(const Matrix& scores, const Matrix& truth) {
  require_same_shape(scores, truth);
  require_binary(truth);
  const Eigen::Index k = truth.rows();
  double total = 0.0;
  Eigen::Index counted = 0;
  for (Eigen::Index i = 0; i < truth.cols(); ++i) {
    double per_instance = 0.0;
    Eigen::Index relevant = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (truth(j, i) != 1.0) continue;
      ++relevant;
      // Rank counts every label scored at least as high, so ties are pessimistic.
      Eigen::Index rank = 0;
      Eigen::Index relevant_above = 0;
      for (Eigen::Index l = 0; l < k; ++l) {
        if (scores(l, i) >= scores(j, i)) {
          ++rank;
          if (truth(l, i) == 1.0) ++relevant_above;
        }
      }
      per_instance += static_cast<double>(relevant_above) / static_cast<double>(rank);
    }
    if (relevant == 0) continue;
    total += per_instance / static_cast<double>(relevant);
    ++counted;
  }
  return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

double micro_f1(const Matrix& predictions, const Matrix& truth) {
  require_same_shape(predictions, truth);
  require_binary(predictions);
  require_binary(truth);
  const auto p = predictions.array() == 1.0;
  const auto t = truth.array() == 1.0;
  const double tp = static_cast<double>((p && t).count());
  const double fp = static_cast<double>((p && !t).count());
  const double fn = static_cast<double>((!p && t).count());
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

MetricsReport evaluate(const Matrix& scores, const Matrix& predictions, const Matrix& truth) {
  return MetricsReport{hamming_loss(predictions, truth), average_precision(scores, truth),
                       micro_f1(predictions, truth)};
}

FriedmanResult friedman_test(const Matrix& results) {
  const Eigen::Index methods = results.rows();
  const Eigen::Index datasets = results.cols();
  if (methods < 2 || datasets < 2) {
    throw Error(ErrorCode::TooFewSamples, "Friedman test needs at least 2 methods and 2 datasets");
  }
  linalg::require_finite(results, "results");

  Eigen::VectorXd rank_sum = Eigen::VectorXd::Zero(methods);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(methods));
  for (Eigen::Index c = 0; c < datasets; ++c) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return results(a, c) > results(b, c); });
    // Runs of equal values share the mean of the ranks they span.
    std::size_t start = 0;
    while (start < order.size()) {
      std::size_t end = start + 1;
      while (end < order.size() && results(order[end], c) == results(order[start], c)) ++end;
      const double avg = 0.5 * static_cast<double>(start + 1 + end);
      for (std::size_t p = start; p < end; ++p) rank_sum[order[p]] += avg;
      start = end;
    }
  }

  const double k = static_cast<double>(methods);
  const double n = static_cast<double>(datasets);
  const double expected = n * (k + 1.0) / 2.0;
  const double statistic =
      12.0 / (n * k * (k + 1.0)) * (rank_sum.array() - expected).square().sum();

  const boost::math::chi_squared dist(k - 1.0);
  const double p = statistic <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, statistic));
  return FriedmanResult{statistic, p};
}

}  // namespace ldfm

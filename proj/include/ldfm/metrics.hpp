#pragma once

#include "ldfm/linalg.hpp"

namespace ldfm {

struct MetricsReport {
  double hamming_loss = 0.0;
  double average_precision = 0.0;
  double micro_f1 = 0.0;

  bool operator==(const MetricsReport&) const = default;
};

// All label matrices are k x m with one column per instance.

/// Fraction of instance-label pairs where prediction and truth differ.
double hamming_loss(const linalg::Matrix& predictions, const linalg::Matrix& truth);

/// Label-ranking average precision. Instances without relevant labels are
/// skipped; returns 0 if every instance is skipped.
double average_precision(const linalg::Matrix& scores, const linalg::Matrix& truth);

/// 2 TP / (2 TP + FP + FN) over all pairs; 0 when the denominator is 0.
double micro_f1(const linalg::Matrix& predictions, const linalg::Matrix& truth);

MetricsReport evaluate(const linalg::Matrix& scores, const linalg::Matrix& predictions,
                       const linalg::Matrix& truth);

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Friedman chi-square test over a methods x datasets table where higher is
/// better. Ties within a dataset receive average ranks.
FriedmanResult friedman_test(const linalg::Matrix& results);

}  // namespace ldfm

#pragma once

#include "ldfm/linalg.hpp"

namespace ldfm {

/// Pairwise Jaccard similarity between label rows of a binary k x n matrix.
/// Symmetric, entries in [0,1], unit diagonal. Pairs of all-zero labels score 0.
struct CorrelationMatrix {
  linalg::Matrix values;
};

CorrelationMatrix jaccard_correlation(const linalg::Matrix& labels);

/// Initial numeric labels C * Y (k x n): instance i's active labels spread
/// onto every correlated label.
linalg::Matrix init_numeric_labels(const linalg::Matrix& labels, const CorrelationMatrix& c);

/// Throws NonBinaryInput unless every entry is exactly 0 or 1.
void require_binary(const linalg::Matrix& labels);

}  // namespace ldfm

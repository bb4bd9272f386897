#include "ldfm/label_semantics.hpp"

#include "ldfm/error.hpp"

namespace ldfm {

using linalg::Matrix;

void require_binary(const Matrix& labels) {
  if (!(labels.array() == 0.0 || labels.array() == 1.0).all()) {
    throw Error(ErrorCode::NonBinaryInput, "label matrix must contain only 0 and 1");
  }
}

CorrelationMatrix jaccard_correlation(const Matrix& labels) {
  require_binary(labels);
  const Eigen::Index k = labels.rows();
  // Co-occurrence counts are small integers, so these products are exact.
  const Matrix both = labels * labels.transpose();
  const Eigen::VectorXd count = labels.rowwise().sum();

  CorrelationMatrix c{Matrix::Zero(k, k)};
  for (Eigen::Index a = 0; a < k; ++a) {
    c.values(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const double uni = count[a] + count[b] - both(a, b);
      const double sim = uni > 0.0 ? both(a, b) / uni : 0.0;
      c.values(a, b) = sim;
      c.values(b, a) = sim;
    }
  }
  return c;
}

Matrix init_numeric_labels(const Matrix& labels, const CorrelationMatrix& c) {
  if (c.values.rows() != labels.rows() || c.values.cols() != labels.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "correlation matrix must be k x k for k label rows");
  }
  return c.values * labels;
}

}  // namespace ldfm

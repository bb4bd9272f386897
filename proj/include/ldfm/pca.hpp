#pragma once

#include "ldfm/linalg.hpp"

namespace ldfm {

struct PcaOptions {
  double variance_retained = 0.95;
  bool standardize = false;  // divide centered features by their sample std before fitting
};

struct PcaModel {
  linalg::Vector mean;                      // length d
  linalg::Vector scale;                     // length d; all ones unless standardized
  linalg::Matrix components;                // d x r, orthonormal columns
  linalg::Vector explained_variance_ratio;  // length r, non-increasing

  Eigen::Index input_dim() const { return components.rows(); }
  Eigen::Index output_dim() const { return components.cols(); }
};

/// Fits on the columns of X (d x n). Keeps the smallest r whose cumulative
/// explained-variance ratio reaches `variance_retained`. Each component's
/// largest-magnitude entry is made positive.
PcaModel fit_pca(const linalg::Matrix& x, const PcaOptions& options = {});

/// components^T (X - mean) / scale, column by column. Returns r x m.
linalg::Matrix apply_pca(const PcaModel& model, const linalg::Matrix& x);

}  // namespace ldfm

#include "ldfm/pca.hpp"

#include "ldfm/error.hpp"

#include <cmath>
#include <string>

namespace ldfm {

using linalg::Matrix;
using linalg::Vector;

PcaModel fit_pca(const Matrix& x, const PcaOptions& options) {
  if (x.cols() < 2) throw Error(ErrorCode::TooFewInstances, "PCA needs at least two instances");
  if (!(options.variance_retained > 0.0 && options.variance_retained <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "variance_retained must lie in (0, 1]");
  }
  linalg::require_finite(x, "X");

  const double n = static_cast<double>(x.cols());
  PcaModel model;
  model.mean = x.rowwise().mean();
  Matrix centered = x.colwise() - model.mean;
  model.scale = Vector::Ones(x.rows());
  if (options.standardize) {
    for (Eigen::Index m = 0; m < x.rows(); ++m) {
      const double sd = std::sqrt(centered.row(m).squaredNorm() / (n - 1.0));
      if (sd > 0.0) {
        model.scale[m] = sd;
        centered.row(m) /= sd;
      }
    }
  }

  const Matrix cov = (centered * centered.transpose()) / (n - 1.0);
  const linalg::SymEigen eig = linalg::sym_eigen(cov);

  // Eigenvalues come ascending; walk them from the top.
  const Eigen::Index d = cov.rows();
  const double top = d > 0 ? std::max(0.0, eig.eigenvalues[d - 1]) : 0.0;
  const double floor = 1e-12 * top;
  double total = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (eig.eigenvalues[i] > floor) total += eig.eigenvalues[i];
  }
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateData, "training features have zero variance");

  std::vector<Eigen::Index> kept;
  double cumulative = 0.0;
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    const double value = eig.eigenvalues[i];
    if (!(value > floor)) break;
    kept.push_back(i);
    cumulative += value / total;
    if (cumulative >= options.variance_retained - 1e-12) break;
  }

  const auto r = static_cast<Eigen::Index>(kept.size());
  model.components.resize(d, r);
  model.explained_variance_ratio.resize(r);
  for (Eigen::Index c = 0; c < r; ++c) {
    Vector v = eig.eigenvectors.col(kept[static_cast<std::size_t>(c)]);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    model.components.col(c) = v;
    model.explained_variance_ratio[c] = eig.eigenvalues[kept[static_cast<std::size_t>(c)]] / total;
  }
  return model;
}

Matrix apply_pca(const PcaModel& model, const Matrix& x) {
  if (x.rows() != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(model.input_dim()) +
                                                  " feature rows, got " + std::to_string(x.rows()));
  }
  if (x.cols() == 0) return Matrix(model.output_dim(), 0);
  Matrix centered = x.colwise() - model.mean;
  centered.array().colwise() /= model.scale.array();
  return model.components.transpose() * centered;
}

}  // namespace ldfm

#include "ldfm/linalg.hpp"

#include "ldfm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ldfm::linalg {

namespace {

void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::NotSquare, std::string(what) + " is " + std::to_string(m.rows()) +
                                          "x" + std::to_string(m.cols()));
  }
}

// Clips roundoff negatives; anything below -eps means the input was not PSD.
void clip_psd(Vector& values, double eps, std::string_view what) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < -eps) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  std::string(what) + " has eigenvalue " + std::to_string(values[i]) +
                      " below -eps");
    }
    if (values[i] < 0.0) values[i] = 0.0;
  }
}

}  // namespace

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " contains NaN or Inf");
  }
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

SymEigen sym_eigen(const Matrix& m, double tol) {
  require_square(m, "matrix");
  require_finite(m, "matrix");
  const double asym = max_abs(m - m.transpose());
  if (asym > tol * max_abs(m)) {
    throw Error(ErrorCode::NotSymmetric, "asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  return SymEigen{solver.eigenvalues(), solver.eigenvectors()};
}

double default_pencil_eps(const Matrix& p, const Matrix& q) {
  const double n = static_cast<double>(p.rows() + q.rows());
  if (n == 0.0) return 0.0;
  return 1e-10 * (p.trace() + q.trace()) / n;
}

Matrix solve_sylvester_sympsd(const Matrix& p, const Matrix& q, const Matrix& r,
                              std::optional<double> eps) {
  require_square(p, "P");
  require_square(q, "Q");
  if (r.rows() != p.rows() || r.cols() != q.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "R must be rows(P) x rows(Q)");
  }
  require_finite(r, "R");
  const double guard = eps.value_or(default_pencil_eps(p, q));
  return solve_sylvester_sympsd(sym_eigen(p), sym_eigen(q), r, guard);
}

Matrix solve_sylvester_sympsd(const SymEigen& p, const SymEigen& q, const Matrix& r,
                              double eps) {
  if (r.rows() != p.eigenvalues.size() || r.cols() != q.eigenvalues.size()) {
    throw Error(ErrorCode::DimensionMismatch, "R must be rows(P) x rows(Q)");
  }
  if (r.size() == 0) return Matrix::Zero(r.rows(), r.cols());

  Vector lp = p.eigenvalues;
  Vector lq = q.eigenvalues;
  clip_psd(lp, eps, "P");
  clip_psd(lq, eps, "Q");
  const double smallest = lp.minCoeff() + lq.minCoeff();
  if (!(smallest > eps)) {
    throw Error(ErrorCode::SingularPencil,
                "min eigenvalue sum " + std::to_string(smallest) + " <= eps " + std::to_string(eps));
  }

  // In the eigenbases the operator is diagonal: (lp_i + lq_j) S_ij = (U^T R V)_ij.
  Matrix s = p.eigenvectors.transpose() * r * q.eigenvectors;
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, j) /= lp[i] + lq[j];
  }
  return p.eigenvectors * s * q.eigenvectors.transpose();
}

Matrix solve_sylvester_kron(const Matrix& p, const Matrix& q, const Matrix& r, std::size_t max_dim) {
  require_square(p, "P");
  require_square(q, "Q");
  const Eigen::Index k = p.rows();
  const Eigen::Index d = q.rows();
  if (r.rows() != k || r.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "R must be rows(P) x rows(Q)");
  }
  const auto unknowns = static_cast<std::size_t>(k * d);
  if (unknowns > max_dim * max_dim) {
    throw Error(ErrorCode::TooLarge, std::to_string(unknowns) + " unknowns exceed the Kronecker guard");
  }
  if (unknowns == 0) return Matrix::Zero(k, d);

  // Column-major vec: vec(P W) = (I_d (x) P) vec W, vec(W Q) = (Q^T (x) I_k) vec W.
  const auto n = static_cast<Eigen::Index>(unknowns);
  Matrix system = Matrix::Zero(n, n);
  for (Eigen::Index b = 0; b < d; ++b) {
    system.block(b * k, b * k, k, k) += p;
    for (Eigen::Index a = 0; a < d; ++a) {
      const double qab = q(b, a);  // (Q^T)_{ab}
      if (qab == 0.0) continue;
      for (Eigen::Index i = 0; i < k; ++i) system(a * k + i, b * k + i) += qab;
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(r.data(), n);
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::SingularSystem, "Kronecker system is singular");
  }
  const Vector x = lu.solve(rhs);
  return Eigen::Map<const Matrix>(x.data(), k, d);
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  require_square(a, "A");
  if (b.rows() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "rows(B) must equal rows(A)");
  require_finite(a, "A");
  require_finite(b, "B");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
  }
  return llt.solve(b);
}

}  // namespace ldfm::linalg

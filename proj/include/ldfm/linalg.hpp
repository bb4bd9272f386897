#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string_view>

namespace ldfm::linalg {

// Column-major dense storage. All public operations reject NaN/Inf inputs.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigendecomposition of a symmetric matrix: M = V diag(values) V^T.
struct SymEigen {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns
};

/// Throws InvalidArgument naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

/// Largest absolute entry; 0 for an empty matrix.
double max_abs(const Matrix& m);

/// Decomposes (M + M^T) / 2 after checking ||M - M^T||_max <= tol * ||M||_max.
SymEigen sym_eigen(const Matrix& m, double tol = 1e-10);

/// Scale-relative singularity guard for P W + W Q = R:
/// 1e-10 * (trace(P) + trace(Q)) / (k + d).
double default_pencil_eps(const Matrix& p, const Matrix& q);

/// Solves P W + W Q = R for symmetric PSD P (k x k) and Q (d x d) through
/// the eigenbases of P and Q. Eigenvalues in [-eps, 0] are clipped to zero.
/// Throws SingularPencil when min(eig P) + min(eig Q) <= eps.
Matrix solve_sylvester_sympsd(const Matrix& p, const Matrix& q, const Matrix& r,
                              std::optional<double> eps = std::nullopt);

/// Same solve with both decompositions precomputed. Used by the optimizer,
/// where Q = lambda X X^T is fixed across iterations.
Matrix solve_sylvester_sympsd(const SymEigen& p, const SymEigen& q, const Matrix& r,
                              double eps);

/// Reference solver: forms (I_d (x) P + Q^T (x) I_k) vec(W) = vec(R) explicitly
/// and solves it with full-pivot LU. Only for small validation instances;
/// throws TooLarge when k * d > max_dim^2.
Matrix solve_sylvester_kron(const Matrix& p, const Matrix& q, const Matrix& r,
                            std::size_t max_dim = 32);

/// Cholesky solve of A X = B for symmetric positive definite A.
Matrix solve_spd(const Matrix& a, const Matrix& b);

}  // namespace ldfm::linalg

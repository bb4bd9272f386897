#include "ldfm/error.hpp"
#include "ldfm/label_semantics.hpp"
#include "ldfm/ldfm.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace ldfm {
namespace {

using linalg::Matrix;
using linalg::Vector;

// Entry-by-entry evaluation, kept free of matrix products.
double objective_by_loops(const Matrix& w, const Matrix& yt, const Matrix& x, double lambda) {
  double dec = 0.0, enc = 0.0;
  for (Eigen::Index m = 0; m < x.rows(); ++m) {
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      double recon = 0.0;
      for (Eigen::Index j = 0; j < w.rows(); ++j) recon += w(j, m) * yt(j, i);
      dec += (x(m, i) - recon) * (x(m, i) - recon);
    }
  }
  for (Eigen::Index j = 0; j < w.rows(); ++j) {
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      double proj = 0.0;
      for (Eigen::Index m = 0; m < x.rows(); ++m) proj += w(j, m) * x(m, i);
      enc += (proj - yt(j, i)) * (proj - yt(j, i));
    }
  }
  return dec + lambda * enc;
}

// Central finite differences of f around `at`.
Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& at, double h = 1e-6) {
  Matrix g(at.rows(), at.cols());
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    Matrix plus = at, minus = at;
    plus.data()[i] += h;
    minus.data()[i] -= h;
    g.data()[i] = (f(plus) - f(minus)) / (2 * h);
  }
  return g;
}

TEST(Objective, TrivialCases) {
  std::mt19937_64 rng(1);
  const Matrix x = testing::random_matrix(rng, 4, 6);
  EXPECT_DOUBLE_EQ(objective(Matrix::Zero(2, 4), Matrix::Zero(2, 6), x, 0.7), x.squaredNorm());

  // W with orthonormal rows and X inside its row space: both residuals vanish.
  Matrix w = Matrix::Zero(2, 4);
  w(0, 0) = 1;
  w(1, 1) = 1;
  Matrix xs = Matrix::Zero(4, 6);
  xs.topRows(2) = testing::random_matrix(rng, 2, 6);
  EXPECT_NEAR(objective(w, w * xs, xs, 2.0), 0.0, 1e-24);
}

TEST(Objective, MatchesLoopEvaluation) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix w = testing::random_matrix(rng, 3, 5);
    const Matrix yt = testing::random_matrix(rng, 3, 7);
    const Matrix x = testing::random_matrix(rng, 5, 7);
    const double got = objective(w, yt, x, 1.3);
    EXPECT_NEAR(got, objective_by_loops(w, yt, x, 1.3), 1e-12 * got);
  }
  EXPECT_TRUE(testing::throws_code([] { objective(Matrix::Zero(2, 3), Matrix::Zero(2, 4), Matrix::Zero(4, 4), 1); },
                                   ErrorCode::DimensionMismatch));
}

TEST(UpdateW, ScalarClosedForm) {
  const Matrix one = Matrix::Ones(1, 1);
  EXPECT_NEAR(update_w(one, one, 1.0)(0, 0), 1.0, 1e-14);
  // y^2 w + lambda x^2 w = (lambda + 1) y x with y = 2, x = 3, lambda = 0.5.
  const Matrix w = update_w(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 3.0), 0.5);
  EXPECT_NEAR(w(0, 0), 1.5 * 6.0 / (4.0 + 0.5 * 9.0), 1e-14);
}

TEST(UpdateW, ZeroLabelsGiveZeroProjection) {
  std::mt19937_64 rng(3);
  const Matrix x = testing::random_matrix(rng, 3, 8);
  EXPECT_LE(update_w(Matrix::Zero(2, 8), x, 1.0).norm(), 1e-15);
}

TEST(UpdateW, StationaryByFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = testing::random_matrix(rng, 5, 8);
    const Matrix yt = testing::random_matrix(rng, 3, 8);
    const double lambda = 0.7;
    const auto f = [&](const Matrix& w) { return objective(w, yt, x, lambda); };
    const Matrix w0 = testing::random_matrix(rng, 3, 5);
    const Matrix w = update_w(yt, x, lambda);
    EXPECT_LE(fd_gradient(f, w).norm(), 1e-6 * (1.0 + fd_gradient(f, w0).norm()));
  }
}

TEST(UpdateY, TrivialCases) {
  std::mt19937_64 rng(5);
  const Matrix x = testing::random_matrix(rng, 4, 6);
  Matrix w = Matrix::Zero(2, 4);
  w(0, 2) = 1;
  w(1, 3) = 1;
  EXPECT_LE((update_y(w, x, 1.0) - w * x).norm(), 1e-14);
  EXPECT_LE(update_y(Matrix::Zero(2, 4), x, 1.0).norm(), 1e-15);
}

TEST(UpdateY, AgreesWithKroneckerOracle) {
  std::mt19937_64 rng(6);
  for (const double lambda : {0.2, 1.0, 2.0}) {
    const Matrix w = testing::random_matrix(rng, 3, 5);
    const Matrix x = testing::random_matrix(rng, 5, 8);
    const Matrix got = update_y(w, x, lambda);
    const Matrix oracle = linalg::solve_sylvester_kron(w * w.transpose(), lambda * Matrix::Identity(8, 8),
                                                       (lambda + 1) * w * x);
    EXPECT_LE(testing::rel_diff(got, oracle), 1e-8);

    const auto f = [&](const Matrix& yt) { return objective(w, yt, x, lambda); };
    EXPECT_LE(fd_gradient(f, got).norm(), 1e-6 * (1.0 + fd_gradient(f, Matrix::Zero(3, 8)).norm()));
  }
}

TEST(Fit, SingleIterationTrace) {
  const auto data = testing::synthetic_dataset(1, 6, 3, 20, 3);
  const auto model = fit(data.features, data.labels, {1.0, 1, 0.0});
  EXPECT_EQ(model.objective_trace.size(), 1u);
  EXPECT_EQ(model.iterations_run, 1u);
  EXPECT_EQ(model.w.rows(), 3);
  EXPECT_EQ(model.w.cols(), 6);
}

TEST(Fit, FirstStepStartsFromCorrelatedLabels) {
  const auto data = testing::synthetic_dataset(2, 6, 3, 20, 3);
  const auto model = fit(data.features, data.labels, {1.0, 1, 0.0});
  const Matrix y0 = init_numeric_labels(data.labels, jaccard_correlation(data.labels));
  const Matrix w1 = update_w(y0, data.features, 1.0);
  EXPECT_LE(testing::rel_diff(model.w, w1), 1e-10);
  EXPECT_LE(testing::rel_diff(model.y_numeric, update_y(w1, data.features, 1.0)), 1e-10);
}

TEST(Fit, MonotoneTraceProperty) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    std::mt19937_64 rng(seed);
    const auto d = 2 + static_cast<Eigen::Index>(seed % 10);
    const auto k = 1 + static_cast<Eigen::Index>(seed % 5);
    const auto n = 10 + static_cast<Eigen::Index>(seed % 20);
    const Matrix x = testing::random_matrix(rng, d, n);
    Matrix y = testing::random_binary(rng, k, n, 0.5);
    y.col(0).setOnes();
    const auto model = fit(x, y, {0.2 + 0.3 * static_cast<double>(seed % 6), 20, 0.0});
    ASSERT_EQ(model.objective_trace.size(), 20u);
    for (std::size_t t = 1; t < model.objective_trace.size(); ++t) {
      const double prev = model.objective_trace[t - 1];
      EXPECT_LE(model.objective_trace[t], prev + 1e-9 * (1 + prev)) << "seed " << seed << " t " << t;
    }
    EXPECT_TRUE(model.w.allFinite());
  }
}

TEST(Fit, EarlyStopOnPlateau) {
  const auto data = testing::synthetic_dataset(3, 8, 3, 40, 4);
  const auto capped = fit(data.features, data.labels, {1.0, 200, 1e-6});
  EXPECT_LT(capped.iterations_run, 200u);
  EXPECT_EQ(capped.objective_trace.size(), capped.iterations_run);
  const auto n = capped.objective_trace.size();
  ASSERT_GE(n, 2u);
  EXPECT_LT((capped.objective_trace[n - 2] - capped.objective_trace[n - 1]) / capped.objective_trace[n - 2], 1e-6);
}

TEST(Fit, Errors) {
  const auto data = testing::synthetic_dataset(4, 4, 2, 10, 2);
  Matrix bad = data.labels;
  bad(0, 0) = 0.5;
  EXPECT_TRUE(testing::throws_code([&] { fit(data.features, bad, {}); }, ErrorCode::NonBinaryInput));
  EXPECT_TRUE(testing::throws_code([&] { fit(data.features, data.labels, {0.0, 10, 0}); },
                                   ErrorCode::InvalidArgument));
  EXPECT_TRUE(testing::throws_code([&] { fit(data.features, data.labels, {1.0, 0, 0}); },
                                   ErrorCode::InvalidArgument));
  EXPECT_TRUE(testing::throws_code([&] { fit(data.features, data.labels.leftCols(5), {}); },
                                   ErrorCode::DimensionMismatch));
  // All-zero labels with rank-deficient X: nothing pins W down.
  EXPECT_TRUE(testing::throws_code([] { fit(Matrix::Ones(3, 5), Matrix::Zero(2, 5), {}); },
                                   ErrorCode::SingularPencil));
}

TEST(FitFrozenLabels, KeepsLogicalLabelsAndFlatTrace) {
  const auto data = testing::synthetic_dataset(5, 6, 3, 30, 3);
  const auto model = fit_frozen_labels(data.features, data.labels, {1.0, 5, 0.0});
  EXPECT_EQ(model.y_numeric, data.labels);
  ASSERT_EQ(model.objective_trace.size(), 5u);
  for (double v : model.objective_trace) EXPECT_EQ(v, model.objective_trace.front());
  EXPECT_LE(testing::rel_diff(model.w, update_w(data.labels, data.features, 1.0)), 1e-10);
}

TEST(EncodeDecode, Basics) {
  LdfmModel model;
  model.w = Matrix::Identity(3, 3);
  Vector x(3);
  x << 1, -2, 3;
  EXPECT_EQ(encode(model, x), x);
  EXPECT_EQ(encode(model, Vector::Zero(3)), Vector::Zero(3));
  EXPECT_EQ(decode(model, Vector::Zero(3)), Vector::Zero(3));
  EXPECT_TRUE(testing::throws_code([&] { encode(model, Vector::Zero(2)); }, ErrorCode::DimensionMismatch));
  EXPECT_TRUE(testing::throws_code([&] { decode(model, Vector::Zero(4)); }, ErrorCode::DimensionMismatch));
}

TEST(EncodeDecode, ProjectorAndLinearity) {
  std::mt19937_64 rng(8);
  LdfmModel model;
  const Eigen::HouseholderQR<Matrix> qr(testing::random_matrix(rng, 5, 2));
  model.w = Matrix(qr.householderQ()).leftCols(2).transpose();  // orthonormal rows
  const Vector x = testing::random_matrix(rng, 5, 1);
  const Vector round = decode(model, encode(model, x));
  EXPECT_LE((round - model.w.transpose() * model.w * x).norm(), 1e-14);
  EXPECT_LE((model.w * (x - round)).norm(), 1e-14);  // residual orthogonal to row space

  model.w = testing::random_matrix(rng, 3, 5);
  const Vector x2 = testing::random_matrix(rng, 5, 1);
  const Vector lhs = encode(model, 2.5 * x - 0.5 * x2);
  const Vector rhs = 2.5 * encode(model, x) - 0.5 * encode(model, x2);
  EXPECT_LE((lhs - rhs).norm(), 1e-13 * (1 + rhs.norm()));
  Vector explicit_product = Vector::Zero(3);
  for (int j = 0; j < 3; ++j) {
    for (int m = 0; m < 5; ++m) explicit_product[j] += model.w(j, m) * x[m];
  }
  EXPECT_LE((encode(model, x) - explicit_product).norm(), 1e-13);
}

TEST(RankFeatures, ColumnNorms) {
  Matrix w(2, 2);
  w << 1, 0, 0, 2;
  const auto r = rank_features(w);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].feature, 1);
  EXPECT_EQ(r[0].score, 2.0);
  EXPECT_EQ(r[1].feature, 0);

  Matrix z(2, 3);
  z << 1, 0, 1, 1, 0, 1;
  const auto rz = rank_features(z);
  EXPECT_EQ(rz[0].feature, 0);  // tie with feature 2, lower index first
  EXPECT_EQ(rz[1].feature, 2);
  EXPECT_EQ(rz[2].feature, 1);
  EXPECT_EQ(rz[2].score, 0.0);
}

TEST(RankFeatures, PermutationWithIndependentNormsProperty) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix w = testing::random_matrix(rng, 4, 9);
    const auto r = rank_features(w);
    std::vector<bool> seen(9, false);
    for (std::size_t i = 0; i < r.size(); ++i) {
      double sq = 0.0;
      for (int j = 0; j < 4; ++j) sq += w(j, r[i].feature) * w(j, r[i].feature);
      EXPECT_NEAR(r[i].score, std::sqrt(sq), 1e-14);
      if (i > 0) EXPECT_GE(r[i - 1].score, r[i].score);
      seen[static_cast<std::size_t>(r[i].feature)] = true;
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
  }
}

TEST(ReconstructionError, Cases) {
  std::mt19937_64 rng(10);
  Matrix w = Matrix::Zero(2, 4);
  w(0, 0) = 1;
  w(1, 1) = 1;
  Matrix x = Matrix::Zero(4, 5);
  x.topRows(2) = testing::random_matrix(rng, 2, 5);
  EXPECT_NEAR(reconstruction_error(x, w, w * x), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(reconstruction_error(x, w, Matrix::Zero(2, 5)), 1.0);
  EXPECT_TRUE(testing::throws_code([&] { reconstruction_error(Matrix::Zero(4, 5), w, w * x); }, ErrorCode::ZeroInput));
}

TEST(ReconstructionError, LearnedLabelsBeatLogicalOnSyntheticData) {
  const auto data = testing::synthetic_dataset(11, 10, 3, 60, 5);
  const auto model = fit(data.features, data.labels, {1.0, 50, 0.0});
  EXPECT_LT(reconstruction_error(data.features, model.w, model.y_numeric),
            reconstruction_error(data.features, model.w, data.labels));
}

TEST(ModelFile, RoundTripIsBitExact) {
  const auto data = testing::synthetic_dataset(12, 5, 2, 15, 3);
  const auto model = fit(data.features, data.labels, {0.4, 7, 0.0});
  std::stringstream buf;
  save_model(model, buf);
  const auto loaded = load_model(buf);
  EXPECT_EQ(loaded, model);

  std::stringstream bad("ldfm-model 2\n");
  EXPECT_TRUE(testing::throws_code([&] { load_model(bad); }, ErrorCode::SyntaxError));
  std::stringstream truncated("ldfm-model 1\nlambda 1\nmax_iterations 3\n");
  EXPECT_TRUE(testing::throws_code([&] { load_model(truncated); }, ErrorCode::SyntaxError));
}

}  // namespace
}  // namespace ldfm

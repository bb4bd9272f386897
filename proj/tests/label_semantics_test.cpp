#include "ldfm/error.hpp"
#include "ldfm/label_semantics.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace ldfm {
namespace {

using linalg::Matrix;

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : values) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(Jaccard, IdenticalAndDisjoint) {
  EXPECT_EQ(jaccard_correlation(rows({{1, 0, 1}, {1, 0, 1}})).values(0, 1), 1.0);
  EXPECT_EQ(jaccard_correlation(rows({{1, 1, 0}, {0, 0, 1}})).values(0, 1), 0.0);
}

TEST(Jaccard, OneThird) {
  const auto c = jaccard_correlation(rows({{1, 1, 0, 0}, {0, 1, 1, 0}}));
  EXPECT_DOUBLE_EQ(c.values(0, 1), 1.0 / 3.0);
  EXPECT_EQ(c.values(0, 0), 1.0);
}

TEST(Jaccard, AllZeroLabels) {
  const auto c = jaccard_correlation(rows({{0, 0, 0}, {0, 0, 0}, {1, 0, 1}}));
  EXPECT_EQ(c.values(0, 1), 0.0);
  EXPECT_EQ(c.values(0, 0), 1.0);
  EXPECT_EQ(c.values(1, 1), 1.0);
  EXPECT_EQ(c.values(0, 2), 0.0);
}

// Independent set-based recount for each pair.
TEST(Jaccard, MatchesSetDefinitionProperty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const Matrix y = testing::random_binary(rng, 5, 12, 0.3);
    const auto c = jaccard_correlation(y);
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < 5; ++b) {
        int inter = 0, uni = 0;
        for (int i = 0; i < 12; ++i) {
          inter += (y(a, i) == 1 && y(b, i) == 1);
          uni += (y(a, i) == 1 || y(b, i) == 1);
        }
        const double expected = a == b ? 1.0 : (uni == 0 ? 0.0 : static_cast<double>(inter) / uni);
        EXPECT_DOUBLE_EQ(c.values(a, b), expected);
        EXPECT_EQ(c.values(a, b), c.values(b, a));
      }
    }
  }
}

TEST(Jaccard, RejectsNonBinary) {
  EXPECT_TRUE(testing::throws_code([] { jaccard_correlation(rows({{0.5, 1}})); }, ErrorCode::NonBinaryInput));
}

TEST(NumericLabels, IdentityCorrelationKeepsLabels) {
  const Matrix y = rows({{1, 0, 1}, {0, 1, 1}});
  EXPECT_EQ(init_numeric_labels(y, CorrelationMatrix{Matrix::Identity(2, 2)}), y);
}

TEST(NumericLabels, SpreadsOntoCorrelatedLabels) {
  const Matrix y = rows({{1, 1, 0, 0}, {0, 1, 1, 0}});
  const Matrix yt = init_numeric_labels(y, jaccard_correlation(y));
  // Instance 0 only carries label 0; label 1 gets the 1/3 similarity.
  EXPECT_DOUBLE_EQ(yt(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(yt(1, 0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(yt(0, 1), 4.0 / 3.0);
  EXPECT_EQ(yt(0, 3), 0.0);
  EXPECT_TRUE((yt.array() >= y.array()).all());
}

TEST(NumericLabels, DimensionMismatch) {
  EXPECT_TRUE(testing::throws_code(
      [] { init_numeric_labels(Matrix::Ones(2, 3), CorrelationMatrix{Matrix::Identity(3, 3)}); },
      ErrorCode::DimensionMismatch));
}

}  // namespace
}  // namespace ldfm

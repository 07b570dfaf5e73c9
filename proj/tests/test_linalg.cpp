#include <gtest/gtest.h>

#include <cmath>

#include "lyapcert/linalg.hpp"
#include "oracles.hpp"

using namespace lyapcert;

TEST(Mat2, ProductExamples) {
  EXPECT_EQ(Mat2::identity() * Mat2::identity(), Mat2::identity());
  const Mat2 quarter{0, -1, 1, 0};
  EXPECT_EQ(quarter * quarter, (Mat2{-1, 0, 0, -1}));
  const Mat2 m{2, -1, 1, 0};
  EXPECT_EQ(mat2_mul(m, m), (Mat2{3, -2, 2, -1}));
}

TEST(Mat2, OperatorNormExamples) {
  EXPECT_DOUBLE_EQ(operator_norm(Mat2::identity()), 1.0);
  EXPECT_NEAR(operator_norm(Mat2::diagonal(2.0, 0.5)), 2.0, 1e-15);
  EXPECT_NEAR(operator_norm(Mat2{2, -1, 1, 0}), 1.0 + std::sqrt(2.0), 1e-14);
}

TEST(Mat2, OperatorNormMatchesBruteForce) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Mat2 m = oracle::random_entries(rng, 3.0);
    EXPECT_NEAR(operator_norm(m), oracle::brute_norm(m), 1e-9 * (1 + operator_norm(m)));
  }
}

TEST(Mat2, Sl2NormSymmetryAndColumnBound) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 m = oracle::random_sl2(rng, 20.0);
    ASSERT_TRUE(is_sl2(m, 1e-10));
    const double n = operator_norm(m);
    EXPECT_NEAR(n / operator_norm(inverse(m)), 1.0, 1e-10);
    const double col = std::max(std::hypot(m.a, m.c), std::hypot(m.b, m.d));
    EXPECT_GE(n, col / std::sqrt(2.0));
  }
}

TEST(Mat2, InverseOfSingularThrows) {
  EXPECT_THROW(inverse(Mat2{1, 2, 2, 4}), Error);
}

TEST(LogNormAccumulator, Examples) {
  const Vec2 v = normalized({0.6, 0.8});
  auto acc = apply_renormalized({v, 0.0}, Mat2::identity());
  EXPECT_NEAR(acc.direction.x, v.x, 1e-16);
  EXPECT_NEAR(acc.direction.y, v.y, 1e-16);
  EXPECT_EQ(acc.log_norm, 0.0);

  acc = apply_renormalized({{1, 0}, 0.0}, Mat2::diagonal(3.0, 1.0 / 3.0));
  EXPECT_NEAR(acc.log_norm, std::log(3.0), 1e-15);
  EXPECT_NEAR(acc.direction.x, 1.0, 1e-15);
}

TEST(LogNormAccumulator, TwentyFoldSl2MatchesNaiveProduct) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Mat2> fs;
    for (int i = 0; i < 20; ++i) fs.push_back(oracle::random_sl2(rng, 2.0));
    const Vec2 v = unit_at(rng.uniform(0, 3.14));
    LogNormAccumulator acc{v, 0.0};
    for (const auto& m : fs) acc = apply_renormalized(acc, m);
    const double naive = std::log(norm(oracle::naive_product(fs) * v));
    EXPECT_NEAR(acc.log_norm, naive, 1e-10 * std::max(1.0, std::fabs(naive)));
    EXPECT_NEAR(norm(acc.direction), 1.0, 1e-12);
  }
}

TEST(LogNormAccumulator, RandomEntriesUpToForty) {
  // Property: renormalized accumulation equals naive log-norms, entries in [-3, 3].
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int N = 1 + static_cast<int>(rng.below(40));
    std::vector<Mat2> fs;
    for (int i = 0; i < N; ++i) fs.push_back(oracle::random_entries(rng, 3.0));
    const Vec2 v = unit_at(rng.uniform(0, 3.14));
    LogNormAccumulator acc{v, 0.0};
    for (const auto& m : fs) acc = apply_renormalized(acc, m);
    const Vec2 img = oracle::naive_product(fs) * v;
    const double naive = std::log(norm(img));
    EXPECT_NEAR(acc.log_norm, naive, 1e-9 * std::max(1.0, std::fabs(naive))) << "N=" << N;
  }
}

TEST(LogNormAccumulator, ZeroImageIsFatal) {
  EXPECT_THROW(apply_renormalized({{1, 0}, 0.0}, Mat2{0, 0, 0, 0}), Error);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lyapcert/cocycle.hpp"
#include "oracles.hpp"

using namespace lyapcert;

namespace {

CocycleSpec constant_spec(double E) { return {PotentialDescriptor::zero(), E, DynamicsDescriptor::doubling(2)}; }

CocycleSpec cosine_spec(double E, double lambda, std::int64_t K = 2) {
  return {PotentialDescriptor::cosine(lambda), E, DynamicsDescriptor::doubling(K)};
}

std::vector<Mat2> raw_factors(const CocycleSpec& spec, TorusPoint x, int N) {
  std::vector<Mat2> fs;
  TorusPoint p = x;
  for (int n = 0; n < N; ++n) {
    fs.push_back({spec.energy - spec.potential(p), -1.0, 1.0, 0.0});
    p = spec.dynamics.step(p);
  }
  return fs;
}

}  // namespace

TEST(TransferStep, Examples) {
  EXPECT_EQ(transfer_step(0, 0), (Mat2{0, -1, 1, 0}));
  EXPECT_EQ(transfer_step(3, 1), (Mat2{2, -1, 1, 0}));
  const Mat2 m = transfer_step(2 * std::cos(std::numbers::pi / 3), 0);
  EXPECT_NEAR(m.a, 1.0, 1e-15);
  EXPECT_NEAR(m.trace(), 1.0, 1e-15);
  EXPECT_LT(std::fabs(m.trace()), 2.0);
}

TEST(TransferStep, UnitDeterminant) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_NEAR(transfer_step(rng.uniform(-5, 5), rng.uniform(-5, 5)).det(), 1.0, 1e-12);
  }
}

TEST(OrbitProduct, ZeroLengthIsIdentity) {
  const Vec2 v = normalized({1, 2});
  const auto r = orbit_product(cosine_spec(0.3, 1.0), {0.2, 0}, 0, v);
  EXPECT_EQ(r.log_norm, 0.0);
  EXPECT_EQ(r.direction, v);
  const auto a = adjoint_orbit_product(cosine_spec(0.3, 1.0), {0.2, 0}, 0, v);
  EXPECT_EQ(a.log_norm, 0.0);
  EXPECT_EQ(a.direction, v);
}

TEST(OrbitProduct, ConstantPotentialHyperbolic) {
  const auto r = orbit_product(constant_spec(3.0), {0.1, 0}, 100, {1, 0});
  const double expected = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  EXPECT_NEAR(r.log_norm / 100.0, expected, 0.02 * expected);
  const auto a = adjoint_orbit_product(constant_spec(3.0), {0.1, 0}, 100, {1, 0});
  EXPECT_NEAR(a.log_norm / 100.0, expected, 0.02 * expected);
}

TEST(OrbitProduct, MatchesNaiveProduct) {
  const CocycleSpec spec = cosine_spec(0.7, 1.3, 3);
  const TorusPoint x{0.137, 0};
  const Vec2 v = normalized({0.3, -0.9});
  const auto fs = raw_factors(spec, x, 5);
  const Mat2 P = oracle::naive_product(fs);
  EXPECT_NEAR(orbit_product(spec, x, 5, v).log_norm, std::log(norm(P * v)), 1e-11);
  EXPECT_NEAR(adjoint_orbit_product(spec, x, 5, v).log_norm, std::log(norm(P.transposed() * v)), 1e-11);
}

TEST(OrbitProduct, AdjointNormDominatedAndAttained) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const CocycleSpec spec = cosine_spec(rng.uniform(-3, 3), rng.uniform(0, 2));
    const TorusPoint x{rng.uniform(), 0};
    const int N = 1 + static_cast<int>(rng.below(20));
    const Mat2 P = oracle::naive_product(raw_factors(spec, x, N));
    const double full = std::log(oracle::brute_norm(P));
    const Vec2 w = unit_at(rng.uniform(0, 3.14));
    EXPECT_LE(adjoint_orbit_product(spec, x, N, w).log_norm, full + 1e-9);
    // top right-singular vector of Pᵀ attains ‖Pᵀ‖ = ‖P‖
    double best = -1e300;
    for (int k = 0; k < 20000; ++k) {
      const Vec2 u = unit_at(std::numbers::pi * k / 20000);
      best = std::max(best, adjoint_orbit_product(spec, x, N, u).log_norm);
    }
    EXPECT_NEAR(best, full, 1e-6);
  }
}

TEST(FPFrame, Examples) {
  const FPFrame f0 = fp_frame(0.0);
  EXPECT_NEAR(f0.kappa, std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(max_abs_entry(f0.S - Mat2::identity()), 0.0, 1e-15);

  const FPFrame f1 = fp_frame(std::numbers::sqrt2);
  EXPECT_NEAR(f1.kappa, std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(f1.S.b, -std::numbers::sqrt2 / 2, 1e-15);
  EXPECT_NEAR(f1.S.d, std::numbers::sqrt2 / 2, 1e-15);
  EXPECT_EQ(f1.S.c, 0.0);
  EXPECT_GT(f1.S.det(), 0.0);
  EXPECT_NEAR(f1.energy(), std::numbers::sqrt2, 1e-12);
}

TEST(FPFrame, BandBoundary) {
  const double delta = 0.1;
  EXPECT_NO_THROW(fp_frame(2.0 - delta, delta));
  EXPECT_NO_THROW(fp_frame(-(2.0 - delta), delta));
  try {
    fp_frame(2.0 - delta / 2, delta);
    FAIL() << "expected energy-out-of-band";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::energy_out_of_band);
  }
}

TEST(FPStep, ZeroCouplingIsRotation) {
  const FPFrame f = fp_frame(0.8);
  EXPECT_NEAR(max_abs_entry(fp_step(f, 0.0, 0.37) - Mat2::rotation(f.kappa)), 0.0, 1e-15);
}

TEST(FPStep, ConjugationIdentitySingleStep) {
  const FPFrame f = fp_frame(1.0);
  const Mat2 expected = f.S * transfer_step(1.0, 0.4 * 0.7) * f.S_inverse;
  EXPECT_NEAR(max_abs_entry(fp_step(f, 0.4, 0.7) - expected), 0.0, 1e-12);
  EXPECT_NEAR(fp_step(f, 0.4, 0.7).det(), 1.0, 1e-12);
}

TEST(FPStep, ConjugationOfProducts) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const double E = rng.uniform(-1.95, 1.95);
    const double lambda = rng.uniform(0, 2);
    const FPFrame f = fp_frame(E);
    const int N = 1 + static_cast<int>(rng.below(100));
    Mat2 raw = Mat2::identity(), fp = Mat2::identity();
    for (int n = 0; n < N; ++n) {
      const double v = rng.uniform(-1, 1);
      raw = transfer_step(E, lambda * v) * raw;
      fp = fp_step(f, lambda, v) * fp;
      ASSERT_NEAR(fp_step(f, lambda, v).det(), 1.0, 1e-12);
    }
    const Mat2 conj = f.S * raw * f.S_inverse;
    EXPECT_LE(max_abs_entry(fp - conj), N * 1e-12 * std::max(1.0, max_abs_entry(conj)));
  }
}

TEST(FPStep, ExponentInvariance) {
  // |log‖S M S⁻¹‖ − log‖M‖| ≤ log‖S‖ + log‖S⁻¹‖, so per-site values differ by
  // at most (2/N)(log‖S‖ + log‖S⁻¹‖).
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const double E = rng.uniform(-1.9, 1.9);
    const FPFrame f = fp_frame(E);
    const CocycleSpec spec = cosine_spec(E, rng.uniform(0, 2));
    const TorusPoint x{rng.uniform(), 0};
    const int N = 50;
    const Vec2 w = unit_at(rng.uniform(0, 3.14));
    const double raw = orbit_product(spec, x, N, f.S_inverse * w).log_norm - std::log(norm(f.S_inverse * w));
    const double fp = orbit_product(spec, x, N, w, f).log_norm;
    // log‖S M S⁻¹ w‖ computed directly
    const Mat2 P = oracle::naive_product(raw_factors(spec, x, N));
    EXPECT_NEAR(fp, std::log(norm(f.S * P * f.S_inverse * w)), 1e-9);
    const double slack = std::log(operator_norm(f.S)) + std::log(operator_norm(f.S_inverse));
    EXPECT_LE(std::fabs(fp - raw) / N, 2.0 * slack / N + 1e-12);
  }
}

TEST(ConstantPotential, ExponentOracle) {
  for (double c : {0.0, 0.5}) {
    for (double E : {-4.0, -2.5, 3.0, 5.0, 0.0, 1.0, 1.9}) {
      const CocycleSpec spec{PotentialDescriptor::trig({{c, 0, 0, 0}}, 1.0), E, DynamicsDescriptor::doubling(2)};
      const int N = 2000;
      const double d = std::fabs(E - c);
      const double expected = d > 2 ? std::log((d + std::sqrt(d * d - 4)) / 2) : 0.0;
      const double got =
          std::max(orbit_product(spec, {0.3, 0}, N, {1, 0}).log_norm, orbit_product(spec, {0.3, 0}, N, {0, 1}).log_norm);
      EXPECT_NEAR(got / N, expected, 10.0 / N) << "E=" << E << " c=" << c;
    }
  }
}

TEST(CocycleSpec, RejectsPlanarPotentialOnCircle) {
  const CocycleSpec spec{PotentialDescriptor::trig({{1, 0, 1, 1}}, 1.0), 0.0, DynamicsDescriptor::doubling(2)};
  EXPECT_THROW(spec.validate(), Error);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lyapcert/certificate.hpp"
#include "oracles.hpp"

using namespace lyapcert;

namespace {

CocycleSpec cosine_spec(double lambda, std::int64_t K = 2, double E = 0.0) {
  return {PotentialDescriptor::cosine(lambda), E, DynamicsDescriptor::doubling(K)};
}

CertificateRequest small_request(const CocycleSpec& spec, int N0, std::vector<double> energies) {
  CertificateRequest req;
  req.spec = spec;
  req.N0 = N0;
  req.energies = std::move(energies);
  req.x_grid = 64;
  req.theta_grid = 32;
  req.threads = 1;
  return req;
}

// Enumerates every offset orbit with long-double arithmetic and multiplies the
// raw transfer matrices (conjugated by S when a frame is given).
double oracle_bound(const CocycleSpec& spec, int N0, double x, Vec2 w, std::optional<FPFrame> frame) {
  const std::int64_t K = spec.dynamics.doubling_map().K;
  std::int64_t count = 1;
  for (int j = 0; j < N0; ++j) count *= K;
  double total = 0.0;
  for (std::int64_t a = 0; a < count; ++a) {
    long double y = static_cast<long double>(x) + static_cast<long double>(a) / count;
    std::vector<Mat2> fs;
    for (int j = 0; j < N0; ++j) {
      y -= std::floor(y);
      const double v = spec.potential({static_cast<double>(y), 0.0});
      Mat2 m{spec.energy - v, -1.0, 1.0, 0.0};
      if (frame) m = frame->S * m * frame->S_inverse;
      fs.push_back(m);
      y *= K;
    }
    const Mat2 adj = oracle::naive_product(fs).transposed();
    total += std::log(norm(adj * w));
  }
  return total / static_cast<double>(count);
}

double oracle_grid_min(const CocycleSpec& spec, int N0, std::size_t nx, std::size_t nt, std::optional<FPFrame> frame) {
  double best = 1e300;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t k = 0; k < nt; ++k) {
      const double th = std::numbers::pi * static_cast<double>(k) / static_cast<double>(nt);
      best = std::min(best, oracle_bound(spec, N0, static_cast<double>(i) / nx, unit_at(th), frame));
    }
  }
  return best;
}

}  // namespace

TEST(DoublingBound, ZeroCouplingRotationIsZero) {
  const CocycleSpec spec = cosine_spec(0.0);
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const double v = doubling_bound_at(spec, 4, rng.uniform(), unit_at(rng.uniform(0, 3.1)), fp_frame(0.0));
    EXPECT_NEAR(v, 0.0, 1e-10);
  }
}

TEST(DoublingBound, TwoTermHandComputation) {
  const CocycleSpec spec = cosine_spec(1.0);
  EXPECT_NEAR(doubling_bound_at(spec, 1, 0.0, {1, 0}), 0.5 * std::log(2.0), 1e-14);
}

TEST(DoublingBound, MatchesEnumerationAtN0Three) {
  const CocycleSpec spec = cosine_spec(0.8, 2, 0.4);
  for (double x : {0.0, 0.13, 0.5, 0.977}) {
    for (double th : {0.0, 0.7, 2.9}) {
      EXPECT_NEAR(doubling_bound_at(spec, 3, x, unit_at(th)), oracle_bound(spec, 3, x, unit_at(th), std::nullopt),
                  1e-10);
    }
  }
}

TEST(DoublingBound, OracleEquivalenceRandom) {
  Rng rng(99);
  const std::pair<int, int> shapes[] = {{2, 9}, {2, 5}, {3, 5}, {3, 2}, {5, 3}, {7, 3}};
  for (int t = 0; t < 60; ++t) {
    const auto [K, N0] = shapes[t % 6];
    CocycleSpec spec = cosine_spec(rng.uniform(0, 2), K, rng.uniform(-1.9, 1.9));
    if (t % 3 == 0) spec.potential = PotentialDescriptor::trig({{0.5, 0.2, 1, 0}, {0.1, -0.3, 3, 0}}, 1.3);
    const double x = rng.uniform();
    const Vec2 w = unit_at(rng.uniform(0, std::numbers::pi));
    const auto frame = t % 2 ? std::optional<FPFrame>(fp_frame(spec.energy)) : std::nullopt;
    EXPECT_NEAR(doubling_bound_at(spec, N0, x, w, frame), oracle_bound(spec, N0, x, w, frame), 1e-9)
        << "K=" << K << " N0=" << N0;
  }
}

TEST(DoublingBound, BudgetExceeded) {
  try {
    doubling_bound_at(cosine_spec(1.0), 40, 0.0, {1, 0}, std::nullopt, 1 << 20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::budget_exceeded);
  }
}

TEST(CertifyDoubling, GridMinimumMatchesOracle) {
  const CocycleSpec spec = cosine_spec(0.6);
  auto req = small_request(spec, 4, {-0.7, 0.2});
  req.x_grid = 16;
  req.theta_grid = 8;
  req.refine = false;
  for (auto mode : {RepresentationMode::raw, RepresentationMode::fp_auto}) {
    req.representation = mode;
    const auto report = certify_doubling(req);
    for (const auto& row : report.rows) {
      const auto frame = resolve_frame(row.energy, mode);
      const double expected = oracle_grid_min(detail::at_energy(spec, row.energy), 4, 16, 8, frame);
      EXPECT_NEAR(row.average, expected, 1e-10);
      EXPECT_NEAR(row.raw_bound, expected * 16, 1e-9);
      EXPECT_NEAR(row.normalized, expected / 4, 1e-10);
      EXPECT_EQ(row.fp_frame, frame.has_value());
    }
  }
}

TEST(CertifyDoubling, RefinementNeverIncreasesMinimum) {
  auto req = small_request(cosine_spec(0.5), 5, {-1.0, 0.0, 0.6});
  req.refine = false;
  const auto coarse = certify_doubling(req);
  req.refine = true;
  const auto fine = certify_doubling(req);
  for (std::size_t i = 0; i < coarse.rows.size(); ++i) EXPECT_LE(fine.rows[i].average, coarse.rows[i].average);
}

TEST(CertifyDoubling, NestedGridsAreMonotone) {
  auto req = small_request(cosine_spec(0.5), 4, {-0.4, 0.8});
  req.refine = false;
  const auto a = certify_doubling(req);
  req.x_grid *= 2;
  req.theta_grid *= 2;
  const auto b = certify_doubling(req);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_LE(b.rows[i].average, a.rows[i].average);
}

TEST(CertifyDoubling, ZeroCouplingIsInconclusive) {
  auto req = small_request(cosine_spec(0.0), 6, {-1.9, -1.0, 0.0, 0.5, 1.4, 1.9});
  for (auto mode : {RepresentationMode::raw, RepresentationMode::fp_auto}) {
    req.representation = mode;
    const auto report = certify_doubling(req);
    for (const auto& row : report.rows) {
      EXPECT_EQ(row.verdict, Verdict::inconclusive) << row.energy;
      EXPECT_LE(row.average, 1e-9);
    }
    EXPECT_FALSE(report.all_positive());
  }
}

TEST(CertifyDoubling, LargeEnergyMinimumOverDirectionsIsNegative) {
  // All factors share nearly the same contracting direction, so the minimum
  // over w sits near −log‖M‖ while a generic w sees growth ≈ N₀ log E.
  const CocycleSpec spec = cosine_spec(0.4, 2, 10.0);
  auto req = small_request(spec, 2, {10.0});
  const auto row = certify_doubling(req).rows.at(0);
  EXPECT_FALSE(row.fp_frame);
  EXPECT_LT(row.average, 0.0);
  EXPECT_EQ(row.verdict, Verdict::inconclusive);
  double best = -1e300;
  for (int k = 0; k < 64; ++k) best = std::max(best, doubling_bound_at(spec, 2, 0.3, unit_at(std::numbers::pi * k / 64)));
  EXPECT_NEAR(best / 2, std::log(10.0), 0.25 * std::log(10.0));
}

TEST(CertifyDoubling, NormalizedBelowUniformNormBound) {
  auto req = small_request(cosine_spec(1.5), 3, {-3.0, -1.0, 0.0, 2.5});
  req.representation = RepresentationMode::raw;
  for (const auto& row : certify_doubling(req).rows) {
    const double C2 = 1.5 + std::fabs(row.energy) + 2.0;
    EXPECT_LE(row.normalized, std::log(C2));
  }
}

TEST(CertifyDoubling, RepresentationInvariance) {
  auto req = small_request(cosine_spec(0.7), 4, {-1.5, -0.6, 0.0, 0.9, 1.6});
  req.representation = RepresentationMode::raw;
  const auto raw = certify_doubling(req);
  req.representation = RepresentationMode::fp_auto;
  const auto fp = certify_doubling(req);
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const FPFrame f = fp_frame(raw.rows[i].energy);
    const double slack = 2.0 * (std::log(operator_norm(f.S)) + std::log(operator_norm(f.S_inverse)));
    EXPECT_LE(std::fabs(raw.rows[i].average - fp.rows[i].average), slack);
  }
}

TEST(CertifyDoubling, VerdictMatchesNetValue) {
  auto req = small_request(cosine_spec(0.45), 5, {-1.2, -0.3, 0.0, 0.4, 1.1});
  for (const auto& row : certify_doubling(req).rows) {
    EXPECT_EQ(row.verdict == Verdict::positive, row.average - row.slack - row.error_term > kRoundoffFloor);
    EXPECT_EQ(row.error_term, 0.0);
    EXPECT_NEAR(doubling_bound_at(detail::at_energy(req.spec, row.energy), 5, row.argmin_x.x, row.argmin_w,
                                  resolve_frame(row.energy, req.representation)),
                row.average, 1e-12);
  }
}

TEST(CertifyDoubling, ThreadCountDoesNotChangeOutput) {
  auto req = small_request(cosine_spec(0.5), 4, {-1.0, -0.5, 0.0, 0.5, 1.0});
  const auto a = certify_doubling(req);
  req.threads = 3;
  const auto b = certify_doubling(req);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].average, b.rows[i].average);
}

TEST(CertifyDoubling, SlackModeOnDefaultGridViolatesSmallness) {
  auto req = small_request(cosine_spec(0.4), 6, {0.0});
  req.x_grid = 1024;
  req.rigor = RigorMode::slack_accounted;
  try {
    certify_doubling(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::smallness_violated);
  }
}

TEST(CertifyDoubling, SlackModeOnFineGrid) {
  auto req = small_request(cosine_spec(0.05), 1, {0.0, 2.6});
  req.x_grid = 1 << 14;
  req.theta_grid = 1 << 12;
  req.refine = false;
  req.rigor = RigorMode::slack_accounted;
  const auto report = certify_doubling(req);
  for (const auto& row : report.rows) {
    EXPECT_GT(row.slack, 0.0);
    EXPECT_EQ(row.verdict == Verdict::positive, row.net() > kRoundoffFloor);
  }
}

TEST(CertifyDoubling, RequestValidation) {
  auto req = small_request(cosine_spec(0.5), 4, {});
  try {
    certify_doubling(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_invalid);
  }
  req.energies = {0.0};
  req.N0 = 0;
  EXPECT_THROW(certify_doubling(req), Error);
}

TEST(CertifyToral, ConstantPotentialMatchesMatrixPower) {
  CertificateRequest req;
  req.spec = {PotentialDescriptor::zero(), 0.0, DynamicsDescriptor::toral({2, 1, 1, 1})};
  req.N0 = 3;
  req.energies = {3.0, -2.5};
  req.toral_x_grid = 4;
  req.theta_grid = 64;
  req.segment_points = 32;
  req.threads = 1;
  const auto report = certify_toral(req);
  for (const auto& row : report.rows) {
    const Mat2 T{row.energy, -1, 1, 0};
    const Mat2 P = T * T * T;
    // smallest singular value of P
    const double smin = 1.0 / operator_norm(inverse(P));
    EXPECT_NEAR(row.average, std::log(smin), 1e-8);
    EXPECT_EQ(row.error_term, 0.0);
    EXPECT_FALSE(row.budget_valid);  // the cat map fails the mixing condition
    EXPECT_EQ(row.verdict, Verdict::inconclusive);
  }
}

TEST(CertifyToral, CatMapIsRejected) {
  CertificateRequest req;
  req.spec = {PotentialDescriptor::cosine(1.0), 0.0, DynamicsDescriptor::toral({2, 1, 1, 1})};
  req.energies = {0.0};
  req.toral_x_grid = 4;
  req.theta_grid = 8;
  req.segment_points = 16;
  req.threads = 1;
  for (int N0 = 1; N0 <= 4; ++N0) {
    req.N0 = N0;
    const auto row = certify_toral(req).rows.at(0);
    EXPECT_FALSE(row.budget_valid);
    EXPECT_EQ(row.verdict, Verdict::inconclusive);
  }
}

TEST(CertifyToral, LargeTraceFamily) {
  const double lambda = 1e-3;
  const CocycleSpec probe{PotentialDescriptor::cosine(lambda), 3.0, DynamicsDescriptor::toral({3, 1, 2, 1})};
  const auto n = static_cast<std::int64_t>(toral_error_budget(probe, 1).mixing_required * 4);
  CertificateRequest req;
  req.spec = {PotentialDescriptor::cosine(lambda), 0.0, DynamicsDescriptor::toral({n, 1, n - 1, 1})};
  req.N0 = 1;
  req.energies = {3.0};
  req.toral_x_grid = 8;
  req.theta_grid = 32;
  req.segment_points = 512;
  req.threads = 1;
  const auto row = certify_toral(req).rows.at(0);
  EXPECT_TRUE(row.budget_valid);
  EXPECT_GT(row.error_term, 0.0);
  EXPECT_TRUE(std::isfinite(row.average));
  EXPECT_EQ(row.verdict == Verdict::positive, row.net() > kRoundoffFloor);
}

TEST(IterateLowerBound, Arithmetic) {
  EnergyCertificate row;
  row.average = 0.3;
  row.verdict = Verdict::positive;
  for (std::int64_t N : {1, 10, 1000}) EXPECT_NEAR(iterate_lower_bound(row, 6, N), 0.05, 1e-15);
  row.verdict = Verdict::inconclusive;
  try {
    iterate_lower_bound(row, 6, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_positive);
  }
}

TEST(IterateLowerBound, ReportMinimum) {
  CertificateReport report;
  report.N0 = 2;
  for (double a : {0.4, 0.2, 0.8}) {
    EnergyCertificate row;
    row.average = a;
    row.verdict = Verdict::positive;
    report.rows.push_back(row);
  }
  EXPECT_NEAR(iterate_lower_bound(report, 5), 0.1, 1e-15);
}

/*
 * estimator.hpp - direct and Monte-Carlo estimates of Lyapunov exponents.
 *
 * direct_lyapunov: L_N(E; x) = (1/N) log‖M_N(E; x)‖ averaged over random x.
 *   ‖M_N‖ is taken as the larger of ‖M_N e₁‖, ‖M_N e₂‖, which is within a
 *   factor √2 of the norm and never overflows.
 * furstenberg_baseline: the i.i.d. analogue, x_j uniform and independent.
 * deviation_profile: fraction of x with |L_N(E; x) − mean| > δ along a ladder of N.
 *
 * All estimators draw sample i from Rng::stream(seed, i), so results do not
 * depend on the thread count.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "lyapcert/cocycle.hpp"
#include "lyapcert/dynamics.hpp"
#include "lyapcert/parallel.hpp"
#include "lyapcert/random.hpp"

namespace lyapcert {

struct LyapunovEstimate {
  double energy = 0.0;
  double mean = 0.0;    // per-site exponent averaged over x-samples
  double stddev = 0.0;  // sample standard deviation across x-samples
  std::int64_t N = 0;
  std::size_t samples = 0;
  std::vector<double> values;  // L_N(E; x_i)

  double standard_error() const {
    return samples > 0 ? stddev / std::sqrt(static_cast<double>(samples)) : 0.0;
  }
};

namespace detail {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  double s = 0.0;
  for (double x : v) s += x;
  out.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

/// Feeds fn(f(T^n x)) for n = 0 … N−1 along the orbit of a random x.
/// Doubling-type maps use the exact digit orbit.
template <typename Fn>
void random_orbit(const CocycleSpec& spec, Rng& rng, std::int64_t N, Fn&& fn) {
  if (spec.dynamics.is_doubling()) {
    DigitOrbit orbit(spec.dynamics.doubling_map().K, rng);
    for (std::int64_t n = 0; n < N; ++n) {
      fn(n, spec.potential.shape({orbit.point(), 0.0}));
      orbit.advance();
    }
    return;
  }
  TorusPoint p{rng.uniform(), rng.uniform()};
  for (std::int64_t n = 0; n < N; ++n) {
    fn(n, spec.potential.shape(p));
    p = spec.dynamics.step(p);
  }
}

/// Tracks log‖M e₁‖ and log‖M e₂‖.
struct NormPair {
  LogNormAccumulator first{{1.0, 0.0}, 0.0};
  LogNormAccumulator second{{0.0, 1.0}, 0.0};

  void apply(const Mat2& m) {
    first = apply_renormalized(first, m);
    second = apply_renormalized(second, m);
  }
  double log_norm() const { return std::max(first.log_norm, second.log_norm); }
};

}  // namespace detail

/// Mean of (1/N) log‖M_N(x)‖ over `samples` random x.
inline LyapunovEstimate direct_lyapunov(const CocycleSpec& spec, std::int64_t N, std::size_t samples,
                                        std::uint64_t seed, std::optional<FPFrame> frame = std::nullopt,
                                        unsigned threads = 0) {
  spec.validate();
  if (N < 1) throw Error(ErrorCode::config_invalid, "orbit length N must be >= 1");
  if (samples == 0) throw Error(ErrorCode::config_invalid, "need at least one x-sample");
  const StepBuilder step = step_builder(spec, frame);
  LyapunovEstimate est;
  est.energy = spec.energy;
  est.N = N;
  est.samples = samples;
  est.values.resize(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    detail::NormPair acc;
    detail::random_orbit(spec, rng, N, [&](std::int64_t, double f) { acc.apply(step(f)); });
    est.values[i] = acc.log_norm() / static_cast<double>(N);
  });
  const auto ms = detail::mean_std(est.values);
  est.mean = ms.mean;
  est.stddev = ms.stddev;
  return est;
}

struct BaselineEstimate {
  double energy = 0.0;
  int N0 = 1;
  std::size_t samples = 0;
  double min_per_site = 0.0;      // min over the θ-grid of the sample mean, / N₀
  double min_stderr = 0.0;        // Monte-Carlo standard error at the minimizing θ, / N₀
  double argmin_theta = 0.0;
  double typical_per_site = 0.0;  // sample mean averaged over the θ-grid, / N₀
};

/// Monte-Carlo estimate of min_{|w|=1} ∫ log‖∏_j S(x_j) w‖ dx₀⋯dx_{N₀−1} with
/// i.i.d. uniform x_j on 𝕋 (or 𝕋² for a two-dimensional potential).
inline BaselineEstimate furstenberg_baseline(const PotentialDescriptor& potential, double E, int N0,
                                             std::size_t mc_samples, std::uint64_t seed,
                                             std::size_t theta_grid = 256,
                                             std::optional<FPFrame> frame = std::nullopt) {
  if (N0 < 1) throw Error(ErrorCode::config_invalid, "N0 must be >= 1");
  if (mc_samples == 0 || theta_grid == 0) throw Error(ErrorCode::config_invalid, "need samples and a theta grid");
  const StepBuilder step{E, potential.coupling, frame};
  const bool planar = !potential.is_one_dimensional();
  std::vector<double> sum(theta_grid, 0.0);
  std::vector<double> sum_sq(theta_grid, 0.0);
  std::vector<double> c2(theta_grid), s2(theta_grid);
  for (std::size_t k = 0; k < theta_grid; ++k) {
    const double th = std::numbers::pi * static_cast<double>(k) / static_cast<double>(theta_grid);
    c2[k] = std::cos(2.0 * th);
    s2[k] = std::sin(2.0 * th);
  }
  for (std::size_t s = 0; s < mc_samples; ++s) {
    Rng rng = Rng::stream(seed, s);
    Mat2 P = Mat2::identity();
    double log_scale = 0.0;
    for (int j = 0; j < N0; ++j) {
      const TorusPoint x{rng.uniform(), planar ? rng.uniform() : 0.0};
      P = step(potential.shape(x)) * P;
      const double m = max_abs_entry(P);
      if (m > 1e100 || m < 1e-100) {
        P = (1.0 / m) * P;
        log_scale += std::log(m);
      }
    }
    const double g11 = P.a * P.a + P.c * P.c;
    const double g22 = P.b * P.b + P.d * P.d;
    const double g12 = P.a * P.b + P.c * P.d;
    for (std::size_t k = 0; k < theta_grid; ++k) {
      const double q = 0.5 * (g11 + g22) + 0.5 * (g11 - g22) * c2[k] + g12 * s2[k];
      const double v = log_scale + 0.5 * std::log(q);
      sum[k] += v;
      sum_sq[k] += v * v;
    }
  }
  BaselineEstimate out;
  out.energy = E;
  out.N0 = N0;
  out.samples = mc_samples;
  const double n = static_cast<double>(mc_samples);
  std::size_t best = 0;
  double typical = 0.0;
  for (std::size_t k = 0; k < theta_grid; ++k) {
    typical += sum[k] / n;
    if (sum[k] < sum[best]) best = k;
  }
  out.typical_per_site = typical / static_cast<double>(theta_grid) / N0;
  out.min_per_site = sum[best] / n / N0;
  out.argmin_theta = std::numbers::pi * static_cast<double>(best) / static_cast<double>(theta_grid);
  if (mc_samples > 1) {
    const double mean = sum[best] / n;
    const double var = std::max(0.0, (sum_sq[best] - n * mean * mean) / (n - 1.0));
    out.min_stderr = std::sqrt(var / n) / N0;
  }
  return out;
}

struct DeviationProfile {
  double energy = 0.0;
  double delta = 0.0;
  std::vector<std::int64_t> ladder;
  std::vector<double> means;      // sample mean of L_N at each rung
  std::vector<double> fractions;  // share of samples with |L_N − mean| > δ
  std::size_t samples = 0;
  std::optional<double> decay_rate;  // −slope of log(fraction) vs N over nonzero rungs
};

/// Least-squares decay rate of the nonzero fractions; needs two such rungs.
inline std::optional<double> fit_decay_rate(const std::vector<std::int64_t>& ladder,
                                            const std::vector<double>& fractions) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (fractions[i] > 0.0) {
      xs.push_back(static_cast<double>(ladder[i]));
      ys.push_back(std::log(fractions[i]));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const auto mx = detail::mean_std(xs).mean;
  const auto my = detail::mean_std(ys).mean;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return -sxy / sxx;
}

inline DeviationProfile deviation_profile(const CocycleSpec& spec, double delta,
                                          const std::vector<std::int64_t>& ladder, std::size_t samples,
                                          std::uint64_t seed, std::optional<FPFrame> frame = std::nullopt,
                                          unsigned threads = 0) {
  spec.validate();
  if (ladder.empty() || ladder.front() < 1) throw Error(ErrorCode::config_invalid, "ladder must be nonempty, N >= 1");
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (ladder[i] <= ladder[i - 1]) throw Error(ErrorCode::config_invalid, "ladder must be increasing");
  }
  if (samples == 0) throw Error(ErrorCode::config_invalid, "need at least one x-sample");
  if (!(delta > 0.0)) throw Error(ErrorCode::config_invalid, "delta must be > 0");

  const StepBuilder step = step_builder(spec, frame);
  const std::size_t rungs = ladder.size();
  std::vector<double> values(samples * rungs);
  parallel_for(samples, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    detail::NormPair acc;
    std::size_t rung = 0;
    detail::random_orbit(spec, rng, ladder.back(), [&](std::int64_t n, double f) {
      acc.apply(step(f));
      if (n + 1 == ladder[rung]) {
        values[i * rungs + rung] = acc.log_norm() / static_cast<double>(ladder[rung]);
        ++rung;
      }
    });
  });

  DeviationProfile out;
  out.energy = spec.energy;
  out.delta = delta;
  out.ladder = ladder;
  out.samples = samples;
  for (std::size_t r = 0; r < rungs; ++r) {
    double mean = 0.0;
    for (std::size_t i = 0; i < samples; ++i) mean += values[i * rungs + r];
    mean /= static_cast<double>(samples);
    std::size_t outside = 0;
    for (std::size_t i = 0; i < samples; ++i) {
      if (std::fabs(values[i * rungs + r] - mean) > delta) ++outside;
    }
    out.means.push_back(mean);
    out.fractions.push_back(static_cast<double>(outside) / static_cast<double>(samples));
  }
  out.decay_rate = fit_decay_rate(ladder, out.fractions);
  return out;
}

}  // namespace lyapcert

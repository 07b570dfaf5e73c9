/*
 * perturbation.hpp - stability of SL(2,R) products under factor perturbations.
 *
 * For A_j, B_j ∈ SL₂(ℝ) with ‖A_j‖, ‖A_j⁻¹‖ < C₁ and ‖A_j − B_j‖ < ε_j < 1,
 * and a unit vector v:
 *
 *   ‖A₁⋯A_N v − B₁⋯B_N v‖ < [Σ_j ε_j (1+C₁)^{2j−1}] ‖A₁⋯A_N v‖,
 *
 * and, provided the smallness condition C₁² Σ_j ε_j (1+C₁)^{2j−1} < 1/5,
 *
 *   |log‖A₁⋯A_N v‖ − log‖B₁⋯B_N v‖| < 6C₁² Σ_j j ε_j (1+C₁)^{2j−1}.
 *
 * Index j = 1 is the factor applied last (leftmost).
 */
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lyapcert/cocycle.hpp"
#include "lyapcert/error.hpp"

namespace lyapcert {

struct PerturbationBudget {
  double C1 = 1.0;
  std::vector<double> eps;  // eps[j-1] = ε_j

  std::size_t size() const { return eps.size(); }
};

namespace detail {

inline void check_budget(const PerturbationBudget& b) {
  if (!(b.C1 >= 1.0) || !std::isfinite(b.C1)) {
    throw Error(ErrorCode::hypothesis_violated, "C1 must be finite and >= 1 (SL2 norms are >= 1)");
  }
  for (double e : b.eps) {
    if (!(e >= 0.0 && e < 1.0)) throw Error(ErrorCode::hypothesis_violated, "each eps_j must lie in [0, 1)");
  }
}

/// Σ_j j^power ε_j (1+C₁)^{2j−1}, skipping zero ε_j so 0·∞ never occurs.
inline double weighted_sum(const PerturbationBudget& b, int power) {
  double s = 0.0;
  const double base = 1.0 + b.C1;
  for (std::size_t i = 0; i < b.eps.size(); ++i) {
    if (b.eps[i] == 0.0) continue;
    const double j = static_cast<double>(i + 1);
    s += (power == 1 ? j : 1.0) * b.eps[i] * std::pow(base, 2.0 * j - 1.0);
  }
  return s;
}

}  // namespace detail

/// Σ_j ε_j (1+C₁)^{2j−1}: the relative bound on the product difference.
inline double product_difference_bound(const PerturbationBudget& b) {
  detail::check_budget(b);
  return detail::weighted_sum(b, 0);
}

/// C₁² Σ_j ε_j (1+C₁)^{2j−1}, the left side of the smallness condition.
inline double smallness_sum(const PerturbationBudget& b) {
  detail::check_budget(b);
  return b.C1 * b.C1 * detail::weighted_sum(b, 0);
}

inline constexpr double kSmallnessThreshold = 0.2;

inline bool check_smallness_condition(const PerturbationBudget& b) { return smallness_sum(b) < kSmallnessThreshold; }

/// 6C₁² Σ_j j ε_j (1+C₁)^{2j−1}; only valid under the smallness condition.
inline double log_product_difference_bound(const PerturbationBudget& b) {
  if (!check_smallness_condition(b)) {
    throw Error(ErrorCode::smallness_violated, "C1^2 sum eps_j (1+C1)^(2j-1) >= 1/5");
  }
  return 6.0 * b.C1 * b.C1 * detail::weighted_sum(b, 1);
}

// ---------------------------------------------------------------------------
// Toral automorphisms: the error term of the segment-averaged scheme.

struct ToralErrorBudget {
  int N0 = 1;
  double C2 = 0.0;       // |λ|‖f‖∞ + |E| + 2
  double C1 = 0.0;       // C₂^{N₀}
  double K = 0.0;        // expanding eigenvalue λ₊
  double f_prime = 0.0;  // |λ|‖∇f‖∞
  std::vector<double> eps;  // ε_j for j = 2, 3, … (ε₁ = 0: the first block is the averaged one)
  double ratio = 0.0;       // (1+C₁)² K^{−N₀}, geometric ratio of the series terms
  double mixing_required = 0.0;  // 10³ C₁⁶ (1+C₁)⁶ (1+‖f′‖∞)²
  bool mixing_ok = false;        // K > mixing_required
  double smallness = 0.0;        // C₁² Σ_{j≥2} ε_j (1+C₁)^{2j−1}
  bool smallness_ok = false;
  double error = 0.0;         // 20 C₁³ (1+C₁)³ ‖f′‖∞ K^{−½}
  double series_error = 0.0;  // 6C₁² Σ_{j≥2} j ε_j (1+C₁)^{2j−1}, closed form
  double norm_ratio = 0.0;    // ‖A‖ / λ₊

  bool valid() const { return mixing_ok && smallness_ok; }

  /// The amount the certificate subtracts.
  double charged_error() const { return std::fmax(error, series_error); }
};

inline ToralErrorBudget toral_error_budget(const CocycleSpec& spec, int N0) {
  if (!spec.dynamics.is_toral()) throw Error(ErrorCode::config_invalid, "toral error budget needs a toral map");
  if (N0 < 1) throw Error(ErrorCode::config_invalid, "N0 must be >= 1");
  const auto& A = spec.dynamics.toral_map();
  const ExpandingEigenpair pair = expanding_eigenpair(A);
  ToralErrorBudget t;
  t.N0 = N0;
  t.C2 = std::fabs(spec.potential.coupling) * spec.potential.sup_bound() + std::fabs(spec.energy) + 2.0;
  t.C1 = std::pow(t.C2, N0);
  t.K = pair.lambda_plus;
  t.f_prime = std::fabs(spec.potential.coupling) * spec.potential.derivative_bound();
  t.norm_ratio = operator_norm(A.as_real()) / t.K;

  const double c = t.C1;
  const double cube = c * c * c * std::pow(1.0 + c, 3.0);
  t.mixing_required = 1e3 * std::pow(c, 6.0) * std::pow(1.0 + c, 6.0) * std::pow(1.0 + t.f_prime, 2.0);
  t.mixing_ok = t.K > t.mixing_required;
  t.error = 20.0 * cube * t.f_prime / std::sqrt(t.K);
  t.ratio = (1.0 + c) * (1.0 + c) * std::pow(t.K, -static_cast<double>(N0));

  // ε_j = 2C₁‖f′‖∞ K^{−(j−2)N₀−½}, listed until negligible.
  const double eps2 = 2.0 * c * t.f_prime / std::sqrt(t.K);
  for (int j = 2; j < 66; ++j) {
    const double e = eps2 * std::pow(t.K, -static_cast<double>((j - 2) * N0));
    t.eps.push_back(e);
    if (e < 1e-300 || e == 0.0) break;
  }
  if (t.f_prime == 0.0) {
    t.smallness = 0.0;
    t.series_error = 0.0;
  } else if (t.ratio >= 1.0) {
    t.smallness = std::numeric_limits<double>::infinity();
    t.series_error = std::numeric_limits<double>::infinity();
  } else {
    const double r = t.ratio;
    t.smallness = 2.0 * cube * t.f_prime / std::sqrt(t.K) / (1.0 - r);
    t.series_error = 12.0 * cube * t.f_prime / std::sqrt(t.K) * (2.0 - r) / ((1.0 - r) * (1.0 - r));
  }
  t.smallness_ok = t.smallness < kSmallnessThreshold && eps2 < 1.0;
  return t;
}

// ---------------------------------------------------------------------------
// Lipschitz slack for grid minimization.

struct LipschitzBound {
  double step_bound = 1.0;  // c: ‖step‖, ‖step⁻¹‖ ≤ c
  double L_x = 0.0;         // in the base point, per unit displacement
  double L_theta = 0.0;     // in the angle of w
  double smallness = 0.0;   // smallness sum at the largest displacement h
};

/// Lipschitz constants of x ↦ log‖M_{N₀}(x) w‖ for displacements up to h, when
/// the i-th factor's base point moves by at most growth^{i−1}·|h|. Built from
/// the log-product bound with ε_i = sens·‖∇f‖·growth^{i−1}·h; the angle
/// constant is ‖M‖·‖M⁻¹‖ ≤ c^{2N₀}.
inline LipschitzBound orbit_lipschitz(const StepBuilder& step, double sup_f, double grad_f, double growth, int N0,
                                      double h) {
  if (N0 < 1 || !(h > 0.0)) throw Error(ErrorCode::config_invalid, "Lipschitz bound needs N0 >= 1 and h > 0");
  LipschitzBound out;
  out.step_bound = step.norm_bound(sup_f);
  out.L_theta = std::pow(out.step_bound, 2.0 * N0);
  PerturbationBudget budget{out.step_bound, {}};
  const double per_unit = step.sensitivity() * grad_f;
  double g = 1.0;
  for (int i = 0; i < N0; ++i) {
    budget.eps.push_back(per_unit * g * h);
    g *= growth;
  }
  for (double e : budget.eps) {
    if (!(e < 1.0)) throw Error(ErrorCode::smallness_violated, "grid spacing too coarse: eps_j >= 1");
  }
  out.smallness = smallness_sum(budget);
  out.L_x = log_product_difference_bound(budget) / h;
  return out;
}

/// x-direction and w-angle Lipschitz constants of the integrand of the doubling
/// certificate, valid for |h′| ≤ h.
inline LipschitzBound lipschitz_constant_doubling(const CocycleSpec& spec, int N0, std::optional<FPFrame> frame,
                                                  double h) {
  if (!spec.dynamics.is_doubling()) throw Error(ErrorCode::config_invalid, "doubling Lipschitz bound needs x -> Kx");
  return orbit_lipschitz(step_builder(spec, frame), spec.potential.sup_bound(), spec.potential.derivative_bound(),
                         static_cast<double>(spec.dynamics.doubling_map().K), N0, h);
}

/// Same for the toral scheme; factor i moves by at most ‖A‖^{i−1}|h|.
inline LipschitzBound lipschitz_constant_toral(const CocycleSpec& spec, int N0, std::optional<FPFrame> frame,
                                               double h) {
  if (!spec.dynamics.is_toral()) throw Error(ErrorCode::config_invalid, "toral Lipschitz bound needs a toral map");
  return orbit_lipschitz(step_builder(spec, frame), spec.potential.sup_bound(), spec.potential.derivative_bound(),
                         operator_norm(spec.dynamics.toral_map().as_real()), N0, h);
}

}  // namespace lyapcert

/*
 * dynamics.hpp - base dynamics for the cocycles.
 *
 *   doubling-type:  T x = K x mod 1 on 𝕋, K ≥ 2 an integer;
 *   toral:          T x = A x mod 1 on 𝕋², A ∈ SL₂(ℤ) hyperbolic.
 *
 * Also the averaging families used by the certificate (the K^{N₀}-point grid
 * whose offsets are killed by T^{N₀}, and the segment along the expanding
 * eigenvector), and the two equidistribution diagnostics: the exponential sum
 * over the grid map α ↦ (x + α/K^{N₀}, Kx + α/K^{N₀−1}, …) and the Fourier
 * transform of the image of t ↦ (K^{1/2} t v, K^{3/2} t v, …).
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lyapcert/error.hpp"
#include "lyapcert/random.hpp"
#include "lyapcert/torus.hpp"

namespace lyapcert {

struct DoublingMap {
  std::int64_t K = 2;
};

/// Integer matrix [[a, b], [c, d]] acting on 𝕋².
struct ToralMap {
  std::int64_t a = 2, b = 1, c = 1, d = 1;

  std::int64_t trace() const { return a + d; }
  std::int64_t det() const { return a * d - b * c; }
  Mat2 as_real() const {
    return {static_cast<double>(a), static_cast<double>(b), static_cast<double>(c),
            static_cast<double>(d)};
  }
};

/// A^k in integer arithmetic (k ≥ 0).
inline ToralMap power(const ToralMap& A, int k) {
  ToralMap r{1, 0, 0, 1};
  for (int i = 0; i < k; ++i) {
    r = {r.a * A.a + r.b * A.c, r.a * A.b + r.b * A.d, r.c * A.a + r.d * A.c, r.c * A.b + r.d * A.d};
  }
  return r;
}

class DynamicsDescriptor {
 public:
  static DynamicsDescriptor doubling(std::int64_t K) {
    if (K < 2) throw Error(ErrorCode::config_invalid, "doubling-type map needs integer K >= 2");
    return DynamicsDescriptor(DoublingMap{K});
  }

  static DynamicsDescriptor toral(ToralMap A) {
    if (A.det() != 1) throw Error(ErrorCode::config_invalid, "toral map must have det A = 1");
    if (std::llabs(A.trace()) <= 2) throw Error(ErrorCode::not_hyperbolic, "toral map needs |trace A| > 2");
    return DynamicsDescriptor(A);
  }

  bool is_doubling() const { return std::holds_alternative<DoublingMap>(map_); }
  bool is_toral() const { return std::holds_alternative<ToralMap>(map_); }
  const DoublingMap& doubling_map() const { return std::get<DoublingMap>(map_); }
  const ToralMap& toral_map() const { return std::get<ToralMap>(map_); }
  int dimension() const { return is_doubling() ? 1 : 2; }

  /// One application of T, reduced mod 1.
  TorusPoint step(TorusPoint p) const {
    if (const auto* m = std::get_if<DoublingMap>(&map_)) {
      return {wrap01(static_cast<double>(m->K) * p.x), 0.0};
    }
    const auto& A = std::get<ToralMap>(map_);
    // Reduce the integer coefficients first so a·x stays small.
    const auto frac_mul = [](std::int64_t k, double t) { return wrap01(static_cast<double>(k) * t); };
    return wrap01(TorusPoint{frac_mul(A.a, p.x) + frac_mul(A.b, p.y), frac_mul(A.c, p.x) + frac_mul(A.d, p.y)});
  }

  std::string describe() const {
    if (const auto* m = std::get_if<DoublingMap>(&map_)) return "x -> " + std::to_string(m->K) + "x mod 1";
    const auto& A = std::get<ToralMap>(map_);
    return "x -> [[" + std::to_string(A.a) + "," + std::to_string(A.b) + "],[" + std::to_string(A.c) + "," +
           std::to_string(A.d) + "]] x mod 1";
  }

 private:
  explicit DynamicsDescriptor(std::variant<DoublingMap, ToralMap> m) : map_(m) {}

  std::variant<DoublingMap, ToralMap> map_;
};

/// Tⁿx mod 1 with per-step reduction.
inline TorusPoint orbit(const DynamicsDescriptor& dyn, TorusPoint x, std::int64_t n) {
  TorusPoint p = wrap01(x);
  for (std::int64_t i = 0; i < n; ++i) p = dyn.step(p);
  return p;
}

/// K^n, or nullopt when it exceeds `limit`.
inline std::optional<std::uint64_t> checked_power(std::uint64_t K, int n, std::uint64_t limit) {
  std::uint64_t r = 1;
  for (int i = 0; i < n; ++i) {
    if (r > limit / K) return std::nullopt;
    r *= K;
  }
  return r;
}

inline constexpr std::uint64_t kDefaultAtomBudget = std::uint64_t{1} << 24;

/// The averaging set with its uniform weights.
///
/// grid:    atoms α/K^{N₀}, α = 0 … K^{N₀}−1 (kept as integer numerators);
/// segment: points scale · t_i · v, t_i = (i + ½)/M (midpoint rule on [0, 1]).
struct OffsetFamily {
  enum class Kind { grid, segment };

  Kind kind = Kind::grid;
  std::uint64_t K = 2;
  int N0 = 1;
  std::uint64_t denominator = 1;  // K^{N₀} (grid)
  Vec2 direction{};               // v₊ (segment)
  double scale = 0.0;             // K^{−(N−1)N₀+½} (segment)
  std::size_t count = 0;

  double weight() const { return 1.0 / static_cast<double>(count); }

  /// Segment parameter t_i.
  double parameter(std::size_t i) const { return (static_cast<double>(i) + 0.5) / static_cast<double>(count); }

  TorusPoint atom(std::size_t i) const {
    if (kind == Kind::grid) return {static_cast<double>(i) / static_cast<double>(denominator), 0.0};
    const double s = scale * parameter(i);
    return wrap01(TorusPoint{s * direction.x, s * direction.y});
  }
};

inline OffsetFamily offset_family_doubling(std::int64_t K, int N0,
                                           std::uint64_t atom_budget = kDefaultAtomBudget) {
  if (K < 2 || N0 < 1) throw Error(ErrorCode::config_invalid, "offset grid needs K >= 2 and N0 >= 1");
  const auto q = checked_power(static_cast<std::uint64_t>(K), N0, atom_budget);
  if (!q) {
    throw Error(ErrorCode::budget_exceeded, "K^N0 exceeds the atom budget of " + std::to_string(atom_budget));
  }
  OffsetFamily fam;
  fam.kind = OffsetFamily::Kind::grid;
  fam.K = static_cast<std::uint64_t>(K);
  fam.N0 = N0;
  fam.denominator = *q;
  fam.count = static_cast<std::size_t>(*q);
  return fam;
}

/// Position of the j-th orbit point of x + α/K^{N₀} under x ↦ Kx, with the
/// offset part K^j α / K^{N₀} mod 1 evaluated in integer arithmetic.
inline double shifted_doubling_orbit(const OffsetFamily& grid, double frac_Kj_x, std::uint64_t alpha,
                                     std::uint64_t Kj_mod) {
  const std::uint64_t num = static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(alpha) * Kj_mod) % grid.denominator);
  return wrap01(frac_Kj_x + static_cast<double>(num) / static_cast<double>(grid.denominator));
}

// ---------------------------------------------------------------------------
// Exact base-K digit orbits.

/// Orbit of a uniformly random x under x ↦ Kx, tracked as its next P base-K
/// digits in a 64-bit integer (K^P ≤ 2⁶²). Shifting drops the leading digit
/// and appends a fresh random one, which is exactly T on the digit expansion.
class DigitOrbit {
 public:
  DigitOrbit(std::int64_t K, Rng& rng) : K_(static_cast<std::uint64_t>(K)), rng_(&rng) {
    const std::uint64_t limit = std::uint64_t{1} << 62;
    top_ = 1;
    while (top_ <= limit / K_ / K_) top_ *= K_;  // top_ = K^{P−1}
    modulus_ = top_ * K_;
    for (std::uint64_t p = 1; p < modulus_; p *= K_) state_ = state_ * K_ + rng_->below(K_);
  }

  double point() const { return static_cast<double>(state_) / static_cast<double>(modulus_); }

  void advance() { state_ = (state_ % top_) * K_ + rng_->below(K_); }

 private:
  std::uint64_t K_;
  Rng* rng_;
  std::uint64_t top_ = 1;
  std::uint64_t modulus_ = 1;
  std::uint64_t state_ = 0;
};

// ---------------------------------------------------------------------------
// Equidistribution of the grid map.

/// K^{−N₀}|Σ_α e(ξ·φ_x(α))| for φ_x(α)_j = K^j x + α/K^{N₀−j}. Vanishes for
/// every ξ ≠ 0 with |ξ_j| < K.
inline double equidistribution_defect_doubling(std::int64_t K, int N0, std::span<const int> xi,
                                               double x = 0.0,
                                               std::uint64_t atom_budget = kDefaultAtomBudget) {
  if (static_cast<int>(xi.size()) != N0) {
    throw Error(ErrorCode::frequency_out_of_range, "frequency vector must have N0 components");
  }
  bool nonzero = false;
  for (int c : xi) {
    if (std::abs(c) >= K) throw Error(ErrorCode::frequency_out_of_range, "|xi_j| must be < K");
    nonzero = nonzero || c != 0;
  }
  if (!nonzero) throw Error(ErrorCode::frequency_out_of_range, "xi = 0 is excluded");

  const OffsetFamily grid = offset_family_doubling(K, N0, atom_budget);
  std::vector<double> frac_x(N0);
  std::vector<std::uint64_t> kj(N0);
  double xj = wrap01(x);
  std::uint64_t p = 1;
  for (int j = 0; j < N0; ++j) {
    frac_x[j] = xj;
    kj[j] = p % grid.denominator;
    xj = wrap01(static_cast<double>(K) * xj);
    p *= static_cast<std::uint64_t>(K);
  }
  std::complex<double> sum{0.0, 0.0};
  for (std::uint64_t alpha = 0; alpha < grid.denominator; ++alpha) {
    double phase = 0.0;
    for (int j = 0; j < N0; ++j) {
      if (xi[j] != 0) phase += xi[j] * shifted_doubling_orbit(grid, frac_x[j], alpha, kj[j]);
    }
    phase = wrap01(phase);
    sum += std::polar(1.0, 2.0 * std::numbers::pi * phase);
  }
  return std::abs(sum) / static_cast<double>(grid.denominator);
}

// ---------------------------------------------------------------------------
// Toral automorphisms.

struct ExpandingEigenpair {
  double eigenvalue = 0.0;    // signed expanding eigenvalue μ, |μ| > 1
  double lambda_plus = 0.0;   // |μ|
  Vec2 v_plus{};              // unit, A v₊ = μ v₊

  double contracting() const { return 1.0 / eigenvalue; }
};

inline ExpandingEigenpair expanding_eigenpair(const ToralMap& A) {
  const auto t = static_cast<double>(A.trace());
  if (std::fabs(t) <= 2.0) throw Error(ErrorCode::not_hyperbolic, "|trace A| <= 2");
  if (A.det() != 1) throw Error(ErrorCode::not_hyperbolic, "det A != 1");
  const double root = std::sqrt(t * t - 4.0);
  const double mu = t > 0 ? 0.5 * (t + root) : 0.5 * (t - root);
  const Vec2 cand1{static_cast<double>(A.b), mu - static_cast<double>(A.a)};
  const Vec2 cand2{mu - static_cast<double>(A.d), static_cast<double>(A.c)};
  Vec2 v = normalized(norm(cand1) >= norm(cand2) ? cand1 : cand2);
  if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = -1.0 * v;
  return {mu, std::fabs(mu), v};
}

/// B₁ = 1 / min{|⟨v, ξ⟩| : ξ ∈ ℤ² ∖ {0}, |ξ|∞ < B}.
inline double diophantine_constant(Vec2 v, int B) {
  if (B < 1) throw Error(ErrorCode::config_invalid, "B must be >= 1");
  double best = INFINITY;
  for (int i = -(B - 1); i <= B - 1; ++i) {
    for (int j = -(B - 1); j <= B - 1; ++j) {
      if (i == 0 && j == 0) continue;
      best = std::min(best, std::fabs(v.x * i + v.y * j));
    }
  }
  if (best == INFINITY) throw Error(ErrorCode::degenerate, "no admissible frequencies for B = 1");
  if (best < 1e-14) throw Error(ErrorCode::degenerate, "direction is rationally resonant below the cutoff");
  return 1.0 / best;
}

/// Certified bound 4B₁/√K on |η̂(ξ)| for every nonzero ξ ∈ (ℤ²)^{N₀}, |ξ_j|∞ < B.
inline double toral_measure_fourier_bound(double K, int B, double B1) {
  if (!(K > 2.0 * B * B1)) {
    throw Error(ErrorCode::hypothesis_violated, "expanding eigenvalue must exceed 2*B*B1");
  }
  return 4.0 * B1 / std::sqrt(K);
}

/// Frequency s(ξ) = Σ_j μ^j ⟨v, ξ_j⟩; the image measure of t ↦ (μ^{j}K^{½} t v)_j
/// has Fourier coefficient ∫₀¹ e(K^{½} s t) dt.
inline double toral_frequency(const ExpandingEigenpair& pair, std::span<const std::array<int, 2>> xi) {
  double s = 0.0;
  double mu_j = 1.0;
  for (const auto& x : xi) {
    s += mu_j * (pair.v_plus.x * x[0] + pair.v_plus.y * x[1]);
    mu_j *= pair.eigenvalue;
  }
  return s;
}

/// |∫₀¹ e(a t) dt| by the composite midpoint rule on n cells.
inline double oscillatory_integral_modulus(double a, std::size_t n) {
  std::complex<double> sum{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    sum += std::polar(1.0, 2.0 * std::numbers::pi * wrap01(a * t));
  }
  return std::abs(sum) / static_cast<double>(n);
}

struct FourierCheck {
  std::size_t frequencies = 0;  // nonzero frequencies examined
  double max_modulus = 0.0;     // largest empirical |η̂|
  double certified_bound = 0.0; // 4B₁/√K
  std::size_t pointwise_violations = 0;  // |η̂| > 4/(1+√K|s|) + tol
  std::size_t bound_violations = 0;      // |η̂| > 4B₁/√K + tol
  std::size_t skipped = 0;  // frequencies too oscillatory for `max_cells`
};

/// Empirical check of the segment measure's Fourier decay. Enumerates all
/// ξ ∈ (ℤ²)^{N₀} with |ξ_j|∞ < B when there are at most `max_frequencies`,
/// otherwise samples that many uniformly with `seed`. Each integral uses at
/// least `min_points` midpoint cells and at least 64 per oscillation.
inline FourierCheck toral_fourier_check(const ExpandingEigenpair& pair, int N0, int B, double B1,
                                        std::size_t min_points = 10000, double tol = 1e-3,
                                        std::size_t max_frequencies = 4096, std::uint64_t seed = 1,
                                        std::size_t max_cells = std::size_t{1} << 24) {
  FourierCheck out;
  out.certified_bound = toral_measure_fourier_bound(pair.lambda_plus, B, B1);
  const double sqrtK = std::sqrt(pair.lambda_plus);
  const int side = 2 * B - 1;
  const double total = std::pow(static_cast<double>(side), 2.0 * N0);
  const bool exhaustive = total <= static_cast<double>(max_frequencies);
  const std::size_t n_freq = exhaustive ? static_cast<std::size_t>(total) : max_frequencies;
  Rng rng(seed);
  std::vector<std::array<int, 2>> xi(N0);
  for (std::size_t idx = 0; idx < n_freq; ++idx) {
    bool nonzero = false;
    std::size_t code = idx;
    for (auto& comp : xi) {
      for (int& c : comp) {
        if (exhaustive) {
          c = static_cast<int>(code % side) - (B - 1);
          code /= side;
        } else {
          c = static_cast<int>(rng.below(static_cast<std::uint64_t>(side))) - (B - 1);
        }
        nonzero = nonzero || c != 0;
      }
    }
    if (!nonzero) continue;
    const double a = sqrtK * toral_frequency(pair, xi);
    const double wanted = std::max(static_cast<double>(min_points), std::ceil(64.0 * std::fabs(a)));
    if (wanted > static_cast<double>(max_cells)) {
      ++out.skipped;
      continue;
    }
    const auto cells = static_cast<std::size_t>(wanted);
    const double m = oscillatory_integral_modulus(a, cells);
    ++out.frequencies;
    out.max_modulus = std::max(out.max_modulus, m);
    if (m > 4.0 / (1.0 + std::fabs(a)) + tol) ++out.pointwise_violations;
    if (m > out.certified_bound + tol) ++out.bound_violations;
  }
  return out;
}

/// Segment offsets {scale · t · v₊ : t ∈ [0,1]}, scale = K^{−(N−1)N₀+½}, at M midpoints.
inline OffsetFamily offset_family_segment(const ExpandingEigenpair& pair, int N0, int N, std::size_t M = 4096) {
  if (M == 0 || N0 < 1 || N < 1) throw Error(ErrorCode::config_invalid, "segment family needs M, N0, N >= 1");
  OffsetFamily fam;
  fam.kind = OffsetFamily::Kind::segment;
  fam.N0 = N0;
  fam.direction = pair.v_plus;
  fam.scale = std::pow(pair.lambda_plus, -static_cast<double>(N - 1) * N0 + 0.5);
  fam.count = M;
  return fam;
}

}  // namespace lyapcert

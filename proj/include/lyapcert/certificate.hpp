/*
 * certificate.hpp - finite-scale positivity certificate for the exponent.
 *
 * Doubling-type maps (adjoint scheme). With the offsets α/K^{N₀} the quantity
 *
 *   F(x, w) = K^{−N₀} Σ_α log‖M*_{N₀}(x + α/K^{N₀}) w‖
 *
 * satisfies T^{N₀}(x + α/K^{N₀}) = T^{N₀}x, so the block-to-block error term
 * vanishes identically and min_{x,|w|=1} F(x, w) > 0 certifies a positive
 * exponent: each further N₀-block adds at least that minimum.
 *
 * Toral automorphisms (forward scheme). The offsets run along the expanding
 * eigenvector, y = t K^{½} v₊, t ∈ [0,1]; the error term no longer vanishes
 * and is charged from the perturbation budget.
 *
 * Minimization over (x, w) is a grid scan followed by an optional local
 * golden-section refinement. In slack-accounted mode the Lipschitz slack of the
 * grid is subtracted, so the verdict holds for the continuum minimum up to
 * floating-point error.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lyapcert/cocycle.hpp"
#include "lyapcert/dynamics.hpp"
#include "lyapcert/error.hpp"
#include "lyapcert/parallel.hpp"
#include "lyapcert/perturbation.hpp"

namespace lyapcert {

enum class RigorMode { fast, slack_accounted };

/// Net values at or below this are treated as rounding noise (INCONCLUSIVE).
inline constexpr double kRoundoffFloor = 1e-12;
enum class Verdict { positive, inconclusive };

inline const char* to_string(Verdict v) { return v == Verdict::positive ? "POSITIVE" : "INCONCLUSIVE"; }

struct CertificateRequest {
  CocycleSpec spec;  // spec.energy is ignored; `energies` is swept
  int N0 = 6;
  std::vector<double> energies;
  std::size_t x_grid = 1024;
  std::size_t theta_grid = 256;
  RepresentationMode representation = RepresentationMode::fp_auto;
  double delta = kDefaultBandMargin;
  RigorMode rigor = RigorMode::fast;
  bool refine = true;
  double refine_tol = 1e-6;
  std::uint64_t atom_budget = kDefaultAtomBudget;
  std::size_t segment_points = 4096;  // toral: t-discretization
  std::size_t toral_x_grid = 128;     // toral: per-axis x-grid
  unsigned threads = 0;               // 0: default_threads()

  void validate() const {
    spec.validate();
    if (energies.empty()) throw Error(ErrorCode::config_invalid, "energy grid is empty");
    if (N0 < 1) throw Error(ErrorCode::config_invalid, "N0 must be >= 1");
    if (x_grid == 0 || theta_grid == 0 || segment_points == 0 || toral_x_grid == 0) {
      throw Error(ErrorCode::config_invalid, "grid resolutions must be positive");
    }
    if (!(delta > 0.0 && delta < 2.0)) throw Error(ErrorCode::config_invalid, "delta must lie in (0, 2)");
    for (double E : energies) {
      if (!std::isfinite(E)) throw Error(ErrorCode::config_invalid, "energies must be finite");
    }
  }
};

struct EnergyCertificate {
  double energy = 0.0;
  double average = 0.0;     // min over the grid of the offset average of log‖·w‖
  double raw_bound = 0.0;   // same without the 1/|offsets| factor (grid scheme)
  double normalized = 0.0;  // average / N₀, per-site units
  double slack = 0.0;       // grid slack (slack-accounted mode), in average units
  double error_term = 0.0;  // block-perturbation error (0 for doubling-type maps)
  Verdict verdict = Verdict::inconclusive;
  bool fp_frame = false;    // evaluated in the Figotin–Pastur frame
  bool budget_valid = true; // toral: mixing and smallness conditions hold
  TorusPoint argmin_x{};
  Vec2 argmin_w{1.0, 0.0};

  double net() const { return average - slack - error_term; }
};

struct CertificateReport {
  int N0 = 1;
  std::vector<EnergyCertificate> rows;

  bool all_positive() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.verdict == Verdict::positive; });
  }
};

namespace detail {

/// Gram data of a set of 2×2 matrices P_i, stored so that
/// ‖P_i w_θ‖² = mean_i + diff_i cos 2θ + cross_i sin 2θ.
struct GramSet {
  std::vector<double> mean, diff, cross;
  int block = 1;  // terms multiplied together before one log

  void resize(std::size_t n) {
    mean.resize(n);
    diff.resize(n);
    cross.resize(n);
  }

  void set(std::size_t i, const Mat2& P) {
    const double g11 = P.a * P.a + P.c * P.c;
    const double g22 = P.b * P.b + P.d * P.d;
    const double g12 = P.a * P.b + P.c * P.d;
    mean[i] = 0.5 * (g11 + g22);
    diff[i] = 0.5 * (g11 - g22);
    cross[i] = g12;
  }

  /// Average of log‖P_i w_θ‖ over i.
  double average_log(double theta) const {
    const double c2 = std::cos(2.0 * theta);
    const double s2 = std::sin(2.0 * theta);
    const std::size_t n = mean.size();
    double total = 0.0;
    std::size_t i = 0;
    while (i < n) {
      const std::size_t end = std::min(n, i + static_cast<std::size_t>(block));
      double prod = 1.0;
      for (; i < end; ++i) prod *= mean[i] + diff[i] * c2 + cross[i] * s2;
      total += std::log(prod);
    }
    return 0.5 * total / static_cast<double>(n);
  }
};

/// Block size so a product of `block` squared norms stays inside double range.
inline int safe_block(double step_bound, int N0) {
  const double per_term = 2.0 * N0 * std::log(std::max(step_bound, 1.0 + 1e-12));
  const double b = std::floor(600.0 / per_term);
  return static_cast<int>(std::clamp(b, 1.0, 64.0));
}

/// Golden-section minimization of g on [lo, hi].
template <typename G>
std::pair<double, double> golden_min(G&& g, double lo, double hi, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = g(c), fd = g(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = g(d);
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

/// Everything needed to evaluate the doubling-type certificate at one energy.
class DoublingEvaluator {
 public:
  DoublingEvaluator(const CocycleSpec& spec, int N0, std::optional<FPFrame> frame, std::uint64_t atom_budget)
      : spec_(spec), N0_(N0), step_(step_builder(spec, frame)),
        grid_(offset_family_doubling(spec.dynamics.doubling_map().K, N0, atom_budget)) {
    const auto K = static_cast<std::uint64_t>(spec.dynamics.doubling_map().K);
    std::uint64_t p = 1;
    for (int j = 0; j < N0; ++j) {
      kj_mod_.push_back(p % grid_.denominator);
      p = (p % grid_.denominator) * K;
    }
    gram_.resize(grid_.count);
    gram_.block = safe_block(step_.norm_bound(spec.potential.sup_bound()), N0);
    samples_.resize(static_cast<std::size_t>(N0));
  }

  const OffsetFamily& grid() const { return grid_; }

  /// M*_{N₀}(x + α/K^{N₀}) = A₀ᵀ A₁ᵀ ⋯ A_{N₀−1}ᵀ with A_j the step at the j-th orbit point.
  Mat2 adjoint_block(const std::vector<double>& frac_x, std::uint64_t alpha) const {
    Mat2 P = Mat2::identity();
    for (int j = 0; j < N0_; ++j) {
      const double pt = shifted_doubling_orbit(grid_, frac_x[j], alpha, kj_mod_[j]);
      P = P * step_(spec_.potential.shape({pt, 0.0})).transposed();
    }
    return P;
  }

  /// Fills the Gram data for base point x.
  const GramSet& prepare(double x) {
    double xj = wrap01(x);
    for (int j = 0; j < N0_; ++j) {
      samples_[j] = xj;
      xj = wrap01(static_cast<double>(grid_.K) * xj);
    }
    for (std::uint64_t a = 0; a < grid_.count; ++a) gram_.set(a, adjoint_block(samples_, a));
    return gram_;
  }

  double value(double x, double theta) { return prepare(x).average_log(theta); }

 private:
  CocycleSpec spec_;
  int N0_;
  StepBuilder step_;
  OffsetFamily grid_;
  std::vector<std::uint64_t> kj_mod_;
  GramSet gram_;
  std::vector<double> samples_;
};

/// Toral scheme at one energy: offsets t K^{½} v₊ moved along with the orbit.
class ToralEvaluator {
 public:
  ToralEvaluator(const CocycleSpec& spec, int N0, std::optional<FPFrame> frame, std::size_t segment_points)
      : spec_(spec), N0_(N0), step_(step_builder(spec, frame)),
        pair_(expanding_eigenpair(spec.dynamics.toral_map())),
        segment_(offset_family_segment(pair_, N0, 1, segment_points)) {
    double s = segment_.scale;
    for (int j = 0; j < N0; ++j) {
      offset_scale_.push_back(s);
      s *= pair_.eigenvalue;
    }
    gram_.resize(segment_.count);
    gram_.block = safe_block(step_.norm_bound(spec.potential.sup_bound()), N0);
    orbit_.resize(static_cast<std::size_t>(N0));
  }

  /// M_{N₀}(x + t_i K^{½} v₊) = A_{N₀−1} ⋯ A₀.
  Mat2 forward_block(std::size_t i) const {
    const double t = segment_.parameter(i);
    Mat2 P = Mat2::identity();
    for (int j = 0; j < N0_; ++j) {
      const double s = offset_scale_[j] * t;
      const TorusPoint pt = wrap01(TorusPoint{orbit_[j].x + wrap01(s * pair_.v_plus.x),
                                              orbit_[j].y + wrap01(s * pair_.v_plus.y)});
      P = step_(spec_.potential.shape(pt)) * P;
    }
    return P;
  }

  const GramSet& prepare(TorusPoint x) {
    TorusPoint p = wrap01(x);
    for (int j = 0; j < N0_; ++j) {
      orbit_[j] = p;
      p = spec_.dynamics.step(p);
    }
    for (std::size_t i = 0; i < segment_.count; ++i) gram_.set(i, forward_block(i));
    return gram_;
  }

  double value(TorusPoint x, double theta) { return prepare(x).average_log(theta); }

 private:
  CocycleSpec spec_;
  int N0_;
  StepBuilder step_;
  ExpandingEigenpair pair_;
  OffsetFamily segment_;
  std::vector<double> offset_scale_;
  GramSet gram_;
  std::vector<TorusPoint> orbit_;
};

inline double theta_at(std::size_t k, std::size_t n) {
  return std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
}

inline CocycleSpec at_energy(const CocycleSpec& spec, double E) {
  CocycleSpec s = spec;
  s.energy = E;
  return s;
}

}  // namespace detail

/// K^{−N₀} Σ_α log‖M*_{N₀}(x + α/K^{N₀}) w‖ at a single (x, w).
inline double doubling_bound_at(const CocycleSpec& spec, int N0, double x, Vec2 w,
                                std::optional<FPFrame> frame = std::nullopt,
                                std::uint64_t atom_budget = kDefaultAtomBudget) {
  if (!spec.dynamics.is_doubling()) throw Error(ErrorCode::config_invalid, "doubling bound needs x -> Kx");
  detail::DoublingEvaluator eval(spec, N0, frame, atom_budget);
  const Vec2 u = normalized(w);
  return eval.value(x, std::atan2(u.y, u.x));
}

namespace detail {

inline EnergyCertificate certify_doubling_energy(const CertificateRequest& req, double E) {
  const CocycleSpec spec = at_energy(req.spec, E);
  const auto frame = resolve_frame(E, req.representation, req.delta);
  DoublingEvaluator eval(spec, req.N0, frame, req.atom_budget);

  EnergyCertificate row;
  row.energy = E;
  row.fp_frame = frame.has_value();

  double best = std::numeric_limits<double>::infinity();
  double best_x = 0.0;
  double best_theta = 0.0;
  for (std::size_t i = 0; i < req.x_grid; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(req.x_grid);
    const GramSet& g = eval.prepare(x);
    for (std::size_t k = 0; k < req.theta_grid; ++k) {
      const double th = theta_at(k, req.theta_grid);
      const double v = g.average_log(th);
      if (v < best) {
        best = v;
        best_x = x;
        best_theta = th;
      }
    }
  }

  const double hx = 0.5 / static_cast<double>(req.x_grid);
  const double ht = 0.5 * std::numbers::pi / static_cast<double>(req.theta_grid);
  if (req.refine) {
    for (int pass = 0; pass < 4; ++pass) {
      const double before = best;
      auto [xr, vx] = golden_min([&](double x) { return eval.value(x, best_theta); }, best_x - 2 * hx,
                                 best_x + 2 * hx, req.refine_tol);
      if (vx < best) {
        best = vx;
        best_x = wrap01(xr);
      }
      auto [tr, vt] = golden_min([&](double t) { return eval.value(best_x, t); }, best_theta - 2 * ht,
                                 best_theta + 2 * ht, req.refine_tol);
      if (vt < best) {
        best = vt;
        best_theta = tr;
      }
      if (before - best < req.refine_tol) break;
    }
  }

  if (req.rigor == RigorMode::slack_accounted) {
    const LipschitzBound lip = lipschitz_constant_doubling(spec, req.N0, frame, hx);
    row.slack = lip.L_x * hx + lip.L_theta * ht;
  }

  row.average = best;
  row.raw_bound = best * static_cast<double>(eval.grid().count);
  row.normalized = best / req.N0;
  row.error_term = 0.0;
  row.argmin_x = {best_x, 0.0};
  row.argmin_w = unit_at(best_theta);
  row.verdict = row.net() > kRoundoffFloor ? Verdict::positive : Verdict::inconclusive;
  return row;
}

inline EnergyCertificate certify_toral_energy(const CertificateRequest& req, double E) {
  const CocycleSpec spec = at_energy(req.spec, E);
  const auto frame = resolve_frame(E, req.representation, req.delta);
  ToralEvaluator eval(spec, req.N0, frame, req.segment_points);
  const ToralErrorBudget budget = toral_error_budget(spec, req.N0);

  EnergyCertificate row;
  row.energy = E;
  row.fp_frame = frame.has_value();
  row.budget_valid = budget.valid();

  const std::size_t n = req.toral_x_grid;
  double best = std::numeric_limits<double>::infinity();
  TorusPoint best_x{};
  double best_theta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const TorusPoint x{static_cast<double>(i) / n, static_cast<double>(j) / n};
      const GramSet& g = eval.prepare(x);
      for (std::size_t k = 0; k < req.theta_grid; ++k) {
        const double th = theta_at(k, req.theta_grid);
        const double v = g.average_log(th);
        if (v < best) {
          best = v;
          best_x = x;
          best_theta = th;
        }
      }
    }
  }

  const double h = 0.5 / static_cast<double>(n);
  const double ht = 0.5 * std::numbers::pi / static_cast<double>(req.theta_grid);
  if (req.refine) {
    for (int pass = 0; pass < 4; ++pass) {
      const double before = best;
      auto [xr, vx] = golden_min([&](double s) { return eval.value({s, best_x.y}, best_theta); },
                                 best_x.x - 2 * h, best_x.x + 2 * h, req.refine_tol);
      if (vx < best) {
        best = vx;
        best_x.x = wrap01(xr);
      }
      auto [yr, vy] = golden_min([&](double s) { return eval.value({best_x.x, s}, best_theta); },
                                 best_x.y - 2 * h, best_x.y + 2 * h, req.refine_tol);
      if (vy < best) {
        best = vy;
        best_x.y = wrap01(yr);
      }
      auto [tr, vt] = golden_min([&](double t) { return eval.value(best_x, t); }, best_theta - 2 * ht,
                                 best_theta + 2 * ht, req.refine_tol);
      if (vt < best) {
        best = vt;
        best_theta = tr;
      }
      if (before - best < req.refine_tol) break;
    }
  }

  if (req.rigor == RigorMode::slack_accounted) {
    const double h_euclid = h * std::numbers::sqrt2;
    const LipschitzBound lip = lipschitz_constant_toral(spec, req.N0, frame, h_euclid);
    row.slack = lip.L_x * h_euclid + lip.L_theta * ht;
  }

  row.average = best;
  row.raw_bound = best;
  row.normalized = best / req.N0;
  row.error_term = budget.charged_error();
  row.argmin_x = best_x;
  row.argmin_w = unit_at(best_theta);
  row.verdict = (row.budget_valid && row.net() > kRoundoffFloor) ? Verdict::positive : Verdict::inconclusive;
  return row;
}

template <typename PerEnergy>
CertificateReport sweep(const CertificateRequest& req, PerEnergy&& per_energy) {
  CertificateReport report;
  report.N0 = req.N0;
  report.rows.resize(req.energies.size());
  parallel_for(req.energies.size(), req.threads,
               [&](std::size_t i) { report.rows[i] = per_energy(req, req.energies[i]); });
  return report;
}

}  // namespace detail

/// Sweeps the energy grid for x ↦ Kx.
inline CertificateReport certify_doubling(const CertificateRequest& req) {
  req.validate();
  if (!req.spec.dynamics.is_doubling()) throw Error(ErrorCode::config_invalid, "certify_doubling needs x -> Kx");
  // Surface budget problems before spawning workers.
  (void)offset_family_doubling(req.spec.dynamics.doubling_map().K, req.N0, req.atom_budget);
  return detail::sweep(req, detail::certify_doubling_energy);
}

/// Sweeps the energy grid for a toral automorphism. Rows whose error budget
/// fails the mixing or smallness condition are INCONCLUSIVE and flagged.
inline CertificateReport certify_toral(const CertificateRequest& req) {
  req.validate();
  if (!req.spec.dynamics.is_toral()) throw Error(ErrorCode::config_invalid, "certify_toral needs a toral map");
  return detail::sweep(req, detail::certify_toral_energy);
}

/// Per-site lower bound implied for every N: each N₀-block adds at least the
/// certified net value.
inline double iterate_lower_bound(const EnergyCertificate& row, int N0, std::int64_t N) {
  if (N < 1) throw Error(ErrorCode::config_invalid, "N must be >= 1");
  if (row.verdict != Verdict::positive) throw Error(ErrorCode::not_positive, "certificate is not positive");
  return row.net() / N0;
}

inline double iterate_lower_bound(const CertificateReport& report, std::int64_t N) {
  if (report.rows.empty()) throw Error(ErrorCode::not_positive, "empty report");
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& row : report.rows) lo = std::min(lo, iterate_lower_bound(row, report.N0, N));
  return lo;
}

}  // namespace lyapcert

/*
 * cocycle.hpp - Schrödinger transfer matrices over a base dynamics.
 *
 *   M_N(x) = S(T^{N−1}x) ⋯ S(Tx) S(x),   S(y) = [[E − λf(y), −1], [1, 0]].
 *
 * Inside the band |E| < 2 − δ the same cocycle can be written in the
 * Figotin–Pastur frame: with E = 2cos κ, V = −f/sin κ and the similarity
 * S_κ = [[1, −cos κ], [0, sin κ]], each step becomes
 *
 *   S_κ S(y) S_κ⁻¹ = R_κ + λV(y) [[sin κ, cos κ], [0, 0]],
 *
 * a rotation plus a rank-one perturbation. Exponents are unchanged.
 */
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "lyapcert/dynamics.hpp"
#include "lyapcert/error.hpp"
#include "lyapcert/linalg.hpp"
#include "lyapcert/potential.hpp"

namespace lyapcert {

struct CocycleSpec {
  PotentialDescriptor potential;
  double energy = 0.0;
  DynamicsDescriptor dynamics = DynamicsDescriptor::doubling(2);

  void validate() const {
    if (!std::isfinite(energy) || !std::isfinite(potential.coupling)) {
      throw Error(ErrorCode::config_invalid, "energy and coupling must be finite");
    }
    if (dynamics.is_doubling() && !potential.is_one_dimensional()) {
      throw Error(ErrorCode::config_invalid, "potential on the circle cannot use a second frequency component");
    }
  }
};

inline Mat2 transfer_step(double E, double v) { return {E - v, -1.0, 1.0, 0.0}; }

inline constexpr double kDefaultBandMargin = 0.05;

struct FPFrame {
  double kappa = 0.0;
  double cos_kappa = 0.0;
  double sin_kappa = 1.0;
  double delta = kDefaultBandMargin;
  Mat2 S = Mat2::identity();
  Mat2 S_inverse = Mat2::identity();

  double energy() const { return 2.0 * cos_kappa; }
};

/// Frame for |E| ≤ 2 − δ; energy-out-of-band otherwise.
inline FPFrame fp_frame(double E, double delta = kDefaultBandMargin) {
  if (!(delta > 0.0)) throw Error(ErrorCode::config_invalid, "band margin delta must be > 0");
  if (std::fabs(E) > 2.0 - delta) {
    throw Error(ErrorCode::energy_out_of_band, "|E| > 2 - delta, use the raw representation");
  }
  FPFrame f;
  f.kappa = std::acos(E / 2.0);
  f.cos_kappa = E / 2.0;
  f.sin_kappa = std::sin(f.kappa);
  f.delta = delta;
  f.S = {1.0, -f.cos_kappa, 0.0, f.sin_kappa};
  f.S_inverse = {1.0, f.cos_kappa / f.sin_kappa, 0.0, 1.0 / f.sin_kappa};
  return f;
}

/// R_κ + λV [[sin κ, cos κ], [0, 0]] with V = −v/sin κ; v is the unscaled sample f(y).
inline Mat2 fp_step(const FPFrame& frame, double coupling, double v) {
  const double lv = -coupling * v / frame.sin_kappa;
  return {frame.cos_kappa + lv * frame.sin_kappa, -frame.sin_kappa + lv * frame.cos_kappa, frame.sin_kappa,
          frame.cos_kappa};
}

enum class RepresentationMode { raw, fp_auto };

/// The frame to use for energy E, or nullopt for the raw representation.
inline std::optional<FPFrame> resolve_frame(double E, RepresentationMode mode, double delta = kDefaultBandMargin) {
  if (mode == RepresentationMode::raw || std::fabs(E) > 2.0 - delta) return std::nullopt;
  return fp_frame(E, delta);
}

/// Builds one cocycle factor from an unscaled potential sample.
struct StepBuilder {
  double energy = 0.0;
  double coupling = 1.0;
  std::optional<FPFrame> frame;

  Mat2 operator()(double shape_value) const {
    return frame ? fp_step(*frame, coupling, shape_value) : transfer_step(energy, coupling * shape_value);
  }

  /// Bound c with ‖step‖, ‖step⁻¹‖ ≤ c whenever |f| ≤ sup_f.
  double norm_bound(double sup_f) const {
    const double pert = std::fabs(coupling) * sup_f;
    if (frame) return 1.0 + pert / frame->sin_kappa;
    const double a = std::fabs(energy) + pert;
    return 0.5 * (a + std::sqrt(a * a + 4.0));
  }

  /// ‖step(f₁) − step(f₂)‖ per unit |f₁ − f₂|.
  double sensitivity() const {
    return frame ? std::fabs(coupling) / frame->sin_kappa : std::fabs(coupling);
  }
};

inline StepBuilder step_builder(const CocycleSpec& spec, std::optional<FPFrame> frame = std::nullopt) {
  return {spec.energy, spec.potential.coupling, frame};
}

struct OrbitProduct {
  double log_norm = 0.0;
  Vec2 direction{1.0, 0.0};
};

/// log‖M_N(x) v‖ and the final direction, renormalized at every step.
inline OrbitProduct orbit_product(const CocycleSpec& spec, TorusPoint x, std::int64_t N, Vec2 v,
                                  std::optional<FPFrame> frame = std::nullopt) {
  const StepBuilder step = step_builder(spec, frame);
  auto acc = LogNormAccumulator::start(v);
  TorusPoint p = wrap01(x);
  for (std::int64_t n = 0; n < N; ++n) {
    acc = apply_renormalized(acc, step(spec.potential.shape(p)));
    p = spec.dynamics.step(p);
  }
  return {acc.log_norm, acc.direction};
}

/// log‖M_N(x)ᵀ v‖: transposed factors applied from T^{N−1}x down to x.
inline OrbitProduct adjoint_orbit_product(const CocycleSpec& spec, TorusPoint x, std::int64_t N, Vec2 v,
                                          std::optional<FPFrame> frame = std::nullopt) {
  const StepBuilder step = step_builder(spec, frame);
  std::vector<double> samples(static_cast<std::size_t>(std::max<std::int64_t>(N, 0)));
  TorusPoint p = wrap01(x);
  for (auto& s : samples) {
    s = spec.potential.shape(p);
    p = spec.dynamics.step(p);
  }
  auto acc = LogNormAccumulator::start(v);
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    acc = apply_renormalized(acc, step(*it).transposed());
  }
  return {acc.log_norm, acc.direction};
}

}  // namespace lyapcert

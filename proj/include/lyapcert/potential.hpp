/*
 * potential.hpp - sampling functions f on 𝕋 or 𝕋².
 *
 * Only trigonometric polynomials are supported,
 *
 *   f(x) = Σ_k  a_k cos(2π n_k·x) + b_k sin(2π n_k·x),
 *
 * because their sup norm and gradient bound are available in closed form:
 *   ‖f‖∞  ≤ Σ_k sqrt(a_k² + b_k²),
 *   ‖∇f‖∞ ≤ Σ_k sqrt(a_k² + b_k²) · 2π |n_k|.
 * The oscillation sup f − inf f has no closed form in general and is sampled.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lyapcert/error.hpp"
#include "lyapcert/torus.hpp"

namespace lyapcert {

struct TrigTerm {
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
  int n1 = 0;
  int n2 = 0;
};

enum class PotentialFamily { cosine, trig_polynomial };

struct PotentialDescriptor {
  PotentialFamily family = PotentialFamily::cosine;
  std::vector<TrigTerm> terms{{1.0, 0.0, 1, 0}};
  double coupling = 1.0;

  /// f(x) = cos 2πx.
  static PotentialDescriptor cosine(double coupling) {
    return {PotentialFamily::cosine, {{1.0, 0.0, 1, 0}}, coupling};
  }
  static PotentialDescriptor trig(std::vector<TrigTerm> terms, double coupling) {
    return {PotentialFamily::trig_polynomial, std::move(terms), coupling};
  }
  static PotentialDescriptor zero() { return trig({}, 0.0); }

  /// Unscaled f at p (the coupling is not applied).
  double shape(TorusPoint p) const {
    double sum = 0.0;
    for (const auto& t : terms) {
      const double phase = 2.0 * std::numbers::pi * (t.n1 * p.x + t.n2 * p.y);
      if (t.cos_coeff != 0.0) sum += t.cos_coeff * std::cos(phase);
      if (t.sin_coeff != 0.0) sum += t.sin_coeff * std::sin(phase);
    }
    return sum;
  }

  /// λ·f(p), the on-site potential.
  double operator()(TorusPoint p) const { return coupling * shape(p); }

  /// Upper bound on ‖f‖∞ (unscaled).
  double sup_bound() const {
    double s = 0.0;
    for (const auto& t : terms) s += std::hypot(t.cos_coeff, t.sin_coeff);
    return s;
  }

  /// Upper bound on ‖∇f‖∞ (unscaled, Euclidean gradient).
  double derivative_bound() const {
    double s = 0.0;
    for (const auto& t : terms) {
      s += std::hypot(t.cos_coeff, t.sin_coeff) * 2.0 * std::numbers::pi *
           std::hypot(static_cast<double>(t.n1), static_cast<double>(t.n2));
    }
    return s;
  }

  /// ‖f‖_{C¹} bound.
  double c1_bound() const { return sup_bound() + derivative_bound(); }

  bool is_one_dimensional() const {
    return std::all_of(terms.begin(), terms.end(), [](const TrigTerm& t) { return t.n2 == 0; });
  }

  bool is_constant() const {
    return std::all_of(terms.begin(), terms.end(), [](const TrigTerm& t) {
      return (t.n1 == 0 && t.n2 == 0) || (t.cos_coeff == 0.0 && t.sin_coeff == 0.0);
    });
  }

  /// Frequency cutoff B: largest |frequency component| plus one.
  int frequency_cutoff() const {
    int m = 0;
    for (const auto& t : terms) m = std::max({m, std::abs(t.n1), std::abs(t.n2)});
    return m + 1;
  }

  /// sup f − inf f of the unscaled shape, by dense sampling.
  double oscillation(int samples_per_axis = 4096) const {
    double lo = INFINITY;
    double hi = -INFINITY;
    if (is_one_dimensional()) {
      for (int i = 0; i < samples_per_axis; ++i) {
        const double v = shape({static_cast<double>(i) / samples_per_axis, 0.0});
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    } else {
      const int n = std::max(16, static_cast<int>(std::sqrt(static_cast<double>(samples_per_axis)) * 4));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double v = shape({static_cast<double>(i) / n, static_cast<double>(j) / n});
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    return hi - lo;
  }

  std::string describe() const {
    if (family == PotentialFamily::cosine) return "cos(2*pi*x)";
    std::string out;
    for (const auto& t : terms) {
      if (!out.empty()) out += " + ";
      out += "(" + std::to_string(t.cos_coeff) + "," + std::to_string(t.sin_coeff) + ")@(" +
             std::to_string(t.n1) + "," + std::to_string(t.n2) + ")";
    }
    return out.empty() ? "0" : out;
  }
};

}  // namespace lyapcert

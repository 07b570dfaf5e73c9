/*
 * linalg.hpp - 2x2 real linear algebra for SL(2,R) cocycles.
 *
 * Everything here is a value type. The operator norm is evaluated in closed
 * form from the Gram matrix MᵀM:
 *
 *   ‖M‖² = (tr G + sqrt((tr G)² − 4 det G)) / 2,   G = MᵀM,
 *
 * and products of many matrices acting on a vector are carried through a
 * LogNormAccumulator, which keeps a unit direction plus the accumulated
 * natural log of the norm so nothing overflows at N = 10⁵.
 */
#pragma once

#include <cmath>
#include <numbers>

#include "lyapcert/error.hpp"

namespace lyapcert {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

inline Vec2 normalized(Vec2 v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::numeric, "cannot normalize a zero or non-finite vector");
  }
  return {v.x / n, v.y / n};
}

/// Unit vector at angle theta.
inline Vec2 unit_at(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Row-major [[a, b], [c, d]].
struct Mat2 {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diagonal(double p, double q) { return {p, 0.0, 0.0, q}; }
  static Mat2 rotation(double theta) {
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    return {cs, -sn, sn, cs};
  }

  constexpr double det() const { return a * d - b * c; }
  constexpr double trace() const { return a + d; }
  constexpr Mat2 transposed() const { return {a, c, b, d}; }

  friend constexpr Mat2 operator*(const Mat2& l, const Mat2& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
  }
  friend constexpr Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
  }
  friend constexpr Mat2 operator+(const Mat2& l, const Mat2& r) {
    return {l.a + r.a, l.b + r.b, l.c + r.c, l.d + r.d};
  }
  friend constexpr Mat2 operator-(const Mat2& l, const Mat2& r) {
    return {l.a - r.a, l.b - r.b, l.c - r.c, l.d - r.d};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

inline Mat2 mat2_mul(const Mat2& lhs, const Mat2& rhs) { return lhs * rhs; }

inline Mat2 inverse(const Mat2& m) {
  const double det = m.det();
  if (det == 0.0 || !std::isfinite(det)) {
    throw Error(ErrorCode::numeric, "singular 2x2 matrix");
  }
  return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

/// Largest singular value, closed form.
inline double operator_norm(const Mat2& m) {
  // G = MᵀM = [[p, q], [q, r]]
  const double p = m.a * m.a + m.c * m.c;
  const double r = m.b * m.b + m.d * m.d;
  const double q = m.a * m.b + m.c * m.d;
  const double half_trace = 0.5 * (p + r);
  const double disc = std::hypot(0.5 * (p - r), q);
  return std::sqrt(half_trace + disc);
}

/// Largest absolute entry; used for entrywise relative comparisons.
inline double max_abs_entry(const Mat2& m) {
  return std::fmax(std::fmax(std::fabs(m.a), std::fabs(m.b)),
                   std::fmax(std::fabs(m.c), std::fabs(m.d)));
}

inline bool is_sl2(const Mat2& m, double tol = 1e-12) { return std::fabs(m.det() - 1.0) < tol; }

/// Direction of the running product applied to v₀, plus log of its norm.
struct LogNormAccumulator {
  Vec2 direction{1.0, 0.0};
  double log_norm = 0.0;

  static LogNormAccumulator start(Vec2 v) { return {normalized(v), std::log(norm(v))}; }
};

inline LogNormAccumulator apply_renormalized(const LogNormAccumulator& acc, const Mat2& m) {
  const Vec2 image = m * acc.direction;
  const double n = norm(image);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::numeric, "degenerate step in renormalized product");
  }
  return {{image.x / n, image.y / n}, acc.log_norm + std::log(n)};
}

}  // namespace lyapcert

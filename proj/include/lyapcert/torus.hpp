#pragma once

#include <cmath>

#include "lyapcert/linalg.hpp"

namespace lyapcert {

/// A point of 𝕋 or 𝕋², coordinates in [0, 1). Circle points leave y at 0.
using TorusPoint = Vec2;

/// Reduce to [0, 1).
inline double wrap01(double t) {
  double r = t - std::floor(t);
  return r >= 1.0 ? 0.0 : r;
}

inline TorusPoint wrap01(TorusPoint p) { return {wrap01(p.x), wrap01(p.y)}; }

}  // namespace lyapcert

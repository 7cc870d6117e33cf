#pragma once

#include <algorithm>
#include <cmath>

namespace amelnav {

inline constexpr double kPi = 3.14159265358979323846;

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

inline double clamp(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

inline double sq(double x) { return x * x; }

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

}  // namespace amelnav

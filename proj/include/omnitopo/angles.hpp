#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace omnitopo {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Reduce an angle onto the projective circle [0, pi). Values that land on pi
/// (including the rounding of tiny negatives) wrap to 0.
inline double wrap_pi(double angle) {
  double r = std::fmod(angle, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r = 0.0;
  return r;
}

/// Signed difference a - b on the projective circle, in [-pi/2, pi/2).
inline double signed_diff_pi(double a, double b) {
  double d = wrap_pi(a - b);
  return d >= kPi / 2 ? d - kPi : d;
}

/// Geodesic distance on the projective circle, in [0, pi/2].
inline double geodesic_pi(double a, double b) {
  return std::abs(signed_diff_pi(a, b));
}

/// Circular mean of angles with period pi, returned in [0, pi).
inline double circular_mean_pi(std::span<const double> angles) {
  double s = 0.0, c = 0.0;
  for (double a : angles) {
    s += std::sin(2.0 * a);
    c += std::cos(2.0 * a);
  }
  return wrap_pi(0.5 * std::atan2(s, c));
}

}  // namespace omnitopo

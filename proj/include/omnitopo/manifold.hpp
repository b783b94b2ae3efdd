#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "omnitopo/angles.hpp"
#include "omnitopo/chassis.hpp"
#include "omnitopo/wrench.hpp"

namespace omnitopo {

/// Upper-hemisphere representative of the line through d: z > 0, then y > 0 on
/// the equator, then x > 0. Components with magnitude <= tol count as zero for
/// the choice of sign; the returned vector is d or -d exactly.
inline Vec3 canonicalize(const Vec3& d, double tol = 0.0) {
  if (!d.allFinite() || d.norm() == 0.0) throw std::invalid_argument("cannot canonicalize a zero vector");
  if (d.z() > tol) return d;
  if (d.z() < -tol) return -d;
  if (d.y() > tol) return d;
  if (d.y() < -tol) return -d;
  return d.x() > 0.0 ? d : Vec3(-d);
}

inline DirectionSet canonicalize(const DirectionSet& s) {
  DirectionSet out;
  out.dirs.reserve(s.size());
  for (const auto& d : s.dirs) out.dirs.push_back(canonicalize(d));
  return out;
}

inline bool is_canonical(const Vec3& d) { return canonicalize(d) == d; }

/// Orthographic projection onto the equatorial disc.
inline std::array<double, 2> disc_project(const Vec3& d) { return {d.x(), d.y()}; }

struct TangentBasis {
  Vec3 n;  // radial
  Vec3 u;  // azimuthal, horizontal away from the poles
  Vec3 v;  // n x u
};

inline constexpr double kPoleThreshold = 1e-9;

/// u = (e_z x n)/|e_z x n|. At the poles e_z x n vanishes and e_y takes its
/// place, which gives u = e_x, v = e_y at the north pole.
inline TangentBasis tangent_basis(const Vec3& p) {
  const double norm = p.norm();
  if (!(norm > 0.0) || !p.allFinite()) throw std::invalid_argument("tangent basis needs a nonzero vector");
  TangentBasis b;
  b.n = p / norm;
  Vec3 w = Vec3::UnitZ().cross(b.n);
  if (w.norm() <= kPoleThreshold) w = Vec3::UnitY().cross(b.n);
  b.u = w.normalized();
  b.v = b.n.cross(b.u);
  return b;
}

inline std::vector<TangentBasis> tangent_bases(const Chassis& chassis) {
  std::vector<TangentBasis> out;
  out.reserve(chassis.size());
  for (const auto& p : chassis.vertices) out.push_back(tangent_basis(p));
  return out;
}

/// d_i = cos(theta_i) u_i + sin(theta_i) v_i.
inline DirectionSet direction_from_phase(const Chassis& chassis, const std::vector<double>& theta) {
  require_same_size(chassis, theta.size());
  DirectionSet out;
  out.dirs.reserve(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto b = tangent_basis(chassis.vertices[i]);
    out.dirs.push_back(std::cos(theta[i]) * b.u + std::sin(theta[i]) * b.v);
  }
  return out;
}

struct PhaseExtraction {
  std::vector<double> theta;  // each in [0, pi)
  double residual = 0.0;      // max_i |d_i . n_i|
};

/// Intrinsic phase of each rotor line in its tangent plane. The radial
/// component is discarded and reported as the residual.
inline PhaseExtraction phase_from_direction(const Chassis& chassis, const DirectionSet& dirs) {
  require_same_size(chassis, dirs.size());
  PhaseExtraction out;
  out.theta.reserve(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const auto b = tangent_basis(chassis.vertices[i]);
    const Vec3& d = dirs.dirs[i];
    double t = std::atan2(d.dot(b.v), d.dot(b.u));
    if (t < 0.0) t += kPi;
    out.theta.push_back(wrap_pi(t));
    out.residual = std::max(out.residual, std::abs(d.dot(b.n)));
  }
  return out;
}

inline double tangency_residual(const Chassis& chassis, const DirectionSet& dirs) {
  require_same_size(chassis, dirs.size());
  double r = 0.0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    r = std::max(r, std::abs(dirs.dirs[i].dot(chassis.vertices[i].normalized())));
  }
  return r;
}

/// Per-rotor |d_i . n_i|.
inline std::vector<double> tangency_per_rotor(const Chassis& chassis, const DirectionSet& dirs) {
  require_same_size(chassis, dirs.size());
  std::vector<double> r(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) r[i] = std::abs(dirs.dirs[i].dot(chassis.vertices[i].normalized()));
  return r;
}

/// Lexicographic order on the stacked coordinates; used to break cost ties.
inline bool lex_less(const DirectionSet& a, const DirectionSet& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) {
      if (a.dirs[i][k] < b.dirs[i][k]) return true;
      if (b.dirs[i][k] < a.dirs[i][k]) return false;
    }
  }
  return a.size() < b.size();
}

}  // namespace omnitopo

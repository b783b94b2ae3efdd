#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "omnitopo/chassis.hpp"

namespace omnitopo {

/// N unit vectors, one line of action per rotor. Sign carries no meaning.
struct DirectionSet {
  std::vector<Vec3> dirs;

  std::size_t size() const { return dirs.size(); }
};

using Matrix6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

struct GraspMatrix {
  Matrix6X entries;
  double characteristic_length = 1.0;
};

struct MetricReport {
  Vector6 singular_values = Vector6::Zero();  // descending
  double log_volume = 0.0;
  double condition_number = 0.0;  // +inf when sigma_min < 1e-15
  double min_singular = 0.0;
};

inline constexpr double kDefaultEpsilon = 1e-9;
inline constexpr double kUnitTolerance = 1e-9;

inline void require_unit_directions(const DirectionSet& dirs) {
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (!dirs.dirs[i].allFinite() || std::abs(dirs.dirs[i].norm() - 1.0) > kUnitTolerance) {
      throw std::invalid_argument("direction " + std::to_string(i + 1) + " is not a unit vector");
    }
  }
}

inline void require_same_size(const Chassis& chassis, std::size_t n) {
  if (chassis.size() != n) {
    throw std::invalid_argument("chassis has " + std::to_string(chassis.size()) + " rotors but got " +
                                std::to_string(n) + " entries");
  }
}

/// Column i is [d_i ; (p_i x d_i) / L_c]. Drag-induced moment is taken as zero.
inline GraspMatrix build_grasp(const Chassis& chassis, const DirectionSet& dirs, double L_c) {
  require_same_size(chassis, dirs.size());
  if (!(L_c > 0.0) || !std::isfinite(L_c)) throw std::invalid_argument("L_c must be positive");
  require_unit_directions(dirs);
  GraspMatrix A{Matrix6X(6, static_cast<Eigen::Index>(dirs.size())), L_c};
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const Vec3& d = dirs.dirs[i];
    const auto c = static_cast<Eigen::Index>(i);
    A.entries.block<3, 1>(0, c) = d;
    A.entries.block<3, 1>(3, c) = chassis.vertices[i].cross(d) / L_c;
  }
  return A;
}

inline MetricReport metrics_from_singular_values(const Vector6& s, double epsilon) {
  MetricReport r;
  r.singular_values = s;
  r.log_volume = 0.0;
  for (int k = 0; k < 6; ++k) r.log_volume -= std::log(s[k] + epsilon);
  r.min_singular = s[5];
  r.condition_number = s[5] < 1e-15 ? std::numeric_limits<double>::infinity() : s[0] / s[5];
  return r;
}

/// Singular values of a 6xN matrix, padded with zeros when N < 6.
inline Vector6 singular_values6(const Matrix6X& A) {
  Eigen::JacobiSVD<Matrix6X> svd(A);
  Vector6 s = Vector6::Zero();
  const auto& sv = svd.singularValues();
  for (Eigen::Index k = 0; k < sv.size() && k < 6; ++k) s[k] = sv[k];
  return s;
}

inline MetricReport metrics(const GraspMatrix& A, double epsilon = kDefaultEpsilon) {
  return metrics_from_singular_values(singular_values6(A.entries), epsilon);
}

inline MetricReport evaluate(const Chassis& chassis, const DirectionSet& dirs, double L_c,
                             double epsilon = kDefaultEpsilon) {
  return metrics(build_grasp(chassis, dirs, L_c), epsilon);
}

namespace detail {

// Grasp matrix without the unit-norm check: the gradient is taken with respect
// to raw coordinates, so finite-difference probes step off the sphere.
inline Matrix6X raw_grasp(const Chassis& chassis, const std::vector<Vec3>& d, double L_c) {
  Matrix6X A(6, static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    A.block<3, 1>(0, c) = d[i];
    A.block<3, 1>(3, c) = chassis.vertices[i].cross(d[i]) / L_c;
  }
  return A;
}

// dJ/dA for a cost J = sum_k f(sigma_k), given df/dsigma per k.
inline std::vector<Vec3> pull_back(const Chassis& chassis, const Eigen::JacobiSVD<Matrix6X>& svd,
                                   const Vector6& weights, double L_c) {
  const Eigen::Index r = std::min<Eigen::Index>(6, svd.singularValues().size());
  const Matrix6X G = svd.matrixU().leftCols(r) * weights.head(r).asDiagonal() *
                     svd.matrixV().leftCols(r).transpose();
  std::vector<Vec3> grad(chassis.size());
  for (std::size_t i = 0; i < chassis.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    const Vec3 top = G.block<3, 1>(0, c);
    const Vec3 bot = G.block<3, 1>(3, c);
    // d/dd of b.(p x d) = b x p
    grad[i] = top + bot.cross(chassis.vertices[i]) / L_c;
  }
  return grad;
}

}  // namespace detail

/// J_vol together with its gradient with respect to raw (unprojected) direction
/// coordinates.
struct CostAndGradient {
  double cost = 0.0;
  std::vector<Vec3> gradient;
};

inline CostAndGradient log_volume_and_gradient(const Chassis& chassis, const std::vector<Vec3>& d,
                                               double L_c, double epsilon = kDefaultEpsilon) {
  require_same_size(chassis, d.size());
  const Matrix6X A = detail::raw_grasp(chassis, d, L_c);
  Eigen::JacobiSVD<Matrix6X> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Vector6 w = Vector6::Zero();
  double cost = 0.0;
  for (Eigen::Index k = 0; k < 6; ++k) {
    const double s = k < sv.size() ? sv[k] : 0.0;
    cost -= std::log(s + epsilon);
    w[k] = -1.0 / (s + epsilon);
  }
  return {cost, detail::pull_back(chassis, svd, w, L_c)};
}

/// Gradient of J_vol with respect to each raw direction d_i (N partials).
inline std::vector<Vec3> cost_gradient(const Chassis& chassis, const DirectionSet& dirs, double L_c,
                                       double epsilon = kDefaultEpsilon) {
  return log_volume_and_gradient(chassis, dirs.dirs, L_c, epsilon).gradient;
}

/// kappa = sigma_max / sigma_min with its (sub)gradient. Requires N >= 6 and a
/// nonzero sigma_min; returns +inf cost with zero gradient otherwise.
inline CostAndGradient condition_number_and_gradient(const Chassis& chassis, const std::vector<Vec3>& d,
                                                     double L_c) {
  require_same_size(chassis, d.size());
  const Matrix6X A = detail::raw_grasp(chassis, d, L_c);
  Eigen::JacobiSVD<Matrix6X> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() < 6 || sv[5] < 1e-15) {
    return {std::numeric_limits<double>::infinity(), std::vector<Vec3>(d.size(), Vec3::Zero())};
  }
  const double smax = sv[0], smin = sv[5];
  Vector6 w = Vector6::Zero();
  w[0] = 1.0 / smin;
  w[5] = -smax / (smin * smin);
  return {smax / smin, detail::pull_back(chassis, svd, w, L_c)};
}

struct SensitivityPoint {
  double ratio = 0.0;
  double kappa = 0.0;
  double sigma_min = 0.0;
};

/// Metrics of build_grasp(chassis, dirs, r * R_geom) for each ratio r.
inline std::vector<SensitivityPoint> sensitivity_sweep(const Chassis& chassis, const DirectionSet& dirs,
                                                       const std::vector<double>& ratios,
                                                       double epsilon = kDefaultEpsilon) {
  if (ratios.empty()) throw std::invalid_argument("sensitivity sweep needs at least one ratio");
  std::vector<SensitivityPoint> out;
  out.reserve(ratios.size());
  for (double r : ratios) {
    if (!(r > 0.0)) throw std::invalid_argument("sensitivity ratios must be positive");
    const auto m = evaluate(chassis, dirs, r * chassis.circumradius, epsilon);
    out.push_back({r, m.condition_number, m.min_singular});
  }
  return out;
}

/// count points log-spaced over [lo, hi], endpoints included.
inline std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi >= lo) || count < 1) throw std::invalid_argument("invalid log grid");
  std::vector<double> g(static_cast<std::size_t>(count));
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (int k = 0; k < count; ++k) g[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * k / (count - 1));
  return g;
}

}  // namespace omnitopo

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "omnitopo/angles.hpp"
#include "omnitopo/chassis.hpp"
#include "omnitopo/errors.hpp"
#include "omnitopo/manifold.hpp"
#include "omnitopo/optimizer.hpp"

namespace omnitopo {

using Point2 = Eigen::Vector2d;

/// Semi-ellipse of semi-major 1 and semi-minor b, centred at the origin:
///   E(t) = cos t (cos psi, sin psi) + b sin t (sin psi, -cos psi),  t in [0, pi].
/// This is the disc image of one upper-hemisphere half of a tilted great circle.
struct SemiEllipse {
  double psi = 0.0;
  double b = 0.0;

  Point2 at(double t) const {
    const Point2 major(std::cos(psi), std::sin(psi));
    const Point2 minor(std::sin(psi), -std::cos(psi));
    return std::cos(t) * major + b * std::sin(t) * minor;
  }
};

/// Distance from x to the semi-ellipse: coarse grid over t, then a safeguarded
/// Newton polish of the best grid parameter.
inline double distance_to_semi_ellipse(const SemiEllipse& e, const Point2& x) {
  constexpr int kGrid = 64;
  const Point2 major(std::cos(e.psi), std::sin(e.psi));
  const Point2 minor(std::sin(e.psi), -std::cos(e.psi));
  // work in the ellipse frame
  const double px = x.dot(major), py = x.dot(minor);
  auto sq = [&](double t) {
    const double dx = px - std::cos(t), dy = py - e.b * std::sin(t);
    return dx * dx + dy * dy;
  };
  double best_t = 0.0, best = sq(0.0);
  for (int k = 1; k <= kGrid; ++k) {
    const double t = kPi * k / kGrid;
    const double v = sq(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  double t = best_t;
  for (int it = 0; it < 12; ++it) {
    const double c = std::cos(t), s = std::sin(t);
    const double dx = px - c, dy = py - e.b * s;
    const double g = dx * s - dy * e.b * c;  // half of d/dt
    const double h = s * s + dx * c + e.b * e.b * c * c + dy * e.b * s;
    if (!(h > 0.0)) break;
    const double tn = std::clamp(t - g / h, 0.0, kPi);
    const double vn = sq(tn);
    if (!(vn < best)) break;
    best = vn;
    t = tn;
  }
  return std::sqrt(best);
}

struct RotorEllipseFit {
  double psi = 0.0;           // radians in [0, 2 pi)
  double b = 0.0;             // semi-minor axis in [0, 1]
  double eta = 0.0;           // arccos(b), in [0, pi/2]
  double rms_residual = 0.0;  // RMS point-to-curve distance
  double mean_distance = 0.0; // mean point-to-curve distance
};

struct EllipseFitReport {
  std::vector<RotorEllipseFit> rotors;

  /// Mean over rotors of the mean orthogonal distance.
  double mean_distance() const {
    if (rotors.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : rotors) s += r.mean_distance;
    return s / static_cast<double>(rotors.size());
  }
};

inline constexpr std::size_t kMinEllipsePoints = 8;

/// Lines this close to the equator are canonicalized by their in-plane sign,
/// so solver noise in z cannot scatter a horizontal tangent circle across the
/// whole rim. Endpoints of a tilted semi-ellipse only swap ends.
inline constexpr double kEquatorTolerance = 1e-4;

namespace detail {

inline double wrap_two_pi(double a) {
  double r = std::fmod(a, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  if (r >= 2.0 * kPi) r = 0.0;
  return r;
}

inline Eigen::VectorXd ellipse_residuals(const SemiEllipse& e, const std::vector<Point2>& pts) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) r[static_cast<Eigen::Index>(j)] = distance_to_semi_ellipse(e, pts[j]);
  return r;
}

// Levenberg-Marquardt over (psi, b) with a forward-difference Jacobian; b is
// clamped to [0, 1].
inline std::pair<SemiEllipse, double> levenberg_marquardt(SemiEllipse e, const std::vector<Point2>& pts) {
  Eigen::VectorXd r = ellipse_residuals(e, pts);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  constexpr double h = 1e-7;
  for (int it = 0; it < 100 && cost > 0.0; ++it) {
    Eigen::MatrixXd J(r.size(), 2);
    SemiEllipse ep = e;
    ep.psi += h;
    J.col(0) = (ellipse_residuals(ep, pts) - r) / h;
    ep = e;
    const double hb = e.b + h <= 1.0 ? h : -h;
    ep.b += hb;
    J.col(1) = (ellipse_residuals(ep, pts) - r) / hb;
    const Eigen::Matrix2d JtJ = J.transpose() * J;
    const Eigen::Vector2d Jtr = J.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 20; ++tries) {
      Eigen::Matrix2d M = JtJ;
      M.diagonal() += lambda * (JtJ.diagonal().array() + 1e-12).matrix();
      const Eigen::Vector2d step = -M.ldlt().solve(Jtr);
      SemiEllipse trial{e.psi + step[0], std::clamp(e.b + step[1], 0.0, 1.0)};
      const Eigen::VectorXd rt = ellipse_residuals(trial, pts);
      const double ct = rt.squaredNorm();
      if (ct < cost) {
        const double rel = (cost - ct) / std::max(cost, 1e-300);
        const double move = std::abs(trial.psi - e.psi) + std::abs(trial.b - e.b);
        e = trial;
        r = rt;
        cost = ct;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (rel < 1e-14 || move < 1e-13) return {e, cost};
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return {e, cost};
}

}  // namespace detail

/// Fits one semi-ellipse to a disc point cloud: PCA start for the major axis,
/// Levenberg-Marquardt from both orientations and several minor axes, then the
/// orientation flip that puts the cloud's centroid on the bulge side.
inline RotorEllipseFit fit_semi_ellipse(const std::vector<Point2>& pts) {
  if (pts.size() < kMinEllipsePoints) {
    throw InsufficientDataError("semi-ellipse fit needs at least " + std::to_string(kMinEllipsePoints) +
                                " points, got " + std::to_string(pts.size()));
  }
  Point2 centroid = Point2::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) cov += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Point2 v1 = es.eigenvectors().col(1);
  const double psi0 = std::atan2(v1.y(), v1.x());

  SemiEllipse best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double psi : {psi0, psi0 + kPi}) {
    for (double b : {0.5, 0.1, 0.9}) {
      auto [e, c] = detail::levenberg_marquardt({psi, b}, pts);
      if (c < best_cost) {
        best_cost = c;
        best = e;
      }
    }
  }
  const Point2 minor(std::sin(best.psi), -std::cos(best.psi));
  if (centroid.dot(minor) <= 0.0 && best.b > 0.0) best.psi += kPi;

  RotorEllipseFit out;
  out.psi = detail::wrap_two_pi(best.psi);
  out.b = std::clamp(best.b, 0.0, 1.0);
  out.eta = std::acos(out.b);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& p : pts) {
    const double d = distance_to_semi_ellipse({out.psi, out.b}, p);
    sum += d;
    sum_sq += d * d;
  }
  out.rms_residual = std::sqrt(sum_sq / static_cast<double>(pts.size()));
  out.mean_distance = sum / static_cast<double>(pts.size());
  return out;
}

/// Per-rotor semi-ellipse fits of the disc projections of a solution ensemble.
inline EllipseFitReport fit_semi_ellipses(const std::vector<DirectionSet>& solutions, const Chassis& chassis) {
  if (solutions.size() < kMinEllipsePoints) {
    throw InsufficientDataError("semi-ellipse fit needs at least " + std::to_string(kMinEllipsePoints) +
                                " solutions, got " + std::to_string(solutions.size()));
  }
  EllipseFitReport rep;
  rep.rotors.reserve(chassis.size());
  for (std::size_t i = 0; i < chassis.size(); ++i) {
    std::vector<Point2> pts;
    pts.reserve(solutions.size());
    for (const auto& s : solutions) {
      require_same_size(chassis, s.size());
      const auto xy = disc_project(canonicalize(s.dirs[i], kEquatorTolerance));
      pts.emplace_back(xy[0], xy[1]);
    }
    rep.rotors.push_back(fit_semi_ellipse(pts));
  }
  return rep;
}

inline EllipseFitReport fit_semi_ellipses(const SolutionSet& set, const Chassis& chassis) {
  std::vector<DirectionSet> dirs;
  dirs.reserve(set.size());
  for (const auto& s : set.solutions) dirs.push_back(s.dirs);
  return fit_semi_ellipses(dirs, chassis);
}

/// The semi-ellipse traced by the tangent circle of vertex p: b = |n_z| and the
/// major axis is horizontal and orthogonal to p.
inline RotorEllipseFit expected_semi_ellipse(const Vec3& p) {
  Vec3 n = p.normalized();
  if (n.z() < 0.0) n = -n;
  RotorEllipseFit e;
  e.b = std::min(1.0, n.z());
  e.eta = std::acos(e.b);
  e.psi = detail::wrap_two_pi(std::atan2(-n.x(), n.y()));
  return e;
}

/// Per rotor: true iff the fitted (psi, eta) agree with the tangent-plane
/// prediction within tol_deg. psi is compared modulo pi when the predicted
/// curve is a segment and skipped when it is the full rim circle.
inline std::vector<bool> verify_tangent_collapse(const EllipseFitReport& report, const Chassis& chassis,
                                                 double tol_deg) {
  require_same_size(chassis, report.rotors.size());
  const double tol = deg_to_rad(tol_deg);
  std::vector<bool> ok(chassis.size());
  for (std::size_t i = 0; i < chassis.size(); ++i) {
    const auto want = expected_semi_ellipse(chassis.vertices[i]);
    const auto& got = report.rotors[i];
    bool pass = std::abs(got.eta - want.eta) <= tol;
    if (want.eta > 1e-6) {
      const double dpsi = want.b < 1e-3 ? geodesic_pi(got.psi, want.psi)
                                        : std::abs(std::remainder(got.psi - want.psi, 2.0 * kPi));
      pass = pass && dpsi <= tol;
    }
    ok[i] = pass;
  }
  return ok;
}

}  // namespace omnitopo

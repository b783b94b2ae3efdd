#pragma once

// Property measurements shared by the unit suites and the acceptance run.
// Each returns the worst deviation found so callers pick the tolerance.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "omnitopo/omnitopo.hpp"
#include "oracles.hpp"

namespace props {

using namespace omnitopo;

inline DirectionSet random_dirs(std::size_t n, std::uint64_t seed) {
  auto rng = sample_stream(seed, 0);
  return random_direction_set(n, rng);
}

/// Max change of any singular value when one d_i is negated, over all i.
inline double sign_flip_error(const Chassis& c, const DirectionSet& d) {
  const auto s0 = evaluate(c, d, c.circumradius).singular_values;
  double worst = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    DirectionSet f = d;
    f.dirs[i] = -f.dirs[i];
    worst = std::max(worst, (evaluate(c, f, c.circumradius).singular_values - s0).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Max change of any singular value under a common rotation of p and d.
inline double rotation_error(const Chassis& c, const DirectionSet& d, const Eigen::Matrix3d& R) {
  Chassis rc = c;
  DirectionSet rd = d;
  for (auto& p : rc.vertices) p = R * p;
  for (auto& x : rd.dirs) x = R * x;
  for (auto& x : rd.dirs) x.normalize();
  return (evaluate(rc, rd, rc.circumradius).singular_values - evaluate(c, d, c.circumradius).singular_values)
      .cwiseAbs()
      .maxCoeff();
}

/// Max entry difference between the grasp matrix of the chassis scaled by s
/// with L_c = s and the unscaled one with L_c = 1.
inline double similarity_error(const Chassis& c, const DirectionSet& d, double s) {
  Chassis sc = c;
  for (auto& p : sc.vertices) p *= s;
  sc.circumradius *= s;
  return (build_grasp(sc, d, s).entries - build_grasp(c, d, 1.0).entries).cwiseAbs().maxCoeff();
}

/// max_i |d_i . m_i| over the grasp columns (drag term zero).
inline double klein_residual(const Chassis& c, const DirectionSet& d) {
  const auto A = build_grasp(c, d, c.circumradius).entries;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < A.cols(); ++i) worst = std::max(worst, std::abs(A.col(i).head<3>().dot(A.col(i).tail<3>())));
  return worst;
}

/// Relative error of the analytic gradient against central differences,
/// measured as max component deviation over max component magnitude.
inline double gradient_error(const Chassis& c, const DirectionSet& d) {
  const auto g = cost_gradient(c, d, c.circumradius);
  const auto fd = oracle::fd_gradient(c.vertices, d.dirs, c.circumradius);
  double dev = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    dev = std::max(dev, (g[i] - fd[i]).cwiseAbs().maxCoeff());
    mag = std::max(mag, fd[i].cwiseAbs().maxCoeff());
  }
  return dev / mag;
}

/// Max geodesic error of theta -> directions -> theta on random phases.
inline double phase_round_trip_error(const Chassis& c, std::uint64_t seed, int trials = 50) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, kPi);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> th(c.size());
    for (auto& x : th) x = u(rng);
    const auto back = phase_from_direction(c, direction_from_phase(c, th));
    for (std::size_t i = 0; i < th.size(); ++i) worst = std::max(worst, geodesic_pi(th[i], back.theta[i]));
    worst = std::max(worst, back.residual);
  }
  return worst;
}

/// Max |wrap(unwrap(P)) - P| on a random phase matrix, taken on the circle.
inline double unwrap_section_error(std::uint64_t seed, int rows = 200, int cols = 8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, kPi);
  PhaseMatrix P(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) P(r, c) = u(rng);
  const PhaseMatrix L = unwrap_projective(P);
  double worst = 0.0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double back = wrap_pi(L(r, c));
      worst = std::max(worst, std::min(std::abs(back - P(r, c)), kPi - std::abs(back - P(r, c))));
    }
  return worst;
}

struct Recovery {
  int K = 0;
  double max_offset_error_deg = 0.0;
  bool chirality_ok = true;
};

/// Phase-locked synthetic data theta_i = chi_i lambda + delta_i + noise for
/// the given branches, then full extraction. Offsets are compared after
/// matching each true branch to its nearest extracted branch.
inline Recovery synthetic_recovery(const std::vector<std::vector<double>>& delta,
                                   const std::vector<std::vector<int>>& chi, int per_branch, double noise_deg,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lam(0.0, kPi);
  std::normal_distribution<double> noise(0.0, deg_to_rad(noise_deg));
  const std::size_t n = delta.front().size();
  PhaseMatrix P(static_cast<Eigen::Index>(delta.size() * static_cast<std::size_t>(per_branch)),
                static_cast<Eigen::Index>(n));
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    for (int m = 0; m < per_branch; ++m, ++row) {
      const double l = lam(rng);
      for (std::size_t i = 0; i < n; ++i) P(row, static_cast<Eigen::Index>(i)) = wrap_pi(chi[k][i] * l + delta[k][i] + noise(rng));
    }
  }
  const auto ex = extract_branches(P);
  Recovery out;
  out.K = ex.model.K();
  for (std::size_t k = 0; k < delta.size(); ++k) {
    double best = 1e9;
    const Branch* hit = nullptr;
    for (const auto& b : ex.model.branches) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d = std::max(d, geodesic_pi(b.offsets[i], delta[k][i]));
      if (d < best) {
        best = d;
        hit = &b;
      }
    }
    out.max_offset_error_deg = std::max(out.max_offset_error_deg, rad_to_deg(best));
    if (hit && hit->chirality != chi[k]) out.chirality_ok = false;
  }
  return out;
}

}  // namespace props

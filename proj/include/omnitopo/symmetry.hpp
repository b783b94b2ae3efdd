#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "omnitopo/chassis.hpp"
#include "omnitopo/manifold.hpp"
#include "omnitopo/star_polygon.hpp"

namespace omnitopo {

/// A proper rotation R with R * reference[j] = target[perm[j]] for all j.
struct Congruence {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  std::vector<std::size_t> perm;
};

namespace detail {

inline Eigen::Matrix3d frame(const Vec3& a, const Vec3& b) {
  const Vec3 e1 = a.normalized();
  const Vec3 e2 = (b - b.dot(e1) * e1).normalized();
  Eigen::Matrix3d f;
  f.col(0) = e1;
  f.col(1) = e2;
  f.col(2) = e1.cross(e2);
  return f;
}

}  // namespace detail

/// Every proper rotation carrying the reference vertex set onto the target
/// vertex set. Found by sending a fixed non-collinear reference pair onto each
/// target pair with matching norms and inner product, then checking that the
/// induced map is a bijection of the vertex sets.
inline std::vector<Congruence> congruences(const std::vector<Vec3>& reference, const std::vector<Vec3>& target,
                                           double tol = 1e-6) {
  const std::size_t n = reference.size();
  if (n != target.size()) throw std::invalid_argument("vertex sets differ in size");
  std::vector<Congruence> out;
  if (n == 0) return out;
  std::size_t ia = 0, ib = n;
  for (std::size_t j = 1; j < n; ++j) {
    if (reference[ia].cross(reference[j]).norm() > 1e-6 * reference[ia].norm() * reference[j].norm()) {
      ib = j;
      break;
    }
  }
  if (ib == n) throw std::invalid_argument("reference vertices are collinear");
  const Vec3& wa = reference[ia];
  const Vec3& wb = reference[ib];
  const Eigen::Matrix3d fw = detail::frame(wa, wb);
  for (std::size_t x = 0; x < n; ++x) {
    if (std::abs(target[x].norm() - wa.norm()) > tol) continue;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x || std::abs(target[y].norm() - wb.norm()) > tol) continue;
      if (std::abs(target[x].dot(target[y]) - wa.dot(wb)) > tol) continue;
      Congruence c;
      c.rotation = detail::frame(target[x], target[y]) * fw.transpose();
      std::vector<bool> hit(n, false);
      bool ok = true;
      for (std::size_t j = 0; j < n && ok; ++j) {
        const Vec3 img = c.rotation * reference[j];
        std::optional<std::size_t> k;
        for (std::size_t t = 0; t < n; ++t) {
          if (!hit[t] && (img - target[t]).norm() <= tol) {
            k = t;
            break;
          }
        }
        if (!k) ok = false;
        else {
          hit[*k] = true;
          c.perm.push_back(*k);
        }
      }
      if (ok) out.push_back(std::move(c));
    }
  }
  return out;
}

/// Offsets (relative to target vertex 1) of the reference branch point
/// theta_ref, carried to the target chassis by a congruence. The reference
/// phases are read in the reference chassis' own tangent bases.
inline std::vector<double> transport_offsets(const Chassis& reference, const std::vector<double>& theta_ref,
                                             const Chassis& target, const Congruence& g) {
  const auto dref = direction_from_phase(reference, theta_ref);
  DirectionSet mapped;
  mapped.dirs.resize(target.size());
  for (std::size_t j = 0; j < reference.size(); ++j) mapped.dirs[g.perm[j]] = g.rotation * dref.dirs[j];
  const auto th = phase_from_direction(target, mapped).theta;
  std::vector<double> off(th.size());
  for (std::size_t i = 0; i < th.size(); ++i) off[i] = wrap_pi(th[i] - th[0]);
  return off;
}

/// Distance (degrees) between an extracted offset vector and a reference row
/// under the quotient by target symmetries, per-vertex basis rotations and one
/// global phase. Infinity when the vertex sets are not congruent.
inline double quotient_distance_deg(const std::vector<double>& extracted, const Chassis& target,
                                    const Chassis& reference, const std::vector<double>& reference_row,
                                    const std::vector<Congruence>& group) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : group) {
    const auto off = transport_offsets(reference, reference_row, target, g);
    best = std::min(best, rad_to_deg(aligned_offset_distance(extracted, off)));
  }
  return best;
}

/// Matching of extracted branches to reference rows given in another frame.
/// Only homochiral branches are eligible, as for the star prediction.
inline MatchReport match_under_symmetry(const BranchModel& extracted, const Chassis& target,
                                        const Chassis& reference,
                                        const std::vector<std::vector<double>>& reference_rows, double tol_deg) {
  if (static_cast<std::size_t>(extracted.N) != target.size() || reference.size() != target.size()) {
    throw std::invalid_argument("chassis sizes differ");
  }
  const auto group = congruences(reference.vertices, target.vertices);
  std::vector<std::vector<double>> cost(extracted.branches.size(), std::vector<double>(reference_rows.size()));
  for (std::size_t e = 0; e < extracted.branches.size(); ++e) {
    const auto& b = extracted.branches[e];
    const bool homochiral = std::all_of(b.chirality.begin(), b.chirality.end(), [](int c) { return c == 1; });
    for (std::size_t r = 0; r < reference_rows.size(); ++r) {
      cost[e][r] = homochiral ? quotient_distance_deg(b.offsets, target, reference, reference_rows[r], group)
                              : std::numeric_limits<double>::infinity();
    }
  }
  return greedy_match(cost, reference_rows.size(), tol_deg);
}

}  // namespace omnitopo

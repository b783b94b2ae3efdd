#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "omnitopo/manifold.hpp"
#include "omnitopo/optimizer.hpp"
#include "omnitopo/phase_topology.hpp"

namespace omnitopo {

enum class LandscapeType { I, II, III, IV_A, IV_B, IV_C };

inline std::string to_string(LandscapeType t) {
  switch (t) {
    case LandscapeType::I: return "Type I";
    case LandscapeType::II: return "Type II";
    case LandscapeType::III: return "Type III";
    case LandscapeType::IV_A: return "Type IV-A";
    case LandscapeType::IV_B: return "Type IV-B";
    case LandscapeType::IV_C: return "Type IV-C";
  }
  return "unknown";
}

struct ClassificationThresholds {
  std::size_t discrete_max_clusters = 10;  // at most this many distinct configurations -> Type I
  std::size_t scattered_min_clusters = 50; // reported only; Type II covers everything above Type I
  double distinct_tol_rad = 1e-3;          // two solutions coincide when every line is this close
  double tangency_tol = 1e-3;              // |d_i . n_i| below this counts as tangent
  double one_d_threshold = 0.999;
  double near_one_d_threshold = 0.99;
  double reject_spread_deg = 30.0;
};

namespace detail {

inline std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace detail

/// Angle between two lines through the origin.
inline double line_angle(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(std::abs(a.dot(b)), 0.0, 1.0));
}

/// Leader clustering in configuration space: a solution joins the first
/// existing representative whose every rotor line lies within tol.
inline std::vector<std::size_t> distinct_configurations(const std::vector<DirectionSet>& sols, double tol_rad) {
  std::vector<std::size_t> reps;
  std::vector<std::size_t> label(sols.size());
  for (std::size_t m = 0; m < sols.size(); ++m) {
    std::optional<std::size_t> hit;
    for (std::size_t r = 0; r < reps.size() && !hit; ++r) {
      const auto& a = sols[reps[r]];
      bool close = true;
      for (std::size_t i = 0; i < a.size() && close; ++i) close = line_angle(a.dirs[i], sols[m].dirs[i]) <= tol_rad;
      if (close) hit = r;
    }
    if (hit) label[m] = *hit;
    else {
      label[m] = reps.size();
      reps.push_back(m);
    }
  }
  return label;
}

inline std::size_t count_distinct(const std::vector<DirectionSet>& sols, double tol_rad) {
  const auto lab = distinct_configurations(sols, tol_rad);
  return lab.empty() ? 0 : *std::max_element(lab.begin(), lab.end()) + 1;
}

struct Classification {
  LandscapeType type = LandscapeType::II;
  std::size_t distinct_configurations = 0;
  double max_tangency = 0.0;
  std::size_t tangent_rotors = 0;  // rotors tangent in every solution
  std::optional<double> leading_variance_fraction;
  std::optional<double> max_spread_deg;
  std::optional<int> K;
  std::string detail;
};

/// Landscape taxonomy from the solution ensemble and, when available, its
/// branch extraction. Type IV requires every rotor tangent in every solution.
inline Classification classify(const Chassis& chassis, const std::vector<DirectionSet>& sols,
                               const BranchExtraction* branches, const ClassificationThresholds& th = {}) {
  Classification c;
  c.distinct_configurations = count_distinct(sols, th.distinct_tol_rad);
  std::vector<double> worst(chassis.size(), 0.0);
  for (const auto& s : sols) {
    const auto r = tangency_per_rotor(chassis, s);
    for (std::size_t i = 0; i < r.size(); ++i) worst[i] = std::max(worst[i], r[i]);
  }
  for (double w : worst) {
    c.max_tangency = std::max(c.max_tangency, w);
    if (w <= th.tangency_tol) ++c.tangent_rotors;
  }
  if (branches) {
    c.leading_variance_fraction = branches->check.leading_variance_fraction;
    c.max_spread_deg = branches->model.max_spread_deg();
  }

  if (c.distinct_configurations <= th.discrete_max_clusters) {
    c.type = LandscapeType::I;
    c.detail = std::to_string(c.distinct_configurations) + " distinct configurations";
    return c;
  }
  if (c.tangent_rotors < chassis.size()) {
    c.type = c.tangent_rotors > 0 ? LandscapeType::III : LandscapeType::II;
    c.detail = std::to_string(c.tangent_rotors) + "/" + std::to_string(chassis.size()) + " rotors tangent";
    return c;
  }
  if (!branches) {
    c.type = LandscapeType::IV_A;
    c.detail = "tangent torus, no branch extraction";
    return c;
  }
  const double frac = branches->check.leading_variance_fraction;
  const bool spread_fail = branches->model.max_spread_deg() > th.reject_spread_deg;
  c.K = branches->model.K();
  if (spread_fail) {
    c.type = LandscapeType::IV_C;
    c.detail = "rejected: spread > " + detail::short_number(th.reject_spread_deg) + "\u00b0";
  } else if (frac >= th.one_d_threshold && !branches->model.any_rejected()) {
    c.type = LandscapeType::IV_B;
    c.detail = "K=" + std::to_string(*c.K);
  } else if (frac >= th.near_one_d_threshold) {
    c.type = LandscapeType::IV_C;
    c.detail = "rejected: leading variance fraction " + detail::short_number(frac) + " < " +
               detail::short_number(th.one_d_threshold);
  } else {
    c.type = LandscapeType::IV_A;
    c.detail = "tangent torus without phase locking";
  }
  return c;
}

}  // namespace omnitopo

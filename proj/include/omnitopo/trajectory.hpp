#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "omnitopo/manifold.hpp"
#include "omnitopo/optimizer.hpp"
#include "omnitopo/serialization.hpp"
#include "omnitopo/wrench.hpp"

namespace omnitopo {

enum class SweepKind { branch, decoherent, random };

inline std::string_view to_string(SweepKind k) {
  switch (k) {
    case SweepKind::branch: return "branch";
    case SweepKind::decoherent: return "decoherent";
    case SweepKind::random: return "random";
  }
  return "unknown";
}

struct SweepRow {
  SweepKind kind = SweepKind::branch;
  double lambda = 0.0;
  DirectionSet dirs;
  MetricReport metrics;
};

/// theta_i(lambda) = chi_i lambda + delta_i at lambda = k pi / steps, k < steps.
inline std::vector<SweepRow> sweep_branch(const Chassis& chassis, const std::vector<double>& offsets,
                                          const std::vector<int>& chirality, int steps, SweepKind kind = SweepKind::branch) {
  require_same_size(chassis, offsets.size());
  if (!chirality.empty()) require_same_size(chassis, chirality.size());
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    const double lam = kPi * k / steps;
    std::vector<double> th(offsets.size());
    for (std::size_t i = 0; i < th.size(); ++i) th[i] = wrap_pi((chirality.empty() ? 1 : chirality[i]) * lam + offsets[i]);
    SweepRow r;
    r.kind = kind;
    r.lambda = lam;
    r.dirs = direction_from_phase(chassis, th);
    r.metrics = evaluate(chassis, r.dirs, chassis.circumradius);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Same sweep with the offsets replaced by seeded uniform constants: still on
/// the tangent torus, but with the phase relations broken.
inline std::vector<SweepRow> sweep_decoherent(const Chassis& chassis, int steps, std::uint64_t seed) {
  std::mt19937_64 rng = sample_stream(seed, 0);
  std::uniform_real_distribution<double> unif(0.0, kPi);
  std::vector<double> off(chassis.size());
  for (auto& o : off) o = unif(rng);
  return sweep_branch(chassis, off, {}, steps, SweepKind::decoherent);
}

/// Uniform random lines, one independent draw per step.
inline std::vector<SweepRow> sweep_random(const Chassis& chassis, int steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  std::vector<SweepRow> rows;
  for (int k = 0; k < steps; ++k) {
    auto rng = sample_stream(seed, static_cast<std::uint64_t>(k) + 1);
    SweepRow r;
    r.kind = SweepKind::random;
    r.lambda = kPi * k / steps;
    r.dirs = canonicalize(random_direction_set(chassis.size(), rng));
    r.metrics = evaluate(chassis, r.dirs, chassis.circumradius);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Largest relative deviation of each singular value from its first-row value.
inline std::vector<double> singular_value_variation(const std::vector<SweepRow>& rows) {
  std::vector<double> v(6, 0.0);
  if (rows.empty()) return v;
  const auto& s0 = rows.front().metrics.singular_values;
  for (const auto& r : rows)
    for (int k = 0; k < 6; ++k) v[static_cast<std::size_t>(k)] = std::max(v[static_cast<std::size_t>(k)], std::abs(r.metrics.singular_values[k] - s0[k]) / s0[k]);
  return v;
}

inline std::string trajectory_csv(const std::vector<SweepRow>& rows, std::size_t n) {
  std::string out = "kind,lambda";
  for (std::size_t i = 1; i <= n; ++i) {
    const auto s = std::to_string(i);
    out += ",d" + s + "x,d" + s + "y,d" + s + "z";
  }
  for (int k = 1; k <= 6; ++k) out += ",sigma_" + std::to_string(k);
  out += ",J_vol,kappa\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.kind)) + "," + fmt_double(r.lambda);
    for (const auto& d : r.dirs.dirs) out += "," + fmt_double(d.x()) + "," + fmt_double(d.y()) + "," + fmt_double(d.z());
    for (int k = 0; k < 6; ++k) out += "," + fmt_double(r.metrics.singular_values[k]);
    out += "," + fmt_double(r.metrics.log_volume) + "," + fmt_double(r.metrics.condition_number) + "\n";
  }
  return out;
}

}  // namespace omnitopo

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "omnitopo/chassis.hpp"
#include "omnitopo/errors.hpp"
#include "omnitopo/manifold.hpp"
#include "omnitopo/wrench.hpp"

namespace omnitopo {

enum class Objective { log_volume, condition_number };

inline std::string_view to_string(Objective o) {
  return o == Objective::log_volume ? "logvol" : "kappa";
}

inline Objective objective_from_string(std::string_view s) {
  if (s == "logvol" || s == "log_volume") return Objective::log_volume;
  if (s == "kappa" || s == "condition_number") return Objective::condition_number;
  throw std::invalid_argument("unknown objective: " + std::string(s));
}

struct SolverConfig {
  int max_iterations = 3000;
  double gradient_tolerance = 1e-6;  // max over rotors of the tangent gradient norm
  double step_tolerance = 1e-13;     // max over rotors of the accepted displacement
  double epsilon = kDefaultEpsilon;
  Objective objective = Objective::log_volume;
  int memory = 10;                   // L-BFGS pairs; 0 gives steepest descent
  double length_ratio = 1.0;         // L_c = length_ratio * circumradius
};

inline void validate_config(const SolverConfig& c) {
  if (c.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(c.gradient_tolerance > 0.0)) throw std::invalid_argument("gradient_tolerance must be > 0");
  if (!(c.step_tolerance > 0.0)) throw std::invalid_argument("step_tolerance must be > 0");
  if (!(c.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (c.memory < 0) throw std::invalid_argument("memory must be >= 0");
  if (!(c.length_ratio > 0.0)) throw std::invalid_argument("length_ratio must be > 0");
}

struct LocalResult {
  DirectionSet dirs;  // canonical
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Objective value and raw gradient for the configured objective.
inline CostAndGradient objective_and_gradient(const Chassis& chassis, const std::vector<Vec3>& d,
                                              const SolverConfig& config) {
  const double L_c = config.length_ratio * chassis.circumradius;
  if (config.objective == Objective::log_volume) {
    return log_volume_and_gradient(chassis, d, L_c, config.epsilon);
  }
  return condition_number_and_gradient(chassis, d, L_c);
}

namespace detail {

using Tangent = std::vector<Vec3>;

inline double dot(const Tangent& a, const Tangent& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

inline void axpy(double alpha, const Tangent& x, Tangent& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Tangent project(const std::vector<Vec3>& at, const Tangent& g) {
  Tangent out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] - g[i].dot(at[i]) * at[i];
  return out;
}

inline double max_block_norm(const Tangent& g) {
  double m = 0.0;
  for (const auto& v : g) m = std::max(m, v.norm());
  return m;
}

inline std::vector<Vec3> retract(const std::vector<Vec3>& x, const Tangent& p, double t) {
  std::vector<Vec3> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] + t * p[i]).normalized();
  return out;
}

}  // namespace detail

/// Riemannian L-BFGS on the product of unit spheres with Armijo backtracking.
/// Retraction is renormalization and vector transport is projection. The cost
/// never increases. Converged means the per-rotor tangent gradient fell below
/// gradient_tolerance or an accepted step moved every rotor by less than
/// step_tolerance; for the log-volume objective a line search that cannot make
/// progress is a zero-length step. The condition number is nonsmooth at its
/// minimizers, so for it a stalled line search is accepted as termination.
inline LocalResult local_minimize(const Chassis& chassis, const DirectionSet& initial,
                                  const SolverConfig& config) {
  validate_config(config);
  require_same_size(chassis, initial.size());
  require_unit_directions(initial);

  std::vector<Vec3> x = initial.dirs;
  for (auto& d : x) d.normalize();
  auto cg = objective_and_gradient(chassis, x, config);
  double f = cg.cost;
  detail::Tangent g = detail::project(x, cg.gradient);

  struct Pair {
    detail::Tangent s, y;
    double rho;
  };
  std::deque<Pair> mem;
  const std::size_t memory = static_cast<std::size_t>(config.memory);
  constexpr double c1 = 1e-4;
  constexpr double max_rotation = 0.5;  // per-rotor cap on |t p_i|, radians-ish
  constexpr int max_backtracks = 60;

  LocalResult res;
  double gnorm = detail::max_block_norm(g);
  double last_t = 1.0;
  int it = 0;
  bool converged = gnorm <= config.gradient_tolerance;
  while (!converged && it < config.max_iterations && std::isfinite(f)) {
    ++it;
    // two-loop recursion
    detail::Tangent p = g;
    std::vector<double> alpha(mem.size());
    for (std::size_t k = mem.size(); k-- > 0;) {
      alpha[k] = mem[k].rho * detail::dot(mem[k].s, p);
      detail::axpy(-alpha[k], mem[k].y, p);
    }
    double gamma = 1.0;
    if (!mem.empty()) gamma = detail::dot(mem.back().s, mem.back().y) / detail::dot(mem.back().y, mem.back().y);
    for (auto& v : p) v *= gamma;
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double beta = mem[k].rho * detail::dot(mem[k].y, p);
      detail::axpy(alpha[k] - beta, mem[k].s, p);
    }
    p = detail::project(x, p);
    for (auto& v : p) v = -v;

    double slope = detail::dot(g, p);
    if (!(slope < 0.0)) {
      mem.clear();
      p = g;
      for (auto& v : p) v = -v;
      slope = detail::dot(g, p);
    }

    double t = mem.empty() ? std::min(1.0, 2.0 * last_t) : 1.0;
    const double pmax = detail::max_block_norm(p);
    if (t * pmax > max_rotation) t = max_rotation / pmax;

    std::vector<Vec3> xn;
    CostAndGradient cgn;
    bool accepted = false;
    for (int bt = 0; bt < max_backtracks; ++bt) {
      xn = detail::retract(x, p, t);
      cgn = objective_and_gradient(chassis, xn, config);
      if (std::isfinite(cgn.cost) && cgn.cost <= f + c1 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!mem.empty()) {  // retry once along the steepest descent
        mem.clear();
        --it;
        continue;
      }
      converged = config.objective == Objective::condition_number || gnorm <= 1e3 * config.gradient_tolerance;
      break;
    }

    double disp = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) disp = std::max(disp, (xn[i] - x[i]).norm());

    detail::Tangent gn = detail::project(xn, cgn.gradient);
    if (memory > 0) {
      detail::Tangent s(x.size()), y(x.size());
      const detail::Tangent g_old = detail::project(xn, g);
      for (std::size_t i = 0; i < x.size(); ++i) {
        s[i] = xn[i] - x[i];
        s[i] -= s[i].dot(xn[i]) * xn[i];
        y[i] = gn[i] - g_old[i];
      }
      const double sy = detail::dot(s, y);
      if (sy > 1e-12 * std::sqrt(detail::dot(s, s) * detail::dot(y, y)) && sy > 0.0) {
        mem.push_back({std::move(s), std::move(y), 1.0 / sy});
        if (mem.size() > memory) mem.pop_front();
      }
    }

    x = std::move(xn);
    f = cgn.cost;
    g = std::move(gn);
    gnorm = detail::max_block_norm(g);
    last_t = t;

    if (gnorm <= config.gradient_tolerance) converged = true;
    else if (disp < config.step_tolerance) converged = true;
  }

  res.dirs.dirs.reserve(x.size());
  for (const auto& d : x) res.dirs.dirs.push_back(canonicalize(d));
  res.cost = f;
  res.converged = converged;
  res.iterations = it;
  res.gradient_norm = gnorm;
  return res;
}

/// Normalized standard 3-variate Gaussian; uniform on the sphere.
template <class Rng>
Vec3 uniform_sphere_sample(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Vec3 v(gauss(rng), gauss(rng), gauss(rng));
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

/// Independent stream for sample `index` of a run seeded with `seed`.
inline std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index & 0xffffffffu), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

inline DirectionSet random_direction_set(std::size_t n, std::mt19937_64& rng) {
  DirectionSet s;
  s.dirs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.dirs.push_back(uniform_sphere_sample(rng));
  return s;
}

/// One local refinement per sample from a uniform start. Result k depends only
/// on (chassis, seed, k, config), so the thread count does not change output.
inline std::vector<LocalResult> multistart(const Chassis& chassis, int samples, std::uint64_t seed,
                                           const SolverConfig& config, unsigned threads = 1) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  validate_config(config);
  std::vector<LocalResult> out(static_cast<std::size_t>(samples));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next.fetch_add(1); k < samples; k = next.fetch_add(1)) {
      auto rng = sample_stream(seed, static_cast<std::uint64_t>(k));
      out[static_cast<std::size_t>(k)] =
          local_minimize(chassis, random_direction_set(chassis.size(), rng), config);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(samples)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

struct Solution {
  DirectionSet dirs;
  double cost = 0.0;
};

struct SolutionSet {
  std::vector<Solution> solutions;  // cost ascending, then lexicographic
  std::string chassis_id;
  double J_min = 0.0;
  double prune_tolerance = 1e-6;
  std::uint64_t rng_seed = 0;
  int samples_requested = 0;
  int converged_count = 0;
  SolverConfig config;

  std::size_t size() const { return solutions.size(); }
};

inline constexpr double kDefaultPruneTolerance = 1e-6;

/// Drops non-converged runs, keeps costs within prune_tolerance of the best,
/// and orders the survivors by cost then coordinates.
inline SolutionSet prune_results(const Chassis& chassis, const std::vector<LocalResult>& runs,
                                 double prune_tolerance, std::uint64_t seed, const SolverConfig& config) {
  if (!(prune_tolerance >= 0.0)) throw std::invalid_argument("prune tolerance must be >= 0");
  SolutionSet set;
  set.chassis_id = chassis.id;
  set.prune_tolerance = prune_tolerance;
  set.rng_seed = seed;
  set.samples_requested = static_cast<int>(runs.size());
  set.config = config;
  double jmin = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    if (r.converged && std::isfinite(r.cost)) {
      ++set.converged_count;
      jmin = std::min(jmin, r.cost);
    }
  }
  if (set.converged_count == 0) throw EmptyResultError("no local refinement converged for chassis " + chassis.id);
  set.J_min = jmin;
  for (const auto& r : runs) {
    if (r.converged && std::isfinite(r.cost) && r.cost <= jmin + prune_tolerance) {
      set.solutions.push_back({r.dirs, r.cost});
    }
  }
  std::stable_sort(set.solutions.begin(), set.solutions.end(), [](const Solution& a, const Solution& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return lex_less(a.dirs, b.dirs);
  });
  return set;
}

/// Global exhaustion: uniform multistart, local refinement, canonical mapping
/// and pruning to the near-optimal level set.
inline SolutionSet global_exhaust(const Chassis& chassis, int samples, double prune_tolerance, std::uint64_t seed,
                                  const SolverConfig& config = {}, unsigned threads = 1) {
  return prune_results(chassis, multistart(chassis, samples, seed, config, threads), prune_tolerance, seed, config);
}

}  // namespace omnitopo

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "omnitopo/angles.hpp"
#include "omnitopo/phase_topology.hpp"

namespace omnitopo {

struct StarBranch {
  int q = 0;
  std::vector<double> offsets;        // radians in [0, pi)
  std::vector<int> offset_numerators; // offsets[v] = offset_numerators[v] * pi / N
};

struct StarPrediction {
  int N = 0;
  std::vector<StarBranch> branches;   // q ascending
  std::string note;                   // set when no density is admissible

  int K() const { return static_cast<int>(branches.size()); }
};

/// Admissible star densities 2 < q < N - 2.
inline std::vector<int> valid_densities(int N) {
  std::vector<int> q;
  for (int k = 3; k <= N - 3; ++k) q.push_back(k);
  return q;
}

/// Branch for density q: delta_v = (v - 1) q pi / N mod pi, v = 1..N.
inline StarPrediction star_polygon_predict(int N) {
  if (N < 1) throw std::invalid_argument("star_polygon_predict needs N >= 1");
  StarPrediction p;
  p.N = N;
  if (N < 6) {
    p.note = "Q_valid empty for N = " + std::to_string(N) + " (needs N >= 6)";
    return p;
  }
  for (int q : valid_densities(N)) {
    StarBranch b;
    b.q = q;
    for (int v = 0; v < N; ++v) {
      const int r = static_cast<int>((static_cast<long long>(v) * q) % N);
      b.offset_numerators.push_back(r);
      b.offsets.push_back(kPi * r / N);
    }
    p.branches.push_back(std::move(b));
  }
  return p;
}

/// Smallest achievable max_i geodesic(a_i - b_i - c) over a global constant c,
/// in radians. The differences live on the circle of period pi; the optimum
/// centres c on the shortest arc that covers all of them.
inline double aligned_offset_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("offset vectors differ in length");
  if (a.empty()) return 0.0;
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = wrap_pi(a[i] - b[i]);
  std::sort(d.begin(), d.end());
  double gap = d.front() + kPi - d.back();
  for (std::size_t i = 1; i < d.size(); ++i) gap = std::max(gap, d[i] - d[i - 1]);
  return 0.5 * (kPi - gap);
}

struct BranchMatch {
  std::size_t extracted = 0;
  std::size_t predicted = 0;
  double cost_deg = 0.0;
};

struct MatchReport {
  std::vector<BranchMatch> matches;
  std::vector<std::size_t> unmatched_extracted;
  std::vector<std::size_t> unmatched_predicted;

  bool complete() const { return unmatched_extracted.empty() && unmatched_predicted.empty(); }
  double max_cost_deg() const {
    double m = 0.0;
    for (const auto& x : matches) m = std::max(m, x.cost_deg);
    return m;
  }
};

/// Greedy assignment on a cost matrix (degrees): repeatedly take the cheapest
/// remaining pair within tol_deg. Ties go to the lower indices.
inline MatchReport greedy_match(const std::vector<std::vector<double>>& cost_deg, std::size_t n_pred, double tol_deg) {
  const std::size_t n_ext = cost_deg.size();
  std::vector<bool> used_e(n_ext, false), used_p(n_pred, false);
  MatchReport rep;
  for (;;) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t be = 0, bp = 0;
    for (std::size_t e = 0; e < n_ext; ++e) {
      if (used_e[e]) continue;
      for (std::size_t p = 0; p < n_pred; ++p) {
        if (!used_p[p] && cost_deg[e][p] < best) {
          best = cost_deg[e][p];
          be = e;
          bp = p;
        }
      }
    }
    if (!(best <= tol_deg)) break;
    used_e[be] = used_p[bp] = true;
    rep.matches.push_back({be, bp, best});
  }
  for (std::size_t e = 0; e < n_ext; ++e)
    if (!used_e[e]) rep.unmatched_extracted.push_back(e);
  for (std::size_t p = 0; p < n_pred; ++p)
    if (!used_p[p]) rep.unmatched_predicted.push_back(p);
  return rep;
}

/// Matches offset vectors modulo one global phase per pair.
inline MatchReport match_offsets(const std::vector<std::vector<double>>& extracted,
                                 const std::vector<std::vector<double>>& predicted, double tol_deg) {
  std::vector<std::vector<double>> cost(extracted.size(), std::vector<double>(predicted.size()));
  for (std::size_t e = 0; e < extracted.size(); ++e)
    for (std::size_t p = 0; p < predicted.size(); ++p)
      cost[e][p] = rad_to_deg(aligned_offset_distance(extracted[e], predicted[p]));
  return greedy_match(cost, predicted.size(), tol_deg);
}

/// Polygon matching of extracted branches against the star prediction. A
/// branch with any reversed rotor cannot match, since every star branch is
/// homochiral.
inline MatchReport match_branches(const BranchModel& extracted, const StarPrediction& predicted, double tol_deg) {
  if (extracted.N != predicted.N) throw std::invalid_argument("branch model and prediction differ in N");
  std::vector<std::vector<double>> cost(extracted.branches.size(),
                                        std::vector<double>(predicted.branches.size()));
  for (std::size_t e = 0; e < extracted.branches.size(); ++e) {
    const auto& b = extracted.branches[e];
    const bool homochiral = std::all_of(b.chirality.begin(), b.chirality.end(), [](int c) { return c == 1; });
    for (std::size_t p = 0; p < predicted.branches.size(); ++p) {
      cost[e][p] = homochiral ? rad_to_deg(aligned_offset_distance(b.offsets, predicted.branches[p].offsets))
                              : std::numeric_limits<double>::infinity();
    }
  }
  return greedy_match(cost, predicted.branches.size(), tol_deg);
}

inline MatchReport match_branches(const StarPrediction& a, const StarPrediction& b, double tol_deg) {
  if (a.N != b.N) throw std::invalid_argument("predictions differ in N");
  std::vector<std::vector<double>> ea, eb;
  for (const auto& x : a.branches) ea.push_back(x.offsets);
  for (const auto& x : b.branches) eb.push_back(x.offsets);
  return match_offsets(ea, eb, tol_deg);
}

/// Writes q_match into every matched branch.
inline void annotate_q(BranchModel& model, const StarPrediction& predicted, const MatchReport& report) {
  for (auto& b : model.branches) b.q_match.reset();
  for (const auto& m : report.matches) model.branches[m.extracted].q_match = predicted.branches[m.predicted].q;
}

}  // namespace omnitopo

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "omnitopo/angles.hpp"
#include "omnitopo/dbscan.hpp"
#include "omnitopo/errors.hpp"
#include "omnitopo/manifold.hpp"
#include "omnitopo/optimizer.hpp"

namespace omnitopo {

/// M x N intrinsic phases, one row per solution, entries in [0, pi) until
/// unwrapped.
using PhaseMatrix = Eigen::MatrixXd;

struct PhaseTable {
  PhaseMatrix theta;
  std::vector<double> residual;  // per row, max_i |d_i . n_i|
};

inline PhaseTable phase_table(const Chassis& chassis, const std::vector<DirectionSet>& solutions) {
  PhaseTable t;
  t.theta.resize(static_cast<Eigen::Index>(solutions.size()), static_cast<Eigen::Index>(chassis.size()));
  t.residual.reserve(solutions.size());
  for (std::size_t m = 0; m < solutions.size(); ++m) {
    const auto ext = phase_from_direction(chassis, solutions[m]);
    for (std::size_t i = 0; i < ext.theta.size(); ++i) {
      t.theta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = ext.theta[i];
    }
    t.residual.push_back(ext.residual);
  }
  return t;
}

inline PhaseTable phase_table(const Chassis& chassis, const SolutionSet& set) {
  std::vector<DirectionSet> dirs;
  dirs.reserve(set.size());
  for (const auto& s : set.solutions) dirs.push_back(s.dirs);
  return phase_table(chassis, dirs);
}

/// Lifts each column to the covering space R by continuity along the rows
/// sorted by `key` (ascending, stable). The first row in that order keeps its
/// value; every later entry is shifted by a multiple of pi to land within pi/2
/// of its predecessor. The result reduces mod pi to the input.
inline PhaseMatrix unwrap_projective(const PhaseMatrix& phases, const std::vector<double>& key) {
  const Eigen::Index m = phases.rows();
  if (static_cast<Eigen::Index>(key.size()) != m) throw std::invalid_argument("unwrap key size mismatch");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)];
  });
  PhaseMatrix out = phases;
  for (Eigen::Index c = 0; c < phases.cols(); ++c) {
    for (std::size_t k = 1; k < order.size(); ++k) {
      const double prev = out(order[k - 1], c);
      const double cur = phases(order[k], c);
      out(order[k], c) = cur + kPi * std::round((prev - cur) / kPi);
    }
  }
  return out;
}

/// Rotor 1's phase measured from the end of its largest circular gap, so a
/// cloud that straddles 0 = pi is ordered contiguously.
inline std::vector<double> reference_key(const PhaseMatrix& phases) {
  std::vector<double> key(static_cast<std::size_t>(phases.rows()));
  if (phases.rows() == 0 || phases.cols() == 0) return key;
  std::vector<double> sorted(key.size());
  for (Eigen::Index r = 0; r < phases.rows(); ++r) sorted[static_cast<std::size_t>(r)] = phases(r, 0);
  std::sort(sorted.begin(), sorted.end());
  double start = sorted.front(), gap = sorted.front() + kPi - sorted.back();
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k] - sorted[k - 1] > gap) {
      gap = sorted[k] - sorted[k - 1];
      start = sorted[k];
    }
  }
  for (Eigen::Index r = 0; r < phases.rows(); ++r) key[static_cast<std::size_t>(r)] = wrap_pi(phases(r, 0) - start);
  return key;
}

/// Unwrap ordered by rotor 1's phase.
inline PhaseMatrix unwrap_projective(const PhaseMatrix& phases) {
  return unwrap_projective(phases, reference_key(phases));
}

/// o_m = (theta_{m,i} - theta_{m,1}) mod pi; the first entry is always 0.
inline PhaseMatrix offset_vectors(const PhaseMatrix& phases) {
  PhaseMatrix o(phases.rows(), phases.cols());
  for (Eigen::Index r = 0; r < phases.rows(); ++r) {
    for (Eigen::Index c = 0; c < phases.cols(); ++c) o(r, c) = wrap_pi(phases(r, c) - phases(r, 0));
  }
  return o;
}

struct ClusteringOptions {
  double eps_deg = 5.0;       // per-coordinate neighbourhood radius
  std::size_t min_points = 5;
  double reject_spread_deg = 30.0;
  double one_d_threshold = 0.999;
};

/// Density clustering of offset vectors under the Chebyshev geodesic metric on
/// the projective torus.
inline DbscanResult cluster_offsets(const PhaseMatrix& offsets, const ClusteringOptions& opt = {}) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(offsets.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  auto dist = [&](Eigen::Index a, Eigen::Index b) {
    double d = 0.0;
    for (Eigen::Index c = 1; c < offsets.cols(); ++c) d = std::max(d, geodesic_pi(offsets(a, c), offsets(b, c)));
    return d;
  };
  return dbscan(rows, deg_to_rad(opt.eps_deg), opt.min_points, dist);
}

struct OneDCheck {
  bool is_1d = false;
  double leading_variance_fraction = 0.0;
  std::vector<double> lambda;  // per row; NaN for noise rows
};

namespace detail {

inline std::vector<std::vector<Eigen::Index>> groups(const std::vector<int>& labels, int count) {
  std::vector<std::vector<Eigen::Index>> g(static_cast<std::size_t>(count));
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] >= 0) g[static_cast<std::size_t>(labels[r])].push_back(static_cast<Eigen::Index>(r));
  }
  return g;
}

inline PhaseMatrix rows_of(const PhaseMatrix& p, const std::vector<Eigen::Index>& idx) {
  PhaseMatrix out(static_cast<Eigen::Index>(idx.size()), p.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = p.row(idx[k]);
  return out;
}

}  // namespace detail

/// PCA of the unwrapped phases after subtracting each cluster's own centroid,
/// so that parallel branches pool into one direction of variation. The leading
/// fraction is the summed top eigenvalue of each cluster's covariance over the
/// pooled total variance. lambda is the cluster's first principal score scaled
/// so rotor 1 moves with slope +1 (the largest-moving rotor when rotor 1 is
/// static). An empty label vector means one cluster holding every row.
inline OneDCheck check_1d_manifold(const PhaseMatrix& phases, std::vector<int> labels = {},
                                   double threshold = 0.999) {
  const Eigen::Index m = phases.rows(), n = phases.cols();
  if (labels.empty()) labels.assign(static_cast<std::size_t>(m), 0);
  if (static_cast<Eigen::Index>(labels.size()) != m) throw std::invalid_argument("label count mismatch");
  const int count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  const auto g = detail::groups(labels, count);
  std::size_t used = 0;
  for (const auto& rows : g) used += rows.size();
  if (used < static_cast<std::size_t>(std::max<Eigen::Index>(n, 2))) {
    throw InsufficientDataError("1D manifold check needs at least " + std::to_string(n) + " clustered rows, got " +
                                std::to_string(used));
  }
  OneDCheck out;
  out.lambda.assign(static_cast<std::size_t>(m), std::numeric_limits<double>::quiet_NaN());
  double top = 0.0, total = 0.0;
  for (const auto& rows : g) {
    if (rows.empty()) continue;
    const PhaseMatrix lifted = unwrap_projective(detail::rows_of(phases, rows));
    const Eigen::RowVectorXd mean = lifted.colwise().mean();
    const Eigen::MatrixXd centered = lifted.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    top += ev[n - 1];
    total += ev.sum();
    Eigen::VectorXd v1 = es.eigenvectors().col(n - 1);
    Eigen::Index pivot = 0;
    if (std::abs(v1[0]) < 1e-3) v1.cwiseAbs().maxCoeff(&pivot);
    const Eigen::VectorXd scores = centered * v1;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      // x ~ lambda * v1 / v1[pivot]
      out.lambda[static_cast<std::size_t>(rows[k])] = scores[static_cast<Eigen::Index>(k)] * v1[pivot];
    }
  }
  out.leading_variance_fraction = total > 0.0 ? top / total : 1.0;
  out.is_1d = out.leading_variance_fraction >= threshold;
  return out;
}

struct Branch {
  std::vector<double> offsets;   // delta_i in [0, pi), delta_1 = 0
  std::vector<int> chirality;    // chi_i in {-1, +1}, chi_1 = +1
  std::vector<double> slopes;    // least-squares slope of theta_i against lambda
  std::vector<std::pair<int, int>> rational_offsets;  // delta_i ~ num/den * pi
  double spread_deg = 0.0;
  double max_fit_error_deg = 0.0;
  std::size_t members = 0;
  int cluster = -1;              // DBSCAN label
  bool rejected = false;         // spread above the quality gate
  std::optional<int> q_match;    // star density, when matched
};

struct BranchModel {
  int N = 0;
  std::vector<Branch> branches;  // ordered by delta_2

  int K() const { return static_cast<int>(branches.size()); }
  bool any_rejected() const {
    return std::any_of(branches.begin(), branches.end(), [](const Branch& b) { return b.rejected; });
  }
  double max_spread_deg() const {
    double s = 0.0;
    for (const auto& b : branches) s = std::max(s, b.spread_deg);
    return s;
  }
};

struct RationalFit {
  int numerator = 0;
  int denominator = 1;
  double error_deg = 0.0;
};

inline constexpr double kRationalFallbackDeg = 2.0;

/// Nearest fraction r/N of pi first; when that misses by more than the
/// fallback threshold, the best reduced fraction with denominator 2..12.
inline RationalFit rational_fit(double delta, int N, double fallback_deg = kRationalFallbackDeg) {
  if (N < 3) throw std::invalid_argument("rational_fit needs N >= 3");
  auto err_deg = [&](int r, int d) { return rad_to_deg(geodesic_pi(delta, kPi * r / d)); };
  RationalFit best{0, N, err_deg(0, N)};
  for (int r = 1; r < N; ++r) {
    const double e = err_deg(r, N);
    if (e < best.error_deg) best = {r, N, e};
  }
  if (best.error_deg > fallback_deg) {
    for (int d = 2; d <= 12; ++d) {
      for (int r = 0; r < d; ++r) {
        const double e = err_deg(r, d);
        if (e < best.error_deg - 1e-12) best = {r, d, e};
      }
    }
    const int g = std::gcd(best.numerator, best.denominator);
    if (g > 1) {
      best.numerator /= g;
      best.denominator /= g;
    }
  }
  return best;
}

/// Per cluster and rotor: chirality from the least-squares slope of the lifted
/// phase against lambda, offset as the circular mean of theta_i - chi_i lambda,
/// then re-based so delta_1 = 0. Spread is the RMS over members of the
/// geodesic distance between offset vectors and their circular mean.
inline BranchModel cluster_branches(const PhaseMatrix& phases, const std::vector<int>& labels,
                                    const std::vector<double>& lambda, const ClusteringOptions& opt = {}) {
  const Eigen::Index m = phases.rows(), n = phases.cols();
  if (static_cast<Eigen::Index>(labels.size()) != m || static_cast<Eigen::Index>(lambda.size()) != m) {
    throw std::invalid_argument("cluster_branches size mismatch");
  }
  const int count = m == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  if (count <= 0) throw EmptyResultError("density clustering found no branches");
  const auto g = detail::groups(labels, count);
  const PhaseMatrix offsets = offset_vectors(phases);

  BranchModel model;
  model.N = static_cast<int>(n);
  for (int c = 0; c < count; ++c) {
    const auto& rows = g[static_cast<std::size_t>(c)];
    const PhaseMatrix lifted = unwrap_projective(detail::rows_of(phases, rows));
    Eigen::VectorXd lam(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) lam[static_cast<Eigen::Index>(k)] = lambda[static_cast<std::size_t>(rows[k])];
    const double lam_mean = lam.mean();
    const Eigen::VectorXd lc = lam.array() - lam_mean;
    const double sxx = lc.squaredNorm();

    Branch b;
    b.members = rows.size();
    b.cluster = c;
    std::vector<double> raw(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd y = lifted.col(i);
      const double slope = sxx > 0.0 ? lc.dot(y.array().matrix() - Eigen::VectorXd::Constant(y.size(), y.mean())) / sxx : 0.0;
      const int chi = slope < 0.0 ? -1 : 1;
      std::vector<double> resid(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        resid[k] = phases(rows[k], i) - chi * lam[static_cast<Eigen::Index>(k)];
      }
      b.slopes.push_back(slope);
      b.chirality.push_back(chi);
      raw[static_cast<std::size_t>(i)] = circular_mean_pi(resid);
    }
    // re-base the free lambda origin so that delta_1 = 0
    const double d1 = raw[0];
    for (Eigen::Index i = 0; i < n; ++i) {
      b.offsets.push_back(i == 0 ? 0.0 : wrap_pi(raw[static_cast<std::size_t>(i)] - b.chirality[static_cast<std::size_t>(i)] * d1));
    }

    std::vector<double> mu(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 1; i < n; ++i) {
      std::vector<double> col(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) col[k] = offsets(rows[k], i);
      mu[static_cast<std::size_t>(i)] = circular_mean_pi(col);
    }
    double ss = 0.0;
    for (auto r : rows) {
      for (Eigen::Index i = 1; i < n; ++i) {
        const double d = geodesic_pi(offsets(r, i), mu[static_cast<std::size_t>(i)]);
        ss += d * d;
      }
    }
    b.spread_deg = rows.empty() ? 0.0 : rad_to_deg(std::sqrt(ss / static_cast<double>(rows.size())));
    b.rejected = b.spread_deg > opt.reject_spread_deg;

    for (double d : b.offsets) {
      const auto f = rational_fit(d, static_cast<int>(n));
      b.rational_offsets.emplace_back(f.numerator, f.denominator);
      b.max_fit_error_deg = std::max(b.max_fit_error_deg, f.error_deg);
    }
    model.branches.push_back(std::move(b));
  }
  std::stable_sort(model.branches.begin(), model.branches.end(), [](const Branch& a, const Branch& b) {
    const double a2 = a.offsets.size() > 1 ? a.offsets[1] : 0.0;
    const double b2 = b.offsets.size() > 1 ? b.offsets[1] : 0.0;
    return a2 < b2;
  });
  return model;
}

struct BranchExtraction {
  PhaseMatrix offsets;
  DbscanResult clusters;
  OneDCheck check;
  BranchModel model;
  std::size_t noise = 0;
};

/// Offsets, density clustering, pooled 1D check and per-branch regression.
inline BranchExtraction extract_branches(const PhaseMatrix& phases, const ClusteringOptions& opt = {}) {
  BranchExtraction ex;
  ex.offsets = offset_vectors(phases);
  ex.clusters = cluster_offsets(ex.offsets, opt);
  ex.noise = static_cast<std::size_t>(std::count(ex.clusters.labels.begin(), ex.clusters.labels.end(), kNoise));
  if (ex.clusters.cluster_count == 0) throw EmptyResultError("density clustering found no branches");
  ex.check = check_1d_manifold(phases, ex.clusters.labels, opt.one_d_threshold);
  ex.model = cluster_branches(phases, ex.clusters.labels, ex.check.lambda, opt);
  return ex;
}

}  // namespace omnitopo

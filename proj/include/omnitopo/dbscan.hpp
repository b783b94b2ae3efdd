#pragma once

#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

namespace omnitopo {

inline constexpr int kNoise = -1;

struct DbscanResult {
  std::vector<int> labels;  // kNoise or a cluster id in [0, cluster_count)
  int cluster_count = 0;
};

/// Classic DBSCAN over an arbitrary metric. Points are visited in index order
/// and clusters are numbered in order of their first core point, so the
/// labelling is a pure function of the input order. A point is a core point
/// when at least min_points points (itself included) lie within eps.
/// Neighbourhoods are found by brute force, O(M^2) distance calls.
template <class Point, class Distance>
DbscanResult dbscan(const std::vector<Point>& points, double eps, std::size_t min_points, Distance dist) {
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan eps must be positive");
  if (min_points < 1) throw std::invalid_argument("dbscan min_points must be >= 1");
  const std::size_t m = points.size();
  constexpr int kUnvisited = -2;
  DbscanResult res;
  res.labels.assign(m, kUnvisited);

  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < m; ++j) {
      if (dist(points[i], points[j]) <= eps) out.push_back(j);
    }
    return out;
  };

  for (std::size_t i = 0; i < m; ++i) {
    if (res.labels[i] != kUnvisited) continue;
    auto seeds = neighbours(i);
    if (seeds.size() < min_points) {
      res.labels[i] = kNoise;
      continue;
    }
    const int c = res.cluster_count++;
    res.labels[i] = c;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      if (res.labels[j] == kNoise) res.labels[j] = c;  // border point
      if (res.labels[j] != kUnvisited) continue;
      res.labels[j] = c;
      auto nb = neighbours(j);
      if (nb.size() >= min_points) queue.insert(queue.end(), nb.begin(), nb.end());
    }
  }
  return res;
}

}  // namespace omnitopo

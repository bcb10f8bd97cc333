#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gestalt/geometry.hpp"

namespace gestalt {

struct Dbscan1dResult {
  std::vector<std::vector<WidgetId>> clusters;  // ordered by smallest value
  std::vector<WidgetId> outliers;
};

// DBSCAN over scalars. A point is core when at least `min_pts` points (itself
// included) lie within `eps`. On the line, two consecutive cores are
// density-connected iff they are within eps of each other. A border point joins
// the cluster of its nearest core (the lower one on a tie). Members are ordered
// by (value, id).
inline Dbscan1dResult dbscan_1d(std::vector<std::pair<WidgetId, double>> values, double eps,
                                int min_pts) {
  if (!(eps > 0)) throw std::invalid_argument("dbscan_1d: eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan_1d: min_pts must be >= 1");
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  const std::size_t n = values.size();
  std::vector<bool> core(n, false);
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (values[i].second - values[lo].second > eps) ++lo;
    if (hi < i) hi = i;
    while (hi + 1 < n && values[hi + 1].second - values[i].second <= eps) ++hi;
    core[i] = static_cast<int>(hi - lo + 1) >= min_pts;
  }

  std::vector<int> cluster_of(n, -1);
  int clusters = 0;
  long prev_core = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    if (prev_core < 0 ||
        values[i].second - values[static_cast<std::size_t>(prev_core)].second > eps) {
      ++clusters;
    }
    cluster_of[i] = clusters - 1;
    prev_core = static_cast<long>(i);
  }
  // Border points: nearest core on either side.
  long last_core = -1;
  std::vector<long> next_core(n, -1);
  for (long i = static_cast<long>(n) - 1, nxt = -1; i >= 0; --i) {
    next_core[static_cast<std::size_t>(i)] = nxt;
    if (core[static_cast<std::size_t>(i)]) nxt = i;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      last_core = static_cast<long>(i);
      continue;
    }
    const double v = values[i].second;
    double best = eps;
    int chosen = -1;
    if (last_core >= 0) {
      const double d = v - values[static_cast<std::size_t>(last_core)].second;
      if (d <= best) {
        best = d;
        chosen = cluster_of[static_cast<std::size_t>(last_core)];
      }
    }
    if (const long nc = next_core[i]; nc >= 0) {
      const double d = values[static_cast<std::size_t>(nc)].second - v;
      if (d <= eps && (chosen < 0 || d < best)) chosen = cluster_of[static_cast<std::size_t>(nc)];
    }
    cluster_of[i] = chosen;
  }

  Dbscan1dResult out;
  out.clusters.resize(static_cast<std::size_t>(clusters));
  for (std::size_t i = 0; i < n; ++i) {
    if (cluster_of[i] < 0) {
      out.outliers.push_back(values[i].first);
    } else {
      out.clusters[static_cast<std::size_t>(cluster_of[i])].push_back(values[i].first);
    }
  }
  return out;
}

}  // namespace gestalt

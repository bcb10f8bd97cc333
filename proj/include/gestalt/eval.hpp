#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gestalt/hierarchy.hpp"
#include "gestalt/metrics.hpp"

namespace gestalt {

// Token-level Levenshtein distance with unit costs.
inline std::size_t edit_distance(const TokenSeq& a, const TokenSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Minimum-cost perfect assignment on a square matrix (shortest augmenting
// paths with potentials). Returns the column assigned to every row.
inline std::vector<std::size_t> solve_assignment(const std::vector<std::vector<std::int64_t>>& cost) {
  const std::size_t n = cost.size();
  for (const auto& row : cost) {
    if (row.size() != n) throw std::invalid_argument("solve_assignment: matrix must be square");
  }
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1), v(n + 1);
  std::vector<std::size_t> p(n + 1), way(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<std::int64_t> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      std::int64_t delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const std::int64_t c = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (c < minv[j]) {
          minv[j] = c;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

struct BlockMatch {
  std::size_t gt = 0;
  std::size_t pred = 0;
  std::size_t distance = 0;
  friend bool operator==(const BlockMatch&, const BlockMatch&) = default;
};

struct MatchReport {
  std::size_t threshold = 0;
  std::vector<BlockMatch> matches;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  Scores scores;
};

// Pairs within `threshold` (inclusive) are candidates. The assignment first
// maximises the number of matched blocks, then minimises their total distance.
inline MatchReport match_blocks(const std::vector<TokenSeq>& gt, const std::vector<TokenSeq>& pred,
                                std::size_t threshold) {
  MatchReport r;
  r.threshold = threshold;
  const std::size_t n = std::max(gt.size(), pred.size());
  if (n > 0) {
    std::vector<std::vector<std::size_t>> dist(gt.size(), std::vector<std::size_t>(pred.size()));
    std::size_t total = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      for (std::size_t j = 0; j < pred.size(); ++j) {
        dist[i][j] = edit_distance(gt[i], pred[j]);
        if (dist[i][j] <= threshold) total += dist[i][j];
      }
    }
    // A non-match costs more than any full set of candidate distances, so one
    // extra match always outweighs any distance saving.
    const auto miss = static_cast<std::int64_t>(total + 1);
    std::vector<std::vector<std::int64_t>> cost(n, std::vector<std::int64_t>(n, miss));
    for (std::size_t i = 0; i < gt.size(); ++i) {
      for (std::size_t j = 0; j < pred.size(); ++j) {
        if (dist[i][j] <= threshold) cost[i][j] = static_cast<std::int64_t>(dist[i][j]);
      }
    }
    const auto assign = solve_assignment(cost);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const std::size_t j = assign[i];
      if (j < pred.size() && dist[i][j] <= threshold) r.matches.push_back({i, j, dist[i][j]});
    }
  }
  r.tp = r.matches.size();
  r.fp = pred.size() - r.tp;
  r.fn = gt.size() - r.tp;
  r.scores = metrics(r.tp, r.fp, r.fn);
  return r;
}

inline std::size_t total_distance(const MatchReport& r) {
  std::size_t d = 0;
  for (const auto& m : r.matches) d += m.distance;
  return d;
}

}  // namespace gestalt

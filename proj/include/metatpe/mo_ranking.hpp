#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "metatpe/errors.hpp"

namespace metatpe {

enum class Direction { minimize, maximize };

// An objective vector. `directions` may be empty, which means every objective
// is minimized; this is the normal internal state since benchmark lookup
// negates maximized objectives up front.
struct ObjectiveVector {
  std::vector<double> values;
  std::vector<Direction> directions;

  ObjectiveVector() = default;
  ObjectiveVector(std::initializer_list<double> v) : values(v) {}
  explicit ObjectiveVector(std::vector<double> v) : values(std::move(v)) {}
  ObjectiveVector(std::vector<double> v, std::vector<Direction> dirs)
      : values(std::move(v)), directions(std::move(dirs)) {}

  std::size_t size() const { return values.size(); }

  // Value with maximize objectives negated, so smaller is always better.
  double minimized(std::size_t m) const {
    if (!directions.empty() && directions[m] == Direction::maximize) return -values[m];
    return values[m];
  }
};

namespace detail {

inline std::vector<std::vector<double>> to_minimized(const std::vector<ObjectiveVector>& objs) {
  std::vector<std::vector<double>> out(objs.size());
  if (objs.empty()) return out;
  const std::size_t m = objs.front().size();
  for (std::size_t i = 0; i < objs.size(); ++i) {
    if (objs[i].size() != m)
      throw ShapeError("objective vectors of mixed dimension (" + std::to_string(m) + " vs " +
                       std::to_string(objs[i].size()) + ")");
    out[i].resize(m);
    for (std::size_t k = 0; k < m; ++k) out[i][k] = objs[i].minimized(k);
  }
  return out;
}

// a dominates b: a <= b componentwise with at least one strict.
inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
    if (a[k] < b[k]) strict = true;
  }
  return strict;
}

}  // namespace detail

// Fast non-dominated sort. Rank 0 is the nondominated set; rank r is
// nondominated once ranks < r are removed. Duplicates share a rank.
inline std::vector<int> nondomination_rank(const std::vector<ObjectiveVector>& objs) {
  const auto vals = detail::to_minimized(objs);
  const std::size_t n = vals.size();
  std::vector<int> rank(n, 0);
  if (n == 0) return rank;

  std::vector<int> domination_count(n, 0);
  std::vector<std::vector<std::size_t>> dominated_by(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (detail::dominates(vals[i], vals[j])) {
        dominated_by[i].push_back(j);
        ++domination_count[j];
      } else if (detail::dominates(vals[j], vals[i])) {
        dominated_by[j].push_back(i);
        ++domination_count[i];
      }
    }
  }
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < n; ++i) {
    if (domination_count[i] == 0) {
      rank[i] = 0;
      front.push_back(i);
    }
  }
  int r = 0;
  while (!front.empty()) {
    std::vector<std::size_t> next;
    for (const std::size_t i : front) {
      for (const std::size_t j : dominated_by[i]) {
        if (--domination_count[j] == 0) {
          rank[j] = r + 1;
          next.push_back(j);
        }
      }
    }
    ++r;
    front = std::move(next);
  }
  return rank;
}

// NSGA-II crowding distance over one front. Boundary points of every objective
// get +inf; an interior point accumulates (f[i+1]-f[i-1])/(f_max-f_min) per
// objective. A degenerate objective range contributes 0.
inline std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front) {
  const auto vals = detail::to_minimized(front);
  const std::size_t n = vals.size();
  std::vector<double> dist(n, 0.0);
  if (n == 0) return dist;
  const std::size_t m = vals.front().size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), inf);
    return dist;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < m; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a][k] < vals[b][k]; });
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    const double range = vals[order.back()][k] - vals[order.front()][k];
    if (range <= 0.0) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (dist[order[i]] == inf) continue;
      dist[order[i]] += (vals[order[i + 1]][k] - vals[order[i - 1]][k]) / range;
    }
  }
  return dist;
}

// Total order used to rank observations: nondomination rank ascending, then
// crowding distance descending, then insertion index ascending.
struct RankKey {
  int nd_rank = 0;
  double crowding = 0.0;
  std::size_t index = 0;

  friend bool operator<(const RankKey& a, const RankKey& b) {
    if (a.nd_rank != b.nd_rank) return a.nd_rank < b.nd_rank;
    if (a.crowding != b.crowding) return a.crowding > b.crowding;
    return a.index < b.index;
  }
};

// RankKey per observation; crowding is computed within each front.
inline std::vector<RankKey> rank_keys(const std::vector<ObjectiveVector>& objs) {
  const std::vector<int> ranks = nondomination_rank(objs);
  std::vector<RankKey> keys(objs.size());
  if (objs.empty()) return keys;
  const int max_rank = *std::max_element(ranks.begin(), ranks.end());
  for (int r = 0; r <= max_rank; ++r) {
    std::vector<std::size_t> members;
    std::vector<ObjectiveVector> front;
    for (std::size_t i = 0; i < objs.size(); ++i) {
      if (ranks[i] == r) {
        members.push_back(i);
        front.push_back(objs[i]);
      }
    }
    const std::vector<double> crowd = crowding_distance(front);
    for (std::size_t j = 0; j < members.size(); ++j) {
      keys[members[j]] = RankKey{r, crowd[j], members[j]};
    }
  }
  return keys;
}

// Permutation of indices from best to worst under the RankKey order. With a
// single objective this reduces to a stable sort by value.
inline std::vector<std::size_t> sorted_by_rank(const std::vector<ObjectiveVector>& objs) {
  std::vector<std::size_t> order(objs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (objs.empty()) return order;
  if (objs.front().size() == 1) {
    const auto vals = detail::to_minimized(objs);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a][0] < vals[b][0]; });
    return order;
  }
  const std::vector<RankKey> keys = rank_keys(objs);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}

// Number of observations in the better split: ceil(gamma * n), computed with a
// small slack so that products such as 0.1 * 10 do not spill over the integer.
inline std::size_t split_size(std::size_t n, double gamma) {
  if (n == 0) throw std::invalid_argument("cannot split an empty observation set");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
  const double scaled = gamma * static_cast<double>(n);
  auto n_better = static_cast<std::size_t>(std::ceil(scaled - 1e-9));
  n_better = std::max<std::size_t>(n_better, 1);
  return std::min(n_better, n);
}

// Splits indices into (better, worse) by RankKey: the better part holds
// exactly ceil(gamma * n) observations, ties broken by insertion order.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const std::vector<ObjectiveVector>& objs, double gamma) {
  const std::size_t n_better = split_size(objs.size(), gamma);
  const std::vector<std::size_t> order = sorted_by_rank(objs);
  std::vector<std::size_t> better(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_better));
  std::vector<std::size_t> worse(order.begin() + static_cast<std::ptrdiff_t>(n_better), order.end());
  return {std::move(better), std::move(worse)};
}

// Normalized hypervolume for one or two objectives, on the minimized scale.
// Each point maps to a goodness g = clamp((f_max - f)/(f_max - f_min), 0, 1)
// per objective; the result is the area of the union of boxes [0, g].
inline double normalized_hv(const std::vector<ObjectiveVector>& objs,
                            const std::vector<double>& f_min, const std::vector<double>& f_max) {
  const std::size_t m = f_min.size();
  if (m != f_max.size() || m == 0)
    throw std::invalid_argument("f_min and f_max must have equal, positive length");
  if (m > 2) throw UnsupportedDimensionError("normalized hypervolume supports 1 or 2 objectives");
  for (std::size_t k = 0; k < m; ++k) {
    if (!(f_min[k] < f_max[k]))
      throw std::invalid_argument("f_min must be strictly below f_max in every objective");
  }
  const auto vals = detail::to_minimized(objs);
  if (!vals.empty() && vals.front().size() != m)
    throw ShapeError("objective dimension does not match the normalization bounds");

  auto goodness = [&](const std::vector<double>& f, std::size_t k) {
    const double g = (f_max[k] - f[k]) / (f_max[k] - f_min[k]);
    return std::clamp(g, 0.0, 1.0);
  };

  if (vals.empty()) return 0.0;
  if (m == 1) {
    double best = 0.0;
    for (const auto& f : vals) best = std::max(best, goodness(f, 0));
    return best;
  }

  std::vector<std::array<double, 2>> pts;
  pts.reserve(vals.size());
  for (const auto& f : vals) pts.push_back({goodness(f, 0), goodness(f, 1)});
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    if (a[0] != b[0]) return a[0] > b[0];
    return a[1] > b[1];
  });
  double area = 0.0;
  double top = 0.0;  // best g2 among points with larger-or-equal g1
  for (const auto& p : pts) {
    if (p[1] > top) {
      area += p[0] * (p[1] - top);
      top = p[1];
    }
  }
  return area;
}

// 50% empirical attainment surface for two objectives on the minimized scale.
// A point of the union coordinate grid counts as attained by a run when some
// observation of that run weakly dominates it; the surface is the
// Pareto-minimal set of grid points attained by a majority (ceil((R+1)/2)) of
// the R runs, sorted by the first objective.
//
// A run attains (x, y) exactly when y >= min{f2 : (f1, f2) in run, f1 <= x},
// so the lowest majority-attained y at each grid column is the majority-th
// smallest of those per-run minima; no y grid is needed.
inline std::vector<std::array<double, 2>> attainment_surface_50(
    const std::vector<std::vector<ObjectiveVector>>& runs) {
  if (runs.empty()) throw std::invalid_argument("attainment surface needs >= 1 run");
  std::vector<std::vector<std::array<double, 2>>> pts(runs.size());
  std::vector<double> xs;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& v : runs[r]) {
      if (v.size() != 2)
        throw UnsupportedDimensionError("attainment surface supports exactly 2 objectives");
      pts[r].push_back({v.minimized(0), v.minimized(1)});
      xs.push_back(v.minimized(0));
    }
    std::sort(pts[r].begin(), pts[r].end());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.empty()) return {};

  const std::size_t needed = runs.size() / 2 + 1;  // majority of R runs
  constexpr double inf = std::numeric_limits<double>::infinity();

  // per run, walk the sorted points once across the columns, tracking the
  // prefix minimum of the second objective
  std::vector<std::vector<double>> best_y(runs.size(), std::vector<double>(xs.size(), inf));
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::size_t next = 0;
    double running = inf;
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      while (next < pts[r].size() && pts[r][next][0] <= xs[xi]) {
        running = std::min(running, pts[r][next][1]);
        ++next;
      }
      best_y[r][xi] = running;
    }
  }

  std::vector<std::array<double, 2>> surface;
  double prev_y = inf;
  std::vector<double> column(runs.size());
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    for (std::size_t r = 0; r < runs.size(); ++r) column[r] = best_y[r][xi];
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(needed - 1),
                     column.end());
    const double attained = column[needed - 1];
    if (attained < prev_y) {
      surface.push_back({xs[xi], attained});
      prev_y = attained;
    }
  }
  return surface;
}

}  // namespace metatpe

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <vector>

#include "metatpe/errors.hpp"
#include "metatpe/kde.hpp"
#include "metatpe/random.hpp"
#include "metatpe/search_space.hpp"

namespace metatpe {

// Hyperparameter importance per task and dimension, plus the per-dimension
// average over tasks.
struct HpiScores {
  std::vector<std::vector<double>> per_task;  // T x D
  std::vector<double> averaged;               // D
};

// Task kernel weights (T x T, rows summing to 1) together with the estimated
// gamma-set similarities between the target task (row 0) and each meta-task.
// Only the target row is consumed by the optimizer; the remaining rows follow
// the same construction with unknown meta/meta similarities left at zero.
struct TaskKernelMatrix {
  std::vector<std::vector<double>> weights;
  std::vector<double> similarities;  // size T-1
};

struct TaskKernelDiagnostics {
  std::vector<std::size_t> selected_dims;
  std::vector<double> avg_hpi;
  std::vector<double> tv_distances;
};

// Importance of each dimension for each task, measured as the scaled squared
// deviation of the marginal density of the task's good split from the uniform
// density: gamma^2 * E[(p_d / u_d - 1)^2]. Continuous dimensions use n_mc
// uniform samples (shared across tasks so equal estimators give equal rows);
// ordinal and categorical dimensions are averaged exactly over their levels.
inline HpiScores hpi_scores(const std::vector<const Kde*>& dl_kdes, const SearchSpace& space,
                            double gamma, int n_mc, RandomStream& rng) {
  if (dl_kdes.empty()) throw std::invalid_argument("importance scores need >= 1 task");
  if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
  const std::size_t task_count = dl_kdes.size();
  const std::size_t dim_count = space.size();
  const double g2 = gamma * gamma;

  HpiScores scores;
  scores.per_task.assign(task_count, std::vector<double>(dim_count, 0.0));
  scores.averaged.assign(dim_count, 0.0);

  std::vector<double> xs;
  for (std::size_t d = 0; d < dim_count; ++d) {
    const ParamDomain& p = space.param(d);
    xs.clear();
    double uniform_density = 1.0;
    if (p.kind == ParamKind::continuous) {
      xs.reserve(static_cast<std::size_t>(n_mc));
      for (int i = 0; i < n_mc; ++i) xs.push_back(rng.uniform());
    } else if (p.kind == ParamKind::ordinal) {
      const std::size_t levels = p.levels.size();
      for (std::size_t i = 0; i < levels; ++i)
        xs.push_back(static_cast<double>(i) / static_cast<double>(levels - 1));
    } else {
      const std::size_t k = p.category_count();
      for (std::size_t i = 0; i < k; ++i) xs.push_back(static_cast<double>(i));
      uniform_density = 1.0 / static_cast<double>(k);
    }
    for (std::size_t m = 0; m < task_count; ++m) {
      double acc = 0.0;
      for (const double x : xs) {
        const double ratio = dl_kdes[m]->marginal_pdf(d, x) / uniform_density;
        acc += (ratio - 1.0) * (ratio - 1.0);
      }
      scores.per_task[m][d] = g2 * acc / static_cast<double>(xs.size());
    }
  }
  for (std::size_t d = 0; d < dim_count; ++d) {
    double sum = 0.0;
    for (std::size_t m = 0; m < task_count; ++m) sum += scores.per_task[m][d];
    scores.averaged[d] = sum / static_cast<double>(task_count);
  }
  return scores;
}

// Picks the floor(log_eta(n_dl_target)) most important dimensions (clipped to
// [0, D]), ties broken toward the lower index. Returns indices in ascending
// order; may be empty.
inline std::vector<std::size_t> select_dimensions(const HpiScores& scores,
                                                  std::size_t n_dl_target, double eta) {
  if (!(eta > 1.0)) throw std::invalid_argument("eta must be > 1");
  if (n_dl_target < 1) throw std::invalid_argument("n_dl_target must be >= 1");
  const std::size_t dim_count = scores.averaged.size();
  // Small slack keeps exact powers (log_eta of eta^k) from rounding below k.
  const double raw = std::log(static_cast<double>(n_dl_target)) / std::log(eta);
  const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(raw + 1e-9)));
  const std::size_t take = std::min(k, dim_count);
  std::vector<std::size_t> order(dim_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores.averaged[a] > scores.averaged[b];
  });
  std::vector<std::size_t> dims(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(dims.begin(), dims.end());
  return dims;
}

// Monte-Carlo total variation distance between two estimators sharing a space
// and active set. Draws half the samples from each density and evaluates the
// importance estimator 0.5 * E_mix[|p - q| / mix] under the even mixture;
// uniform proposals would have unbounded variance on peaked densities.
inline double tv_distance(const Kde& p, const Kde& q, int n_mc, RandomStream& rng) {
  if (!p.same_layout(q))
    throw std::invalid_argument("total variation distance needs estimators on one space");
  if (n_mc < 2 || n_mc % 2 != 0) throw std::invalid_argument("n_mc must be even and >= 2");
  const std::size_t half = static_cast<std::size_t>(n_mc) / 2;
  double acc = 0.0;
  auto accumulate = [&](const std::vector<UnitConfig>& samples) {
    for (const auto& u : samples) {
      const double pv = p.pdf(u);
      const double qv = q.pdf(u);
      const double mix = 0.5 * (pv + qv);
      if (mix > 0.0) acc += std::abs(pv - qv) / mix;
    }
  };
  accumulate(p.sample(half, rng));
  accumulate(q.sample(half, rng));
  return std::clamp(0.5 * acc / static_cast<double>(n_mc), 0.0, 1.0);
}

// Estimated gamma-set similarity from a total variation distance.
inline double gamma_set_similarity(double d_tv) {
  if (!(d_tv >= 0.0 && d_tv <= 1.0))
    throw std::invalid_argument("total variation distance must lie in [0, 1]");
  return (1.0 - d_tv) / (1.0 + d_tv);
}

// Task kernel from the similarities between the target task and the T-1
// meta-tasks: off-diagonal weight s_m / T, diagonal 1 - sum(s)/T for the
// target and 1 - s_m / T for meta rows. Every row sums to 1. The kernel is
// symmetric but not positive semi-definite; nothing may assume otherwise.
inline TaskKernelMatrix task_kernel(const std::vector<double>& similarities, std::size_t task_count) {
  if (task_count < 1) throw std::invalid_argument("task kernel needs >= 1 task");
  if (similarities.size() != task_count - 1)
    throw std::invalid_argument("expected one similarity per meta-task");
  for (const double s : similarities) {
    if (!(s >= 0.0 && s <= 1.0))
      throw std::invalid_argument("similarities must lie in [0, 1]");
  }
  const double t = static_cast<double>(task_count);
  TaskKernelMatrix kernel;
  kernel.similarities = similarities;
  kernel.weights.assign(task_count, std::vector<double>(task_count, 0.0));
  double total = 0.0;
  for (std::size_t m = 1; m < task_count; ++m) {
    const double w = similarities[m - 1] / t;
    kernel.weights[0][m] = w;
    kernel.weights[m][0] = w;
    kernel.weights[m][m] = 1.0 - w;
    total += w;
  }
  kernel.weights[0][0] = 1.0 - total;
  return kernel;
}

// Full task-kernel computation from the per-task good splits (target first):
// build the split estimators, average the importance scores, select the
// dimensions to keep, and derive the kernel from the reduced total variation
// distances between the target and each meta-task. An empty dimension
// selection makes every reduced density constant, so all similarities are 1
// and the weights are uniform.
inline TaskKernelMatrix compute_task_kernel(const SearchSpace& space,
                                            const std::vector<std::vector<UnitConfig>>& dl_sets,
                                            double gamma, double eta, int n_mc, RandomStream& rng,
                                            BandwidthRule rule = {},
                                            TaskKernelDiagnostics* diag = nullptr) {
  if (dl_sets.empty()) throw std::invalid_argument("task kernel needs >= 1 task");
  for (const auto& dl : dl_sets) {
    if (dl.empty()) throw std::invalid_argument("every good split must be non-empty");
  }
  const std::size_t task_count = dl_sets.size();
  if (task_count == 1) {
    if (diag) *diag = {};
    TaskKernelMatrix kernel;
    kernel.weights = {{1.0}};
    return kernel;
  }

  std::vector<Kde> kdes;
  kdes.reserve(task_count);
  for (const auto& dl : dl_sets) kdes.emplace_back(space, dl, rule);
  std::vector<const Kde*> kde_ptrs;
  for (const auto& k : kdes) kde_ptrs.push_back(&k);

  RandomStream hpi_rng = rng.fork(1);
  const HpiScores scores = hpi_scores(kde_ptrs, space, gamma, n_mc, hpi_rng);
  const std::vector<std::size_t> dims = select_dimensions(scores, dl_sets[0].size(), eta);

  std::vector<double> tv(task_count - 1, 0.0);
  std::vector<double> sims(task_count - 1, 1.0);
  if (!dims.empty()) {
    const Kde target = kdes[0].reduced(dims);
    for (std::size_t m = 1; m < task_count; ++m) {
      RandomStream tv_rng = rng.fork(1 + m);
      tv[m - 1] = tv_distance(target, kdes[m].reduced(dims), n_mc, tv_rng);
      sims[m - 1] = gamma_set_similarity(tv[m - 1]);
    }
  }
  if (diag) {
    diag->selected_dims = dims;
    diag->avg_hpi = scores.averaged;
    diag->tv_distances = tv;
  }
  return task_kernel(sims, task_count);
}

}  // namespace metatpe

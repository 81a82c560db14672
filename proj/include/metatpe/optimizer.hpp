#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metatpe/errors.hpp"
#include "metatpe/kde.hpp"
#include "metatpe/mo_ranking.hpp"
#include "metatpe/random.hpp"
#include "metatpe/search_space.hpp"
#include "metatpe/task_similarity.hpp"

namespace metatpe {

struct Observation {
  Config config;
  ObjectiveVector objectives;
  int trial_index = 0;
};

// Splits observations into (good, rest): the good part holds exactly
// ceil(gamma * n) observations under the RankKey order, ties by insertion.
inline std::pair<std::vector<Observation>, std::vector<Observation>> split_observations(
    const std::vector<Observation>& obs, double gamma) {
  std::vector<ObjectiveVector> objs;
  objs.reserve(obs.size());
  for (const auto& o : obs) objs.push_back(o.objectives);
  const auto [good, rest] = split_indices(objs, gamma);
  std::pair<std::vector<Observation>, std::vector<Observation>> out;
  for (const std::size_t i : good) out.first.push_back(obs[i]);
  for (const std::size_t i : rest) out.second.push_back(obs[i]);
  return out;
}

struct OptimizerConfig {
  double gamma = 0.1;      // quantile for the observation split
  int n_init = 5;          // initial configurations before the model kicks in
  int n_candidates = 100;  // candidates sampled per task per iteration
  double epsilon = 0.05;   // probability of a uniform-random pick
  double eta = 2.5;        // dimension reduction factor
  int n_mc = 1000;         // Monte-Carlo sample size for the task kernel
  std::uint64_t seed = 0;
  BandwidthRule bandwidths{};

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
    if (n_init < 1) throw std::invalid_argument("n_init must be >= 1");
    if (n_candidates < 1) throw std::invalid_argument("n_candidates must be >= 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
      throw std::invalid_argument("epsilon must be in [0, 1]");
    if (!(eta > 1.0)) throw std::invalid_argument("eta must be > 1");
    if (n_mc < 2 || n_mc % 2 != 0) throw std::invalid_argument("n_mc must be even and >= 2");
  }
};

// Per-task observation archive with a cached gamma-split and the split
// density estimators. Meta-task datasets are built once and frozen; the
// target dataset is invalidated by every new observation.
class TaskDataset {
 public:
  explicit TaskDataset(std::string task_id = "") : task_id_(std::move(task_id)) {}

  const std::string& task_id() const { return task_id_; }
  const std::vector<Observation>& observations() const { return observations_; }
  std::size_t size() const { return observations_.size(); }

  void add(const SearchSpace& space, Config config, ObjectiveVector objectives) {
    if (!observations_.empty() &&
        objectives.size() != observations_.front().objectives.size())
      throw ShapeError("objective dimension changed mid-run");
    Observation o;
    o.config = std::move(config);
    o.objectives = std::move(objectives);
    o.trial_index = static_cast<int>(observations_.size()) + 1;
    unit_points_.push_back(to_unit(space, o.config));
    observations_.push_back(std::move(o));
    split_.reset();
  }

  // Computes (or reuses) the gamma-split and the two estimators.
  void ensure_split(const SearchSpace& space, double gamma, BandwidthRule rule) {
    if (split_ && split_->gamma == gamma) return;
    if (observations_.empty()) throw std::invalid_argument("cannot split an empty dataset");
    Split s;
    s.gamma = gamma;
    std::vector<ObjectiveVector> objs;
    objs.reserve(observations_.size());
    for (const auto& o : observations_) objs.push_back(o.objectives);
    auto [good, rest] = split_indices(objs, gamma);
    s.dl_indices = std::move(good);
    s.dg_indices = std::move(rest);
    std::vector<UnitConfig> dl_points;
    for (const std::size_t i : s.dl_indices) dl_points.push_back(unit_points_[i]);
    s.kde_l.emplace(space, dl_points, rule);
    if (!s.dg_indices.empty()) {
      std::vector<UnitConfig> dg_points;
      for (const std::size_t i : s.dg_indices) dg_points.push_back(unit_points_[i]);
      s.kde_g.emplace(space, dg_points, rule);
    }
    split_ = std::move(s);
  }

  bool has_split() const { return split_.has_value(); }
  const std::vector<std::size_t>& dl_indices() const { return split_->dl_indices; }
  const std::vector<std::size_t>& dg_indices() const { return split_->dg_indices; }
  const Kde& kde_l() const { return *split_->kde_l; }
  const Kde* kde_g() const { return split_->kde_g ? &*split_->kde_g : nullptr; }

  std::vector<UnitConfig> dl_unit_points() const {
    std::vector<UnitConfig> out;
    out.reserve(split_->dl_indices.size());
    for (const std::size_t i : split_->dl_indices) out.push_back(unit_points_[i]);
    return out;
  }

 private:
  struct Split {
    double gamma = 0.0;
    std::vector<std::size_t> dl_indices;
    std::vector<std::size_t> dg_indices;
    std::optional<Kde> kde_l;
    std::optional<Kde> kde_g;
  };

  std::string task_id_;
  std::vector<Observation> observations_;
  std::vector<UnitConfig> unit_points_;
  std::optional<Split> split_;
};

// One task's contribution to the joint split densities. A missing estimator
// (empty split side) contributes nothing to that side.
struct TaskSplit {
  const Kde* kde_l = nullptr;
  const Kde* kde_g = nullptr;
  std::size_t n_l = 0;
  std::size_t n_g = 0;
};

// Purpose tags for the per-iteration child streams. Both optimizers derive
// identical candidate/init streams, which is what makes the single-task
// degeneration exact under a shared seed.
namespace stream_purpose {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t candidates = 2;
inline constexpr std::uint64_t kernel = 3;
inline constexpr std::uint64_t epsilon = 4;
}  // namespace stream_purpose

inline constexpr double kDensityFloor = 1e-12;

// Task-conditioned density ratio: each side is the kernel-weighted mixture of
// the per-task split densities, weighted additionally by the split sizes;
// both sides are floored before the ratio.
inline double acquisition(const UnitConfig& u, const std::vector<double>& kernel_row,
                          const std::vector<TaskSplit>& splits) {
  double n_l_all = 0.0;
  double n_g_all = 0.0;
  for (const auto& s : splits) {
    n_l_all += static_cast<double>(s.n_l);
    n_g_all += static_cast<double>(s.n_g);
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t m = 0; m < splits.size(); ++m) {
    const double w = kernel_row[m];
    if (w == 0.0) continue;
    if (splits[m].kde_l && splits[m].n_l > 0)
      num += static_cast<double>(splits[m].n_l) / n_l_all * w * splits[m].kde_l->pdf(u);
    if (splits[m].kde_g && splits[m].n_g > 0)
      den += static_cast<double>(splits[m].n_g) / n_g_all * w * splits[m].kde_g->pdf(u);
  }
  return std::max(num, kDensityFloor) / std::max(den, kDensityFloor);
}

// Best ceil(n_init / (T-1)) observations of each meta-task, by RankKey within
// the task. Configurations may repeat across tasks.
inline std::vector<Config> warm_start_pool(const std::vector<TaskDataset>& meta, int n_init) {
  if (meta.empty()) return {};
  if (n_init < 1) throw std::invalid_argument("n_init must be >= 1");
  const std::size_t per_task =
      (static_cast<std::size_t>(n_init) + meta.size() - 1) / meta.size();
  std::vector<Config> pool;
  for (const auto& task : meta) {
    if (task.observations().empty())
      throw std::invalid_argument("meta-task '" + task.task_id() + "' has no observations");
    std::vector<ObjectiveVector> objs;
    for (const auto& o : task.observations()) objs.push_back(o.objectives);
    const std::vector<std::size_t> order = sorted_by_rank(objs);
    const std::size_t take = std::min(per_task, order.size());
    for (std::size_t i = 0; i < take; ++i) pool.push_back(task.observations()[order[i]].config);
  }
  return pool;
}

// Meta-learning TPE: warm start from the meta-task archives, then per
// iteration rebuild the target split, sample candidates from every task's
// good-split density, recompute the task kernel, and pick the candidate with
// the best task-conditioned density ratio (or a uniform-random configuration
// with probability epsilon). With no meta-tasks this degenerates to plain
// MO-TPE with an epsilon-greedy pick.
//
// Single-owner mutable state: ask/suggest/tell must be externally serialized.
// Separate instances never share state and may run in parallel.
class MetaLearnTpe {
 public:
  enum class Phase { warm_start, bo };

  MetaLearnTpe(SearchSpace space, OptimizerConfig config,
               std::vector<std::vector<Observation>> meta_observations = {})
      : space_(std::move(space)),
        config_(config),
        root_(config.seed),
        init_rng_(root_.fork(stream_purpose::init)),
        target_("target") {
    config_.validate();
    for (std::size_t m = 0; m < meta_observations.size(); ++m) {
      TaskDataset task("meta-" + std::to_string(m + 1));
      for (auto& o : meta_observations[m]) task.add(space_, o.config, o.objectives);
      task.ensure_split(space_, config_.gamma, config_.bandwidths);
      meta_.push_back(std::move(task));
    }
    pool_ = warm_start_pool(meta_, config_.n_init);
  }

  Phase phase() const { return phase_; }
  const SearchSpace& space() const { return space_; }
  const OptimizerConfig& config() const { return config_; }
  const TaskDataset& target() const { return target_; }
  const std::vector<TaskDataset>& meta() const { return meta_; }
  const std::vector<Observation>& history() const { return target_.observations(); }
  const TaskKernelMatrix& kernel() const { return kernel_; }
  const TaskKernelDiagnostics& kernel_diagnostics() const { return kernel_diag_; }
  std::size_t last_candidate_count() const { return last_candidate_count_; }

  Config ask() { return phase_ == Phase::warm_start ? next_warm_start() : suggest(); }

  // Next warm-start configuration: a uniform pop from the pool, or a uniform
  // random configuration once the pool is exhausted (always, with no
  // meta-tasks).
  Config next_warm_start() {
    if (phase_ != Phase::warm_start) throw StateError("warm start already finished");
    if (!pool_.empty()) {
      const std::size_t i = static_cast<std::size_t>(init_rng_.uniform_int(pool_.size()));
      Config c = std::move(pool_[i]);
      pool_.erase(pool_.begin() + static_cast<std::ptrdiff_t>(i));
      return c;
    }
    return sample_uniform(space_, init_rng_);
  }

  Config suggest() {
    if (phase_ != Phase::bo)
      throw StateError("suggest called during warm start; evaluate the initial configurations first");
    const std::size_t n = target_.size();
    target_.ensure_split(space_, config_.gamma, config_.bandwidths);

    RandomStream cand_rng = root_.fork(stream_purpose::candidates).fork(n);
    std::vector<UnitConfig> candidates =
        target_.kde_l().sample(static_cast<std::size_t>(config_.n_candidates), cand_rng);
    for (const auto& task : meta_) {
      const auto extra =
          task.kde_l().sample(static_cast<std::size_t>(config_.n_candidates), cand_rng);
      candidates.insert(candidates.end(), extra.begin(), extra.end());
    }
    last_candidate_count_ = candidates.size();

    std::vector<std::vector<UnitConfig>> dl_sets;
    dl_sets.push_back(target_.dl_unit_points());
    for (const auto& task : meta_) dl_sets.push_back(task.dl_unit_points());
    RandomStream kernel_rng = root_.fork(stream_purpose::kernel).fork(n);
    kernel_ = compute_task_kernel(space_, dl_sets, config_.gamma, config_.eta, config_.n_mc,
                                  kernel_rng, config_.bandwidths, &kernel_diag_);

    RandomStream eps_rng = root_.fork(stream_purpose::epsilon).fork(n);
    if (eps_rng.uniform() < config_.epsilon) {
      return sample_uniform(space_, eps_rng);
    }

    std::vector<TaskSplit> splits;
    splits.push_back(make_split(target_));
    for (const auto& task : meta_) splits.push_back(make_split(task));
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double value = acquisition(candidates[i], kernel_.weights[0], splits);
      if (value > best_value) {
        best_value = value;
        best = i;
      }
    }
    return from_unit(space_, candidates[best]);
  }

  void tell(const Config& config, ObjectiveVector objectives) {
    target_.add(space_, config, std::move(objectives));
    if (phase_ == Phase::warm_start && target_.size() >= static_cast<std::size_t>(config_.n_init))
      phase_ = Phase::bo;
  }

  void tell(const Config& config, std::vector<double> values) {
    tell(config, ObjectiveVector(std::move(values)));
  }

  // Warm start, then model-guided iterations until `budget` evaluations.
  std::vector<Observation> run(const std::function<std::vector<double>(const Config&)>& fn,
                               int budget) {
    if (budget < config_.n_init)
      throw std::invalid_argument("budget must be >= n_init");
    while (target_.size() < static_cast<std::size_t>(budget)) {
      const Config c = ask();
      tell(c, fn(c));
    }
    return history();
  }

 private:
  static TaskSplit make_split(const TaskDataset& task) {
    TaskSplit s;
    s.kde_l = &task.kde_l();
    s.kde_g = task.kde_g();
    s.n_l = task.dl_indices().size();
    s.n_g = task.dg_indices().size();
    return s;
  }

  SearchSpace space_;
  OptimizerConfig config_;
  RandomStream root_;
  RandomStream init_rng_;
  TaskDataset target_;
  std::vector<TaskDataset> meta_;
  std::vector<Config> pool_;
  Phase phase_ = Phase::warm_start;
  TaskKernelMatrix kernel_;
  TaskKernelDiagnostics kernel_diag_;
  std::size_t last_candidate_count_ = 0;
};

// Plain MO-TPE: uniform initialization, then the split density ratio over
// candidates sampled from the good split. No meta-tasks, no epsilon-greedy
// branch. Stream derivation matches MetaLearnTpe so the two make identical
// decisions when the latter runs with zero meta-tasks and epsilon = 0.
class MoTpe {
 public:
  enum class Phase { warm_start, bo };

  MoTpe(SearchSpace space, OptimizerConfig config)
      : space_(std::move(space)),
        config_(config),
        root_(config.seed),
        init_rng_(root_.fork(stream_purpose::init)),
        target_("target") {
    config_.validate();
  }

  Phase phase() const { return phase_; }
  const TaskDataset& target() const { return target_; }
  const std::vector<Observation>& history() const { return target_.observations(); }

  Config ask() {
    if (phase_ == Phase::warm_start) return sample_uniform(space_, init_rng_);
    return suggest();
  }

  Config suggest() {
    if (phase_ != Phase::bo) throw StateError("suggest called during warm start");
    const std::size_t n = target_.size();
    target_.ensure_split(space_, config_.gamma, config_.bandwidths);
    RandomStream cand_rng = root_.fork(stream_purpose::candidates).fork(n);
    const std::vector<UnitConfig> candidates =
        target_.kde_l().sample(static_cast<std::size_t>(config_.n_candidates), cand_rng);
    const Kde* kde_g = target_.kde_g();
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double num = target_.kde_l().pdf(candidates[i]);
      const double den = kde_g ? kde_g->pdf(candidates[i]) : 0.0;
      const double value = std::max(num, kDensityFloor) / std::max(den, kDensityFloor);
      if (value > best_value) {
        best_value = value;
        best = i;
      }
    }
    return from_unit(space_, candidates[best]);
  }

  void tell(const Config& config, ObjectiveVector objectives) {
    target_.add(space_, config, std::move(objectives));
    if (phase_ == Phase::warm_start && target_.size() >= static_cast<std::size_t>(config_.n_init))
      phase_ = Phase::bo;
  }

  void tell(const Config& config, std::vector<double> values) {
    tell(config, ObjectiveVector(std::move(values)));
  }

  std::vector<Observation> run(const std::function<std::vector<double>(const Config&)>& fn,
                               int budget) {
    if (budget < config_.n_init) throw std::invalid_argument("budget must be >= n_init");
    while (target_.size() < static_cast<std::size_t>(budget)) {
      const Config c = ask();
      tell(c, fn(c));
    }
    return history();
  }

 private:
  SearchSpace space_;
  OptimizerConfig config_;
  RandomStream root_;
  RandomStream init_rng_;
  TaskDataset target_;
  Phase phase_ = Phase::warm_start;
};

}  // namespace metatpe

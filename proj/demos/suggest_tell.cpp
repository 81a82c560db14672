// Embedded usage: drive the optimizer through ask/tell on a toy bi-objective
// problem, transferring knowledge from one pre-evaluated meta-task.

#include <cstdio>
#include <vector>

#include "metatpe/metatpe.hpp"

int main() {
  using namespace metatpe;

  SearchSpace space({
      ParamDomain::make_continuous("x", 0.0, 1.0),
      ParamDomain::make_ordinal("width", {32, 64, 128, 256}),
      ParamDomain::make_categorical("act", {"relu", "tanh"}),
  });

  auto objectives = [&](const Config& c) {
    const double x = std::get<double>(c.values[0]);
    const double width = std::get<double>(c.values[1]);
    const double act_bonus = std::get<std::string>(c.values[2]) == "relu" ? 0.0 : 0.05;
    const double quality = (x - 0.3) * (x - 0.3) + 0.1 / (width / 32.0) + act_bonus;
    const double cost = width / 256.0 + x * 0.2;
    return std::vector<double>{quality, cost};
  };

  // metadata: 80 random evaluations of a shifted variant of the same problem
  RandomStream meta_rng(7);
  std::vector<Observation> meta;
  for (int i = 0; i < 80; ++i) {
    Observation o;
    o.config = sample_uniform(space, meta_rng);
    auto f = objectives(o.config);
    f[0] += 0.02;  // slightly different task
    o.objectives = ObjectiveVector(f);
    o.trial_index = i + 1;
    meta.push_back(o);
  }

  OptimizerConfig cfg;
  cfg.seed = 1;
  MetaLearnTpe opt(space, cfg, {meta});
  for (int t = 1; t <= 40; ++t) {
    const Config c = opt.ask();
    opt.tell(c, objectives(c));
  }

  const auto& kernel = opt.kernel();
  std::printf("meta-task weight after %zu trials: %.3f\n", opt.history().size(),
              kernel.weights[0][1]);

  std::vector<ObjectiveVector> objs;
  for (const auto& o : opt.history()) objs.push_back(o.objectives);
  std::printf("normalized hypervolume: %.3f\n",
              normalized_hv(objs, {0.0, 0.0}, {1.2, 1.2}));
  return 0;
}

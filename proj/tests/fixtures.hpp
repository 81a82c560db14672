#pragma once

// Shared synthetic constructions used by the unit suites and the acceptance
// runner.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "metatpe/benchmarks.hpp"
#include "metatpe/mo_ranking.hpp"
#include "metatpe/random.hpp"
#include "metatpe/search_space.hpp"

namespace fixtures {

// Good-split points of the task f(x) = |x - offset| on [0, 1], built from n
// uniform-random observations. With gamma = 0.1 the population gamma-set of
// offset 0.3 is [0.25, 0.35]. Optionally appends a coordinate that never
// affects the objective.
inline std::vector<metatpe::UnitConfig> interval_dl_points(double offset, std::size_t n,
                                                           double gamma, std::uint64_t seed,
                                                           bool add_trivial_dim) {
  metatpe::RandomStream rng(seed);
  metatpe::RandomStream trivial_rng = rng.fork(999);  // keeps x draws unchanged
  std::vector<metatpe::UnitConfig> points;
  std::vector<metatpe::ObjectiveVector> objs;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    metatpe::UnitConfig u;
    u.coords.push_back(rng.uniform());
    if (add_trivial_dim) u.coords.push_back(trivial_rng.uniform());
    objs.push_back(metatpe::ObjectiveVector{std::abs(u.coords[0] - offset)});
    points.push_back(std::move(u));
  }
  const auto [good, rest] = metatpe::split_indices(objs, gamma);
  std::vector<metatpe::UnitConfig> dl;
  dl.reserve(good.size());
  for (const std::size_t i : good) dl.push_back(points[i]);
  return dl;
}

inline metatpe::SearchSpace interval_space(bool add_trivial_dim) {
  std::vector<metatpe::ParamDomain> params;
  params.push_back(metatpe::ParamDomain::make_continuous("x", 0.0, 1.0));
  if (add_trivial_dim) params.push_back(metatpe::ParamDomain::make_continuous("z", 0.0, 1.0));
  return metatpe::SearchSpace(std::move(params));
}

// A 648-configuration table shaped like a transformer translation benchmark:
// six finite parameters, a quality score to maximize and a decoding time to
// minimize, both smooth synthetic functions of the configuration. A few rows
// carry the declared worst values, the shape a padded failure row takes.
inline metatpe::TabularBenchmark nmt_fixture() {
  using namespace metatpe;
  SearchSpace space({
      ParamDomain::make_ordinal("bpe", {1, 2, 4, 8, 16, 32}),
      ParamDomain::make_ordinal("layers", {1, 2, 4}),
      ParamDomain::make_ordinal("embedding", {256, 512, 1024}),
      ParamDomain::make_ordinal("hidden", {1024, 2048}),
      ParamDomain::make_ordinal("heads", {8, 16}),
      ParamDomain::make_ordinal("lr", {3e-4, 6e-4, 1e-3}),
  });
  std::vector<ObjectiveSpec> objectives(2);
  objectives[0] = {"score", Direction::maximize, 0.0, 60.0};
  objectives[1] = {"decode_time", Direction::minimize, 10.0, 0.1};

  std::vector<Config> configs;
  std::vector<std::vector<double>> values;
  std::size_t row = 0;
  for (int bpe = 0; bpe < 6; ++bpe) {
    for (int layers = 0; layers < 3; ++layers) {
      for (int emb = 0; emb < 3; ++emb) {
        for (int hidden = 0; hidden < 2; ++hidden) {
          for (int heads = 0; heads < 2; ++heads) {
            for (int lr = 0; lr < 3; ++lr) {
              Config c;
              c.values = {space.param(0).levels[static_cast<std::size_t>(bpe)],
                          space.param(1).levels[static_cast<std::size_t>(layers)],
                          space.param(2).levels[static_cast<std::size_t>(emb)],
                          space.param(3).levels[static_cast<std::size_t>(hidden)],
                          space.param(4).levels[static_cast<std::size_t>(heads)],
                          space.param(5).levels[static_cast<std::size_t>(lr)]};
              // smooth score peaking at mid bpe, deeper nets; time grows with size
              const double score = 40.0 - 2.0 * (bpe - 3) * (bpe - 3) + 4.0 * layers +
                                   2.0 * emb + hidden + 0.5 * heads - 3.0 * (lr - 1) * (lr - 1) +
                                   std::sin(0.7 * static_cast<double>(row));
              const double time = 0.5 + 0.8 * layers + 0.5 * emb + 0.4 * hidden + 0.2 * heads +
                                  0.05 * bpe + 0.01 * std::cos(static_cast<double>(row));
              if (row % 97 == 0) {
                // training failure: pad with the declared worst values
                values.push_back({0.0, 10.0});
              } else {
                values.push_back({score, time});
              }
              configs.push_back(std::move(c));
              ++row;
            }
          }
        }
      }
    }
  }
  return TabularBenchmark::from_records("nmt-fixture", std::move(space), std::move(objectives),
                                        std::move(configs), std::move(values));
}

}  // namespace fixtures

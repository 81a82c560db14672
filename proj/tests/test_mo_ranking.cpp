#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "metatpe/mo_ranking.hpp"
#include "metatpe/random.hpp"
#include "oracles.hpp"

using namespace metatpe;
constexpr double inf = std::numeric_limits<double>::infinity();

TEST_CASE("nondomination rank on small instances", "[mo_ranking]") {
  REQUIRE(nondomination_rank({{1.0, 2.0}}) == std::vector<int>{0});
  REQUIRE(nondomination_rank({{1.0, 2.0}, {2.0, 1.0}, {3.0, 3.0}}) ==
          std::vector<int>{0, 0, 1});
  // duplicates share a rank
  REQUIRE(nondomination_rank({{1.0, 1.0}, {1.0, 1.0}, {2.0, 2.0}}) ==
          std::vector<int>{0, 0, 1});
}

TEST_CASE("maximize directions are normalized before ranking", "[mo_ranking]") {
  const std::vector<Direction> dirs = {Direction::minimize, Direction::maximize};
  std::vector<ObjectiveVector> objs = {
      ObjectiveVector({1.0, 5.0}, dirs),   // good loss, good score
      ObjectiveVector({2.0, 1.0}, dirs),   // dominated by both others
      ObjectiveVector({0.5, 2.0}, dirs),
  };
  REQUIRE(nondomination_rank(objs) == std::vector<int>{0, 1, 0});
}

TEST_CASE("ranks match the brute-force oracle", "[mo_ranking]") {
  RandomStream rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 20 + rng.uniform_int(180);
    const std::size_t m = 2 + rng.uniform_int(2);
    std::vector<ObjectiveVector> objs;
    std::vector<std::vector<double>> raw;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v;
      for (std::size_t k = 0; k < m; ++k) v.push_back(std::round(rng.uniform() * 10.0));
      raw.push_back(v);
      objs.push_back(ObjectiveVector(v));
    }
    const auto expected = oracle::brute_force_ranks(raw);
    REQUIRE(nondomination_rank(objs) == expected);
  }
}

TEST_CASE("mixed objective dimensions are a shape error", "[mo_ranking]") {
  REQUIRE_THROWS_AS(nondomination_rank({{1.0, 2.0}, {1.0}}), ShapeError);
}

TEST_CASE("crowding distance follows the boundary and gap rules", "[mo_ranking]") {
  REQUIRE(crowding_distance({}).empty());
  REQUIRE(crowding_distance({{1.0, 2.0}}) == std::vector<double>{inf});
  REQUIRE(crowding_distance({{1.0, 2.0}, {2.0, 1.0}}) == std::vector<double>{inf, inf});

  const auto d = crowding_distance({{0.0, 2.0}, {1.0, 1.0}, {2.0, 0.0}});
  REQUIRE(d[0] == inf);
  REQUIRE(d[2] == inf);
  REQUIRE(d[1] == Catch::Approx(2.0));

  // identical points: zero gaps, degenerate range contributes 0
  const auto same = crowding_distance({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}});
  REQUIRE(same[0] == inf);
  REQUIRE(same[2] == inf);
  REQUIRE(same[1] == 0.0);
}

TEST_CASE("split size is exactly ceil(gamma n)", "[mo_ranking]") {
  REQUIRE(split_size(10, 0.1) == 1);
  REQUIRE(split_size(5, 0.1) == 1);
  REQUIRE(split_size(25, 0.1) == 3);
  REQUIRE(split_size(100, 0.1) == 10);
  REQUIRE(split_size(7, 1.0) == 7);
  REQUIRE_THROWS_AS(split_size(0, 0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(split_size(10, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(split_size(10, 1.5), std::invalid_argument);
}

TEST_CASE("split partitions and orders observations", "[mo_ranking]") {
  RandomStream rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 5 + rng.uniform_int(60);
    std::vector<ObjectiveVector> objs;
    for (std::size_t i = 0; i < n; ++i) {
      objs.push_back({std::round(rng.uniform() * 8.0), std::round(rng.uniform() * 8.0)});
    }
    const auto [good, rest] = split_indices(objs, 0.1);
    REQUIRE(good.size() == split_size(n, 0.1));
    REQUIRE(good.size() + rest.size() == n);
    std::vector<bool> seen(n, false);
    for (const auto i : good) seen[i] = true;
    for (const auto i : rest) {
      REQUIRE(!seen[i]);
      seen[i] = true;
    }
    // every good member precedes every rest member in the rank order
    const auto keys = rank_keys(objs);
    for (const auto g : good) {
      for (const auto r : rest) {
        REQUIRE(keys[g] < keys[r]);
      }
    }
  }
}

TEST_CASE("single-objective split reduces to plain value ordering", "[mo_ranking]") {
  std::vector<ObjectiveVector> objs = {{3.0}, {1.0}, {2.0}, {1.0}, {5.0}};
  const auto order = sorted_by_rank(objs);
  REQUIRE(order == std::vector<std::size_t>{1, 3, 2, 0, 4});  // ties by insertion
  const auto [good, rest] = split_indices(objs, 0.4);
  REQUIRE(good == std::vector<std::size_t>{1, 3});
}

TEST_CASE("normalized hypervolume on hand-checked cases", "[mo_ranking]") {
  const std::vector<double> lo = {0.0, 0.0};
  const std::vector<double> hi = {1.0, 1.0};
  // single point at the best corner dominates the whole unit square
  REQUIRE(normalized_hv({{0.0, 0.0}}, lo, hi) == Catch::Approx(1.0));
  // goodness (0.5, 0.5) covers a quarter
  REQUIRE(normalized_hv({{0.5, 0.5}}, lo, hi) == Catch::Approx(0.25));
  // values beyond the bounds clamp
  REQUIRE(normalized_hv({{2.0, 2.0}}, lo, hi) == Catch::Approx(0.0));
  REQUIRE(normalized_hv({}, lo, hi) == 0.0);
  // single objective: best goodness so far
  REQUIRE(normalized_hv({{0.75}, {0.25}}, {0.0}, {1.0}) == Catch::Approx(0.75));

  REQUIRE_THROWS_AS(normalized_hv({{1, 2, 3}}, {0, 0, 0}, {1, 1, 1}),
                    UnsupportedDimensionError);
  REQUIRE_THROWS_AS(normalized_hv({{1.0, 2.0}}, {1.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("normalized hypervolume matches the grid oracle", "[mo_ranking]") {
  RandomStream rng(101);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<ObjectiveVector> objs;
    std::vector<std::array<double, 2>> goodness;
    const std::size_t n = 1 + rng.uniform_int(5);
    for (std::size_t i = 0; i < n; ++i) {
      const double f1 = rng.uniform();
      const double f2 = rng.uniform();
      objs.push_back({f1, f2});
      goodness.push_back({1.0 - f1, 1.0 - f2});
    }
    const double hv = normalized_hv(objs, {0.0, 0.0}, {1.0, 1.0});
    REQUIRE(hv == Catch::Approx(oracle::grid_hv(goodness, 1000)).margin(1e-2));
  }
}

TEST_CASE("hypervolume is monotone under new points", "[mo_ranking]") {
  RandomStream rng(55);
  std::vector<ObjectiveVector> objs;
  double prev = 0.0;
  for (int i = 0; i < 60; ++i) {
    objs.push_back({rng.uniform(), rng.uniform()});
    const double hv = normalized_hv(objs, {0.0, 0.0}, {1.0, 1.0});
    REQUIRE(hv >= prev - 1e-15);
    REQUIRE(hv <= 1.0 + 1e-15);
    prev = hv;
  }
}

TEST_CASE("attainment surface degenerate cases", "[mo_ranking]") {
  // one run: its own nondominated front
  const std::vector<ObjectiveVector> front = {{0.0, 1.0}, {1.0, 0.0}, {2.0, 2.0}};
  const auto single = attainment_surface_50({front});
  REQUIRE(single == std::vector<std::array<double, 2>>{{0.0, 1.0}, {1.0, 0.0}});

  // two identical runs share their front
  const auto twin = attainment_surface_50({front, front});
  REQUIRE(twin == std::vector<std::array<double, 2>>{{0.0, 1.0}, {1.0, 0.0}});

  // disjoint singletons meet at the join point
  const std::vector<ObjectiveVector> a = {{0.0, 1.0}};
  const std::vector<ObjectiveVector> b = {{1.0, 0.0}};
  const auto join = attainment_surface_50({a, b});
  REQUIRE(join == std::vector<std::array<double, 2>>{{1.0, 1.0}});

  REQUIRE_THROWS_AS(attainment_surface_50({{{1.0, 2.0, 3.0}}}), UnsupportedDimensionError);
  REQUIRE_THROWS_AS(attainment_surface_50({}), std::invalid_argument);

  // an observation-free run attains nothing, so a majority of two never forms
  REQUIRE(attainment_surface_50({front, {}}).empty());
}

TEST_CASE("attainment surface counts majorities on the union grid", "[mo_ranking]") {
  // three runs; the middle region is attained by two of three
  const std::vector<ObjectiveVector> r1 = {{0.0, 3.0}};
  const std::vector<ObjectiveVector> r2 = {{1.0, 1.0}};
  const std::vector<ObjectiveVector> r3 = {{3.0, 0.0}};
  const auto surface = attainment_surface_50({r1, r2, r3});
  // (1,1) is attained by r2 only; (1,3) by r1+r2; (3,1) by r2+r3
  REQUIRE(surface == std::vector<std::array<double, 2>>{{1.0, 3.0}, {3.0, 1.0}});
}

TEST_CASE("attainment surface equals the literal grid construction", "[mo_ranking]") {
  RandomStream rng(404);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n_runs = 1 + rng.uniform_int(5);
    std::vector<std::vector<ObjectiveVector>> runs(n_runs);
    std::vector<std::vector<std::array<double, 2>>> raw(n_runs);
    for (std::size_t r = 0; r < n_runs; ++r) {
      const std::size_t n_pts = 1 + rng.uniform_int(6);
      for (std::size_t i = 0; i < n_pts; ++i) {
        const double f1 = std::floor(rng.uniform() * 6.0);
        const double f2 = std::floor(rng.uniform() * 6.0);
        runs[r].push_back({f1, f2});
        raw[r].push_back({f1, f2});
      }
    }
    const auto expected = oracle::attainment_grid(raw, n_runs / 2 + 1);
    REQUIRE(attainment_surface_50(runs) == expected);
  }
}

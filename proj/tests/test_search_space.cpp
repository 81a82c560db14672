#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "metatpe/search_space.hpp"

using namespace metatpe;

namespace {

SearchSpace mixed_space() {
  return SearchSpace({
      ParamDomain::make_continuous("lr", 1e-4, 1e-1, true),
      ParamDomain::make_continuous("momentum", 0.0, 1.0),
      ParamDomain::make_ordinal("units", {16, 32, 64, 128, 256, 512}),
      ParamDomain::make_categorical("activation", {"relu", "tanh"}),
  });
}

}  // namespace

TEST_CASE("continuous scaling maps linearly into the unit interval", "[search_space]") {
  SearchSpace space({ParamDomain::make_continuous("x", 0.0, 10.0)});
  Config c;
  c.values = {5.0};
  REQUIRE(to_unit(space, c).coords[0] == Catch::Approx(0.5));

  UnitConfig u;
  u.coords = {0.25};
  REQUIRE(std::get<double>(from_unit(space, u).values[0]) == Catch::Approx(2.5));
}

TEST_CASE("log-scaled parameters transform before scaling", "[search_space]") {
  SearchSpace space({ParamDomain::make_continuous("lr", 1e-4, 1e-1, true)});
  Config c;
  c.values = {1e-4};
  REQUIRE(to_unit(space, c).coords[0] == Catch::Approx(0.0));
  c.values = {1e-1};
  REQUIRE(to_unit(space, c).coords[0] == Catch::Approx(1.0));
  c.values = {std::sqrt(1e-4 * 1e-1)};  // geometric midpoint
  REQUIRE(to_unit(space, c).coords[0] == Catch::Approx(0.5));
}

TEST_CASE("ordinal levels map to index fractions", "[search_space]") {
  SearchSpace space({ParamDomain::make_ordinal("units", {16, 32, 64, 128, 256, 512})});
  Config c;
  c.values = {16.0};
  REQUIRE(to_unit(space, c).coords[0] == 0.0);
  c.values = {512.0};
  REQUIRE(to_unit(space, c).coords[0] == 1.0);

  // snapping rounds half up: 0.5 * 5 = 2.5 -> index 3
  UnitConfig u;
  u.coords = {0.5};
  REQUIRE(std::get<double>(from_unit(space, u).values[0]) == 128.0);

  SearchSpace three({ParamDomain::make_ordinal("k", {1, 2, 3})});
  u.coords = {1.0};
  REQUIRE(std::get<double>(from_unit(three, u).values[0]) == 3.0);
}

TEST_CASE("categorical values ride on their index", "[search_space]") {
  SearchSpace space({ParamDomain::make_categorical("act", {"ReLU", "tanh"})});
  Config c;
  c.values = {std::string("ReLU")};
  REQUIRE(to_unit(space, c).coords[0] == 0.0);
  UnitConfig u;
  u.coords = {1.0};
  REQUIRE(std::get<std::string>(from_unit(space, u).values[0]) == "tanh");
}

TEST_CASE("out-of-domain values are rejected", "[search_space]") {
  SearchSpace space = mixed_space();
  Config c;
  c.values = {1e-2, 1.5, 64.0, std::string("relu")};
  REQUIRE_THROWS_AS(to_unit(space, c), DomainError);
  c.values = {1e-2, 0.5, 65.0, std::string("relu")};  // not a level
  REQUIRE_THROWS_AS(to_unit(space, c), DomainError);
  c.values = {1e-2, 0.5, 64.0, std::string("gelu")};  // not a category
  REQUIRE_THROWS_AS(to_unit(space, c), DomainError);

  UnitConfig u;
  u.coords = {0.5, 1.5, 0.5, 0.0};
  REQUIRE_THROWS_AS(from_unit(space, u), DomainError);
  u.coords = {0.5, 0.5, 0.5, 2.0};  // category index out of range
  REQUIRE_THROWS_AS(from_unit(space, u), DomainError);
}

TEST_CASE("invalid domains are rejected at construction", "[search_space]") {
  REQUIRE_THROWS_AS(ParamDomain::make_continuous("x", 2.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ParamDomain::make_continuous("x", -1.0, 1.0, true), std::invalid_argument);
  REQUIRE_THROWS_AS(ParamDomain::make_ordinal("x", {1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(ParamDomain::make_ordinal("x", {2.0, 1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(ParamDomain::make_categorical("x", {"a"}), std::invalid_argument);
  REQUIRE_THROWS_AS(ParamDomain::make_categorical("x", {"a", "a"}), std::invalid_argument);
  REQUIRE_THROWS_AS(SearchSpace({ParamDomain::make_continuous("x", 0, 1),
                                 ParamDomain::make_continuous("x", 0, 1)}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(SearchSpace(std::vector<ParamDomain>{}), std::invalid_argument);
}

TEST_CASE("unit round trip restores configurations", "[search_space]") {
  SearchSpace space = mixed_space();
  RandomStream rng(2024);
  for (int i = 0; i < 100; ++i) {
    const Config c = sample_uniform(space, rng);
    const UnitConfig u = to_unit(space, c);
    for (const double coord : {u.coords[0], u.coords[1]}) {
      REQUIRE(coord >= 0.0);
      REQUIRE(coord <= 1.0);
    }
    const Config back = from_unit(space, u);
    REQUIRE(std::get<double>(back.values[0]) ==
            Catch::Approx(std::get<double>(c.values[0])).epsilon(1e-12));
    REQUIRE(std::get<double>(back.values[1]) ==
            Catch::Approx(std::get<double>(c.values[1])).epsilon(1e-12));
    REQUIRE(std::get<double>(back.values[2]) == std::get<double>(c.values[2]));
    REQUIRE(std::get<std::string>(back.values[3]) == std::get<std::string>(c.values[3]));
  }
}

TEST_CASE("uniform sampling is reproducible and uniform", "[search_space]") {
  SearchSpace space({ParamDomain::make_continuous("x", 0.0, 1.0),
                     ParamDomain::make_categorical("c", {"a", "b", "c", "d"})});

  RandomStream r1(99);
  RandomStream r2(99);
  for (int i = 0; i < 50; ++i) {
    REQUIRE(sample_uniform(space, r1) == sample_uniform(space, r2));
  }

  // category frequencies over 1e5 draws
  RandomStream rng(7);
  std::vector<int> hits(4, 0);
  const int n = 100000;
  std::vector<int> bins(20, 0);
  for (int i = 0; i < n; ++i) {
    const Config c = sample_uniform(space, rng);
    const double x = std::get<double>(c.values[0]);
    ++bins[std::min(19, static_cast<int>(x * 20.0))];
    const std::string& label = std::get<std::string>(c.values[1]);
    ++hits[label == "a" ? 0 : label == "b" ? 1 : label == "c" ? 2 : 3];
  }
  for (const int h : hits) {
    REQUIRE(std::abs(h / static_cast<double>(n) - 0.25) < 0.01);
  }

  // chi-square uniformity of the continuous coordinate, 20 bins:
  // critical value for 19 dof at alpha = 0.01 is 36.191
  const double expected = n / 20.0;
  double chi2 = 0.0;
  for (const int b : bins) {
    const double diff = b - expected;
    chi2 += diff * diff / expected;
  }
  REQUIRE(chi2 < 36.191);
}

TEST_CASE("cardinality multiplies finite domains", "[search_space]") {
  SearchSpace space({ParamDomain::make_ordinal("a", {1, 2, 3}),
                     ParamDomain::make_categorical("b", {"x", "y"})});
  REQUIRE(space.cardinality() == 6);
  REQUIRE(mixed_space().cardinality() == 0);  // continuous present
}

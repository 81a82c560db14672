#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "metatpe/errors.hpp"
#include "metatpe/random.hpp"

namespace metatpe {

enum class ParamKind { continuous, ordinal, categorical };

// One parameter of the optimization domain. Continuous parameters live on
// [lo, hi] (optionally log-scaled), ordinals on a finite increasing grid of
// real levels, categoricals on a set of labels.
struct ParamDomain {
  std::string name;
  ParamKind kind = ParamKind::continuous;
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;
  std::vector<double> levels;
  std::vector<std::string> categories;

  static ParamDomain make_continuous(std::string name, double lo, double hi,
                                     bool log_scale = false) {
    ParamDomain p;
    p.name = std::move(name);
    p.kind = ParamKind::continuous;
    p.lo = lo;
    p.hi = hi;
    p.log_scale = log_scale;
    p.validate();
    return p;
  }

  static ParamDomain make_ordinal(std::string name, std::vector<double> levels,
                                  bool log_scale = false) {
    ParamDomain p;
    p.name = std::move(name);
    p.kind = ParamKind::ordinal;
    p.levels = std::move(levels);
    p.log_scale = log_scale;
    p.validate();
    return p;
  }

  static ParamDomain make_categorical(std::string name,
                                      std::vector<std::string> categories) {
    ParamDomain p;
    p.name = std::move(name);
    p.kind = ParamKind::categorical;
    p.categories = std::move(categories);
    p.validate();
    return p;
  }

  bool is_numerical() const { return kind != ParamKind::categorical; }

  std::size_t category_count() const { return categories.size(); }

  // Number of distinct values; 0 means uncountable (continuous).
  std::size_t cardinality() const {
    switch (kind) {
      case ParamKind::continuous: return 0;
      case ParamKind::ordinal: return levels.size();
      case ParamKind::categorical: return categories.size();
    }
    return 0;
  }

  void validate() const {
    if (name.empty()) throw std::invalid_argument("parameter name must be non-empty");
    switch (kind) {
      case ParamKind::continuous:
        if (!(lo < hi))
          throw std::invalid_argument("continuous parameter '" + name + "': lo must be < hi");
        if (log_scale && !(lo > 0.0))
          throw std::invalid_argument("continuous parameter '" + name +
                                      "': log scale requires lo > 0");
        break;
      case ParamKind::ordinal: {
        if (levels.size() < 2)
          throw std::invalid_argument("ordinal parameter '" + name + "' needs >= 2 levels");
        for (std::size_t i = 1; i < levels.size(); ++i) {
          if (!(levels[i - 1] < levels[i]))
            throw std::invalid_argument("ordinal parameter '" + name +
                                        "': levels must be strictly increasing");
        }
        if (log_scale && !(levels.front() > 0.0))
          throw std::invalid_argument("ordinal parameter '" + name +
                                      "': log scale requires positive levels");
        break;
      }
      case ParamKind::categorical: {
        if (categories.size() < 2)
          throw std::invalid_argument("categorical parameter '" + name + "' needs >= 2 categories");
        for (std::size_t i = 0; i < categories.size(); ++i) {
          for (std::size_t j = i + 1; j < categories.size(); ++j) {
            if (categories[i] == categories[j])
              throw std::invalid_argument("categorical parameter '" + name +
                                          "': duplicate category '" + categories[i] + "'");
          }
        }
        break;
      }
    }
  }
};

// A value in native units: a real for continuous/ordinal, a label for categorical.
using ParamValue = std::variant<double, std::string>;

// A full configuration in native units, ordered as the space's parameters.
struct Config {
  std::vector<ParamValue> values;

  bool operator==(const Config& other) const { return values == other.values; }
};

// A configuration in the internal representation: numerical coordinates are
// scaled into [0, 1]; categorical coordinates carry the category index
// (an exact small integer stored as double).
struct UnitConfig {
  std::vector<double> coords;

  bool operator==(const UnitConfig& other) const { return coords == other.coords; }
};

class SearchSpace {
 public:
  SearchSpace() = default;

  explicit SearchSpace(std::vector<ParamDomain> params) : params_(std::move(params)) {
    if (params_.empty()) throw std::invalid_argument("search space needs >= 1 parameter");
    for (const auto& p : params_) p.validate();
    for (std::size_t i = 0; i < params_.size(); ++i) {
      for (std::size_t j = i + 1; j < params_.size(); ++j) {
        if (params_[i].name == params_[j].name)
          throw std::invalid_argument("duplicate parameter name '" + params_[i].name + "'");
      }
    }
  }

  std::size_t size() const { return params_.size(); }
  const ParamDomain& param(std::size_t d) const { return params_[d]; }
  const std::vector<ParamDomain>& params() const { return params_; }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t d = 0; d < params_.size(); ++d) {
      if (params_[d].name == name) return d;
    }
    throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
  }

  // Product of per-parameter cardinalities; 0 if any parameter is continuous
  // or the product overflows.
  std::size_t cardinality() const {
    std::size_t total = 1;
    for (const auto& p : params_) {
      const std::size_t c = p.cardinality();
      if (c == 0) return 0;
      if (total > std::numeric_limits<std::size_t>::max() / c) return 0;
      total *= c;
    }
    return total;
  }

 private:
  std::vector<ParamDomain> params_;
};

namespace detail {

inline double continuous_to_unit(const ParamDomain& p, double x) {
  if (!(x >= p.lo && x <= p.hi))
    throw DomainError("value " + std::to_string(x) + " outside [" + std::to_string(p.lo) + ", " +
                      std::to_string(p.hi) + "] for parameter '" + p.name + "'");
  if (p.log_scale) {
    return (std::log(x) - std::log(p.lo)) / (std::log(p.hi) - std::log(p.lo));
  }
  return (x - p.lo) / (p.hi - p.lo);
}

inline double continuous_from_unit(const ParamDomain& p, double u) {
  if (p.log_scale) {
    return std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)));
  }
  return p.lo + u * (p.hi - p.lo);
}

inline std::size_t ordinal_index(const ParamDomain& p, double x) {
  for (std::size_t i = 0; i < p.levels.size(); ++i) {
    if (p.levels[i] == x) return i;
  }
  throw DomainError("value " + std::to_string(x) + " is not a level of ordinal parameter '" +
                    p.name + "'");
}

inline std::size_t category_index(const ParamDomain& p, const std::string& label) {
  for (std::size_t i = 0; i < p.categories.size(); ++i) {
    if (p.categories[i] == label) return i;
  }
  throw DomainError("label '" + label + "' is not a category of parameter '" + p.name + "'");
}

inline void check_unit_coord(const ParamDomain& p, double u) {
  if (!(u >= 0.0 && u <= 1.0))
    throw DomainError("unit coordinate " + std::to_string(u) + " outside [0, 1] for parameter '" +
                      p.name + "'");
}

inline std::size_t categorical_coord_to_index(const ParamDomain& p, double coord) {
  const double rounded = std::floor(coord + 0.5);
  if (std::abs(coord - rounded) > 1e-9 || rounded < 0.0 ||
      rounded >= static_cast<double>(p.categories.size()))
    throw DomainError("coordinate " + std::to_string(coord) +
                      " is not a category index of parameter '" + p.name + "'");
  return static_cast<std::size_t>(rounded);
}

}  // namespace detail

// Maps a native configuration into the unit representation. Continuous values
// scale linearly (after the log transform when log-scaled); ordinal values map
// their level index i to i/(L-1); categorical values map to their index.
inline UnitConfig to_unit(const SearchSpace& space, const Config& c) {
  if (c.values.size() != space.size())
    throw DomainError("configuration has " + std::to_string(c.values.size()) +
                      " values for a space of dimension " + std::to_string(space.size()));
  UnitConfig u;
  u.coords.resize(space.size());
  for (std::size_t d = 0; d < space.size(); ++d) {
    const ParamDomain& p = space.param(d);
    switch (p.kind) {
      case ParamKind::continuous: {
        const double* x = std::get_if<double>(&c.values[d]);
        if (!x) throw DomainError("parameter '" + p.name + "' expects a real value");
        u.coords[d] = detail::continuous_to_unit(p, *x);
        break;
      }
      case ParamKind::ordinal: {
        const double* x = std::get_if<double>(&c.values[d]);
        if (!x) throw DomainError("parameter '" + p.name + "' expects a real value");
        const std::size_t i = detail::ordinal_index(p, *x);
        u.coords[d] = static_cast<double>(i) / static_cast<double>(p.levels.size() - 1);
        break;
      }
      case ParamKind::categorical: {
        const std::string* s = std::get_if<std::string>(&c.values[d]);
        if (!s) throw DomainError("parameter '" + p.name + "' expects a category label");
        u.coords[d] = static_cast<double>(detail::category_index(p, *s));
        break;
      }
    }
  }
  return u;
}

// Inverse of to_unit. Ordinal coordinates snap to the nearest level index
// (round half up); categorical coordinates must be integral indices.
inline Config from_unit(const SearchSpace& space, const UnitConfig& u) {
  if (u.coords.size() != space.size())
    throw DomainError("unit configuration has " + std::to_string(u.coords.size()) +
                      " coordinates for a space of dimension " + std::to_string(space.size()));
  Config c;
  c.values.resize(space.size());
  for (std::size_t d = 0; d < space.size(); ++d) {
    const ParamDomain& p = space.param(d);
    switch (p.kind) {
      case ParamKind::continuous:
        detail::check_unit_coord(p, u.coords[d]);
        c.values[d] = detail::continuous_from_unit(p, u.coords[d]);
        break;
      case ParamKind::ordinal: {
        detail::check_unit_coord(p, u.coords[d]);
        const double scaled = u.coords[d] * static_cast<double>(p.levels.size() - 1);
        const std::size_t i = static_cast<std::size_t>(std::floor(scaled + 0.5));
        c.values[d] = p.levels[std::min(i, p.levels.size() - 1)];
        break;
      }
      case ParamKind::categorical: {
        const std::size_t i = detail::categorical_coord_to_index(p, u.coords[d]);
        c.values[d] = p.categories[i];
        break;
      }
    }
  }
  return c;
}

// Uniform draw over the space: each numerical coordinate uniform in [0, 1) of
// unit space, each categorical uniform over its categories.
inline Config sample_uniform(const SearchSpace& space, RandomStream& rng) {
  UnitConfig u;
  u.coords.resize(space.size());
  for (std::size_t d = 0; d < space.size(); ++d) {
    const ParamDomain& p = space.param(d);
    if (p.is_numerical()) {
      u.coords[d] = rng.uniform();
    } else {
      u.coords[d] = static_cast<double>(rng.uniform_int(p.category_count()));
    }
  }
  return from_unit(space, u);
}

}  // namespace metatpe

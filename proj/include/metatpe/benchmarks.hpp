#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metatpe/errors.hpp"
#include "metatpe/mo_ranking.hpp"
#include "metatpe/optimizer.hpp"
#include "metatpe/random.hpp"
#include "metatpe/search_space.hpp"

namespace metatpe {

struct ObjectiveSpec {
  std::string name;
  Direction direction = Direction::minimize;
  double worst = 0.0;
  std::optional<double> best;
};

namespace detail {

using nlohmann::json;

inline json space_to_json(const SearchSpace& space) {
  json out = json::array();
  for (const auto& p : space.params()) {
    json jp;
    jp["name"] = p.name;
    switch (p.kind) {
      case ParamKind::continuous:
        jp["kind"] = "continuous";
        jp["lo"] = p.lo;
        jp["hi"] = p.hi;
        jp["log_scale"] = p.log_scale;
        break;
      case ParamKind::ordinal:
        jp["kind"] = "ordinal";
        jp["levels"] = p.levels;
        jp["log_scale"] = p.log_scale;
        break;
      case ParamKind::categorical:
        jp["kind"] = "categorical";
        jp["categories"] = p.categories;
        break;
    }
    out.push_back(std::move(jp));
  }
  return out;
}

inline SearchSpace space_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("'space' must be a non-empty array");
  std::vector<ParamDomain> params;
  for (const auto& jp : j) {
    if (!jp.contains("name") || !jp.contains("kind"))
      throw ParseError("space entry needs 'name' and 'kind'");
    const std::string name = jp.at("name").get<std::string>();
    const std::string kind = jp.at("kind").get<std::string>();
    const bool log_scale = jp.value("log_scale", false);
    try {
      if (kind == "continuous") {
        params.push_back(ParamDomain::make_continuous(name, jp.at("lo").get<double>(),
                                                      jp.at("hi").get<double>(), log_scale));
      } else if (kind == "ordinal") {
        params.push_back(
            ParamDomain::make_ordinal(name, jp.at("levels").get<std::vector<double>>(), log_scale));
      } else if (kind == "categorical") {
        params.push_back(ParamDomain::make_categorical(
            name, jp.at("categories").get<std::vector<std::string>>()));
      } else {
        throw ParseError("unknown parameter kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError("invalid declaration of parameter '" + name + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError("invalid declaration of parameter '" + name + "': " + e.what());
    }
  }
  try {
    return SearchSpace(std::move(params));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid space: ") + e.what());
  }
}

inline json config_to_json(const SearchSpace& space, const Config& c) {
  json out = json::object();
  for (std::size_t d = 0; d < space.size(); ++d) {
    const ParamDomain& p = space.param(d);
    if (const double* x = std::get_if<double>(&c.values[d])) {
      out[p.name] = *x;
    } else {
      out[p.name] = std::get<std::string>(c.values[d]);
    }
  }
  return out;
}

inline Config config_from_json(const SearchSpace& space, const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": 'config' must be an object");
  Config c;
  c.values.resize(space.size());
  for (std::size_t d = 0; d < space.size(); ++d) {
    const ParamDomain& p = space.param(d);
    if (!j.contains(p.name)) throw ParseError(where + ": missing parameter '" + p.name + "'");
    const json& v = j.at(p.name);
    if (p.kind == ParamKind::categorical) {
      if (!v.is_string())
        throw ParseError(where + ": parameter '" + p.name + "' must be a category label");
      c.values[d] = v.get<std::string>();
    } else {
      if (!v.is_number())
        throw ParseError(where + ": parameter '" + p.name + "' must be a number");
      c.values[d] = v.get<double>();
    }
  }
  return c;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline double parse_double_exact(const std::string& cell, const std::string& where) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError(where + ": '" + cell + "' is not a plain decimal number");
  return value;
}

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

// The ellipsoid family used for the synthetic validation: a single-objective
// task on [-5, 5]^D whose optimum sits at (c, ..., c); larger offsets make the
// task less similar to the zero-offset target.
struct EllipsoidTask {
  double c = 0.0;
  std::size_t dim = 4;
  double lo = -5.0;
  double hi = 5.0;

  SearchSpace space() const {
    std::vector<ParamDomain> params;
    for (std::size_t d = 0; d < dim; ++d) {
      params.push_back(ParamDomain::make_continuous("x" + std::to_string(d + 1), lo, hi));
    }
    return SearchSpace(std::move(params));
  }

  double eval(const Config& config) const {
    if (config.values.size() != dim) throw DomainError("configuration dimension mismatch");
    double sum = 0.0;
    double scale = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double* x = std::get_if<double>(&config.values[d]);
      if (!x || !(*x >= lo && *x <= hi))
        throw DomainError("coordinate " + std::to_string(d + 1) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
      sum += scale * (*x - c) * (*x - c);
      scale *= 5.0;
    }
    return sum;
  }

  // Largest attainable value over the box; used as the normalization worst.
  double worst_value() const {
    double sum = 0.0;
    double scale = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double far_lo = (lo - c) * (lo - c);
      const double far_hi = (hi - c) * (hi - c);
      sum += scale * std::max(far_lo, far_hi);
      scale *= 5.0;
    }
    return sum;
  }
};

// A tabular benchmark: a finite search space plus one objective vector per
// recorded configuration. Objectives are stored in native units; lookup is
// the single point where maximize-direction objectives are negated, so all
// downstream optimization minimizes.
class TabularBenchmark {
 public:
  const std::string& name() const { return name_; }
  const SearchSpace& space() const { return space_; }
  const std::vector<ObjectiveSpec>& objectives() const { return objective_specs_; }
  std::size_t size() const { return configs_.size(); }
  const Config& config_at(std::size_t i) const { return configs_[i]; }
  const std::vector<double>& native_objectives_at(std::size_t i) const { return values_[i]; }

  // Exact-match retrieval on the minimized scale.
  ObjectiveVector lookup(const Config& config) const {
    const UnitConfig key = to_unit(space_, config);
    const auto it = index_.find(key.coords);
    if (it == index_.end()) throw MissingRecordError("configuration not present in the table");
    return minimized(values_[it->second]);
  }

  ObjectiveVector minimized(const std::vector<double>& native) const {
    ObjectiveVector out;
    out.values.resize(native.size());
    for (std::size_t m = 0; m < native.size(); ++m) {
      out.values[m] = objective_specs_[m].direction == Direction::maximize ? -native[m]
                                                                           : native[m];
    }
    return out;
  }

  double to_native(std::size_t m, double minimized_value) const {
    return objective_specs_[m].direction == Direction::maximize ? -minimized_value
                                                                : minimized_value;
  }

  // Extrema on the minimized scale: declared bounds when present, otherwise
  // the observed extrema of the table.
  std::pair<std::vector<double>, std::vector<double>> normalization_bounds() const {
    const std::size_t m_count = objective_specs_.size();
    std::vector<double> f_min(m_count), f_max(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
      const bool maximize = objective_specs_[m].direction == Direction::maximize;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (const auto& v : values_) {
        const double x = maximize ? -v[m] : v[m];
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      f_max[m] = maximize ? -objective_specs_[m].worst : objective_specs_[m].worst;
      f_min[m] = objective_specs_[m].best
                     ? (maximize ? -*objective_specs_[m].best : *objective_specs_[m].best)
                     : lo;
      if (!(f_min[m] < f_max[m])) {
        f_min[m] = lo;
        f_max[m] = std::max(hi, std::nextafter(lo, std::numeric_limits<double>::infinity()));
      }
    }
    return {f_min, f_max};
  }

  static TabularBenchmark load(const std::string& path) {
    const detail::json j = detail::load_json_file(path);
    TabularBenchmark bench;
    bench.name_ = j.value("name", std::string("benchmark"));
    if (!j.contains("space")) throw ParseError(path + ": missing 'space'");
    bench.space_ = detail::space_from_json(j.at("space"));
    if (!j.contains("objectives") || !j.at("objectives").is_array() || j.at("objectives").empty())
      throw ParseError(path + ": missing 'objectives'");
    for (const auto& jo : j.at("objectives")) {
      ObjectiveSpec spec;
      spec.name = jo.at("name").get<std::string>();
      const std::string dir = jo.at("direction").get<std::string>();
      if (dir == "minimize") {
        spec.direction = Direction::minimize;
      } else if (dir == "maximize") {
        spec.direction = Direction::maximize;
      } else {
        throw ParseError(path + ": objective '" + spec.name + "' has unknown direction '" + dir +
                         "'");
      }
      if (!jo.contains("worst")) throw ParseError(path + ": objective '" + spec.name +
                                                  "' needs a declared worst value");
      spec.worst = jo.at("worst").get<double>();
      if (jo.contains("best")) spec.best = jo.at("best").get<double>();
      bench.objective_specs_.push_back(std::move(spec));
    }

    if (j.contains("records") == j.contains("records_csv"))
      throw ParseError(path + ": exactly one of 'records' or 'records_csv' is required");
    if (j.contains("records")) {
      bench.load_records_json(j.at("records"), path);
    } else {
      const std::filesystem::path sidecar =
          std::filesystem::path(path).parent_path() / j.at("records_csv").get<std::string>();
      bench.load_records_csv(sidecar.string());
    }

    const std::size_t cardinality = bench.space_.cardinality();
    if (cardinality != 0 && bench.configs_.size() > cardinality)
      throw ParseError(path + ": more records than the space admits (" +
                       std::to_string(bench.configs_.size()) + " > " +
                       std::to_string(cardinality) + ")");
    return bench;
  }

  void save(const std::string& path) const {
    detail::json j;
    j["name"] = name_;
    j["space"] = detail::space_to_json(space_);
    j["objectives"] = detail::json::array();
    for (const auto& spec : objective_specs_) {
      detail::json jo;
      jo["name"] = spec.name;
      jo["direction"] = spec.direction == Direction::maximize ? "maximize" : "minimize";
      jo["worst"] = spec.worst;
      if (spec.best) jo["best"] = *spec.best;
      j["objectives"].push_back(std::move(jo));
    }
    j["records"] = detail::json::array();
    for (std::size_t i = 0; i < configs_.size(); ++i) {
      detail::json jr;
      jr["config"] = detail::config_to_json(space_, configs_[i]);
      jr["objectives"] = values_[i];
      jr["complete"] = complete_[i];
      j["records"].push_back(std::move(jr));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(1) << '\n';
  }

  // In-memory construction (fixtures, generated tables).
  static TabularBenchmark from_records(std::string name, SearchSpace space,
                                       std::vector<ObjectiveSpec> objectives,
                                       std::vector<Config> configs,
                                       std::vector<std::vector<double>> values) {
    TabularBenchmark bench;
    bench.name_ = std::move(name);
    bench.space_ = std::move(space);
    bench.objective_specs_ = std::move(objectives);
    for (std::size_t i = 0; i < configs.size(); ++i) {
      bench.insert_record(std::move(configs[i]), std::move(values[i]), true,
                          "record " + std::to_string(i));
    }
    return bench;
  }

 private:
  void insert_record(Config config, std::vector<double> values, bool complete,
                     const std::string& where) {
    if (values.size() != objective_specs_.size())
      throw ParseError(where + ": expected " + std::to_string(objective_specs_.size()) +
                       " objective values");
    const UnitConfig key = to_unit(space_, config);  // domain validation happens here
    if (!index_.emplace(key.coords, configs_.size()).second)
      throw ParseError(where + ": duplicate configuration");
    configs_.push_back(std::move(config));
    values_.push_back(std::move(values));
    complete_.push_back(complete);
  }

  void load_records_json(const detail::json& records, const std::string& path) {
    if (!records.is_array()) throw ParseError(path + ": 'records' must be an array");
    for (std::size_t i = 0; i < records.size(); ++i) {
      const std::string where = path + ": record " + std::to_string(i);
      const auto& jr = records[i];
      if (!jr.contains("config")) throw ParseError(where + ": missing 'config'");
      Config config = detail::config_from_json(space_, jr.at("config"), where);
      const bool complete = jr.value("complete", true);
      std::vector<double> values(objective_specs_.size());
      const detail::json objs = jr.value("objectives", detail::json::array());
      if (!objs.is_array()) throw ParseError(where + ": 'objectives' must be an array");
      if (objs.size() > objective_specs_.size())
        throw ParseError(where + ": too many objective values");
      for (std::size_t m = 0; m < objective_specs_.size(); ++m) {
        if (m < objs.size() && !objs[m].is_null()) {
          if (!objs[m].is_number()) throw ParseError(where + ": objective values must be numbers");
          values[m] = objs[m].get<double>();
        } else {
          if (complete)
            throw ParseError(where + ": missing objective value in a record not flagged incomplete");
          values[m] = objective_specs_[m].worst;  // worst-value padding
        }
      }
      insert_record(std::move(config), std::move(values), complete, where);
    }
  }

  void load_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open records sidecar '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ":1: empty records sidecar");
    const std::vector<std::string> header = detail::split_csv_line(line);
    std::vector<std::size_t> param_cols(space_.size());
    std::vector<std::size_t> objective_cols(objective_specs_.size());
    auto find_col = [&](const std::string& name) {
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == name) return c;
      }
      throw ParseError(path + ":1: missing column '" + name + "'");
    };
    for (std::size_t d = 0; d < space_.size(); ++d) param_cols[d] = find_col(space_.param(d).name);
    for (std::size_t m = 0; m < objective_specs_.size(); ++m)
      objective_cols[m] = find_col(objective_specs_[m].name);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const std::string where = path + ":" + std::to_string(line_no);
      const std::vector<std::string> cells = detail::split_csv_line(line);
      if (cells.size() != header.size())
        throw ParseError(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                         std::to_string(cells.size()));
      Config config;
      config.values.resize(space_.size());
      for (std::size_t d = 0; d < space_.size(); ++d) {
        const ParamDomain& p = space_.param(d);
        const std::string& cell = cells[param_cols[d]];
        if (p.kind == ParamKind::categorical) {
          config.values[d] = cell;
        } else {
          config.values[d] = detail::parse_double_exact(cell, where);
        }
      }
      bool complete = true;
      std::vector<double> values(objective_specs_.size());
      for (std::size_t m = 0; m < objective_specs_.size(); ++m) {
        const std::string& cell = cells[objective_cols[m]];
        if (cell.empty()) {
          complete = false;
          values[m] = objective_specs_[m].worst;  // worst-value padding
        } else {
          values[m] = detail::parse_double_exact(cell, where);
        }
      }
      insert_record(std::move(config), std::move(values), complete, where);
    }
    if (configs_.empty()) throw ParseError(path + ": no records");
  }

  std::string name_;
  SearchSpace space_;
  std::vector<ObjectiveSpec> objective_specs_;
  std::vector<Config> configs_;
  std::vector<std::vector<double>> values_;
  std::vector<bool> complete_;
  std::map<std::vector<double>, std::size_t> index_;
};

// An observation archive with its space and objective directions. Observation
// objective values are held on the minimized scale; files store native units.
struct Dataset {
  std::string name;
  SearchSpace space;
  std::vector<ObjectiveSpec> objectives;
  std::vector<Observation> observations;
};

inline Dataset load_dataset(const std::string& path) {
  const detail::json j = detail::load_json_file(path);
  Dataset ds;
  ds.name = j.value("name", std::string("dataset"));
  if (!j.contains("space")) throw ParseError(path + ": missing 'space'");
  ds.space = detail::space_from_json(j.at("space"));
  if (j.contains("objectives")) {
    for (const auto& jo : j.at("objectives")) {
      ObjectiveSpec spec;
      spec.name = jo.at("name").get<std::string>();
      spec.direction =
          jo.at("direction").get<std::string>() == "maximize" ? Direction::maximize
                                                              : Direction::minimize;
      ds.objectives.push_back(std::move(spec));
    }
  }
  if (!j.contains("observations") || !j.at("observations").is_array())
    throw ParseError(path + ": missing 'observations'");
  const auto& jobs = j.at("observations");
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string where = path + ": observation " + std::to_string(i);
    Observation o;
    o.config = detail::config_from_json(ds.space, jobs[i].at("config"), where);
    const auto native = jobs[i].at("objectives").get<std::vector<double>>();
    if (ds.objectives.empty()) {
      ds.objectives.resize(native.size());
      for (std::size_t m = 0; m < native.size(); ++m)
        ds.objectives[m].name = "f" + std::to_string(m + 1);
    }
    if (native.size() != ds.objectives.size())
      throw ParseError(where + ": expected " + std::to_string(ds.objectives.size()) +
                       " objective values");
    o.objectives.values.resize(native.size());
    for (std::size_t m = 0; m < native.size(); ++m) {
      o.objectives.values[m] =
          ds.objectives[m].direction == Direction::maximize ? -native[m] : native[m];
    }
    o.trial_index = static_cast<int>(i) + 1;
    ds.observations.push_back(std::move(o));
  }
  return ds;
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
  detail::json j;
  j["name"] = ds.name;
  j["space"] = detail::space_to_json(ds.space);
  j["objectives"] = detail::json::array();
  for (const auto& spec : ds.objectives) {
    detail::json jo;
    jo["name"] = spec.name;
    jo["direction"] = spec.direction == Direction::maximize ? "maximize" : "minimize";
    j["objectives"].push_back(std::move(jo));
  }
  j["observations"] = detail::json::array();
  for (const auto& o : ds.observations) {
    detail::json jo;
    jo["config"] = detail::config_to_json(ds.space, o.config);
    std::vector<double> native(o.objectives.size());
    for (std::size_t m = 0; m < native.size(); ++m) {
      native[m] = ds.objectives[m].direction == Direction::maximize ? -o.objectives.values[m]
                                                                    : o.objectives.values[m];
    }
    jo["objectives"] = native;
    j["observations"].push_back(std::move(jo));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
}

// Uniform-random metadata from a tabular benchmark: n distinct records,
// objectives on the minimized scale.
inline std::vector<Observation> make_metadata(const TabularBenchmark& bench, std::size_t n,
                                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("metadata needs >= 1 observation");
  if (n > bench.size())
    throw std::invalid_argument("requested " + std::to_string(n) + " observations from a table of " +
                                std::to_string(bench.size()));
  RandomStream rng(seed);
  std::vector<std::size_t> indices(bench.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(indices.size() - i));
    std::swap(indices[i], indices[j]);
  }
  std::vector<Observation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Observation o;
    o.config = bench.config_at(indices[i]);
    o.objectives = bench.minimized(bench.native_objectives_at(indices[i]));
    o.trial_index = static_cast<int>(i) + 1;
    out.push_back(std::move(o));
  }
  return out;
}

// Uniform-random metadata from an ellipsoid task (with replacement).
inline std::vector<Observation> make_metadata(const EllipsoidTask& task, std::size_t n,
                                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("metadata needs >= 1 observation");
  RandomStream rng(seed);
  const SearchSpace space = task.space();
  std::vector<Observation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Observation o;
    o.config = sample_uniform(space, rng);
    o.objectives = ObjectiveVector{task.eval(o.config)};
    o.trial_index = static_cast<int>(i) + 1;
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace metatpe

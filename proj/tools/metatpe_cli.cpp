// Command-line frontend: run optimizers on benchmarks, inspect task
// similarities, and evaluate result files (hypervolume curves, attainment
// surfaces). Results are JSON Lines, one record per evaluation, so long runs
// stream and partial output survives interruption.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metatpe/metatpe.hpp"

namespace {

using nlohmann::json;
using namespace metatpe;

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("METATPE_LOG");
    if (!env) return LogLevel::error;
    const std::string value(env);
    if (value == "debug") return LogLevel::debug;
    if (value == "info") return LogLevel::info;
    return LogLevel::error;
  }();
  return level;
}

void log_info(const std::string& message) {
  if (log_level() >= LogLevel::info) std::cerr << "[info] " << message << "\n";
}

void log_debug(const std::string& message) {
  if (log_level() >= LogLevel::debug) std::cerr << "[debug] " << message << "\n";
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A benchmark the runner can evaluate: either the builtin ellipsoid family or
// a tabular file. Evaluation is always on the minimized scale.
struct Benchmark {
  SearchSpace space;
  std::vector<ObjectiveSpec> objectives;
  std::vector<double> f_min, f_max;
  std::function<std::vector<double>(const Config&)> eval;
  std::shared_ptr<TabularBenchmark> table;  // set for tabular sources
};

bool parse_ellipsoid(const std::string& source, EllipsoidTask& task) {
  if (source.rfind("ellipsoid", 0) != 0) return false;
  task = EllipsoidTask{};
  if (source.size() == 9) return true;
  if (source[9] != ':') return false;
  std::stringstream ss(source.substr(10));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("bad ellipsoid parameter '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "c") {
        task.c = std::stod(value);
      } else if (key == "d") {
        task.dim = static_cast<std::size_t>(std::stoul(value));
        if (task.dim < 1) throw UsageError("ellipsoid dimension must be >= 1");
      } else {
        throw UsageError("unknown ellipsoid parameter '" + key + "'");
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception&) {
      throw UsageError("bad ellipsoid parameter value '" + item + "'");
    }
  }
  return true;
}

Benchmark open_benchmark(const std::string& source) {
  Benchmark bench;
  EllipsoidTask task;
  if (parse_ellipsoid(source, task)) {
    bench.space = task.space();
    bench.objectives = {{"f", Direction::minimize, task.worst_value(), 0.0}};
    bench.f_min = {0.0};
    bench.f_max = {task.worst_value()};
    bench.eval = [task](const Config& c) { return std::vector<double>{task.eval(c)}; };
    return bench;
  }
  if (!std::filesystem::exists(source))
    throw UsageError("unknown benchmark '" + source + "' (not a builtin, not a file)");
  bench.table = std::make_shared<TabularBenchmark>(TabularBenchmark::load(source));
  bench.space = bench.table->space();
  bench.objectives = bench.table->objectives();
  std::tie(bench.f_min, bench.f_max) = bench.table->normalization_bounds();
  const auto table = bench.table;
  bench.eval = [table](const Config& c) { return table->lookup(c).values; };
  return bench;
}

void require_same_space(const SearchSpace& a, const SearchSpace& b, const std::string& what) {
  if (a.size() != b.size()) throw UsageError(what + ": search space dimension mismatch");
  for (std::size_t d = 0; d < a.size(); ++d) {
    if (a.param(d).name != b.param(d).name || a.param(d).kind != b.param(d).kind)
      throw UsageError(what + ": search spaces disagree at parameter '" + a.param(d).name + "'");
  }
}

bool looks_like_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) return false;
  json j;
  try {
    j = json::parse(in);
  } catch (...) {
    return false;
  }
  return j.contains("observations");
}

// A meta source is a dataset file (observations used as-is) or a benchmark
// (file or builtin) from which `n` random observations are drawn.
std::vector<Observation> load_meta_source(const std::string& source, const SearchSpace& space,
                                          std::size_t n, std::uint64_t seed) {
  if (std::filesystem::exists(source) && looks_like_dataset(source)) {
    Dataset ds = load_dataset(source);
    require_same_space(space, ds.space, "meta source '" + source + "'");
    return std::move(ds.observations);
  }
  EllipsoidTask task;
  if (parse_ellipsoid(source, task)) {
    require_same_space(space, task.space(), "meta source '" + source + "'");
    return make_metadata(task, n, seed);
  }
  if (!std::filesystem::exists(source))
    throw UsageError("unknown meta source '" + source + "'");
  const TabularBenchmark table = TabularBenchmark::load(source);
  require_same_space(space, table.space(), "meta source '" + source + "'");
  return make_metadata(table, n, seed);
}

struct RunOptions {
  std::string benchmark;
  std::string method;
  std::vector<std::string> meta_sources;
  int meta_n = 100;
  int budget = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string dump_dataset;
  OptimizerConfig optimizer;
};

// One record per evaluation. `wall_time` is the only field allowed to differ
// between reruns of the same specification.
void write_record(std::ostream& os, const Benchmark& bench, int trial, const Config& config,
                  const std::vector<double>& minimized, double hv, double wall_time) {
  json record;
  record["trial_index"] = trial;
  record["config"] = detail::config_to_json(bench.space, config);
  std::vector<double> native(minimized.size());
  for (std::size_t m = 0; m < minimized.size(); ++m) {
    native[m] = bench.objectives[m].direction == Direction::maximize ? -minimized[m]
                                                                     : minimized[m];
  }
  record["objectives"] = native;
  record["hv"] = hv;
  record["wall_time"] = wall_time;
  os << record.dump() << "\n";
  os.flush();  // keep finished trials on disk if the run dies mid-way
}

int cmd_run(const RunOptions& opt) {
  static const std::vector<std::string> methods = {"tpe", "motpe", "metalearn-tpe", "random",
                                                   "warmstart-only"};
  if (std::find(methods.begin(), methods.end(), opt.method) == methods.end())
    throw UsageError("unknown method '" + opt.method + "'");
  const Benchmark bench = open_benchmark(opt.benchmark);

  std::vector<std::vector<Observation>> meta;
  for (std::size_t i = 0; i < opt.meta_sources.size(); ++i) {
    const std::uint64_t meta_seed = RandomStream(opt.seed).fork(9000 + i).key();
    meta.push_back(load_meta_source(opt.meta_sources[i], bench.space,
                                    static_cast<std::size_t>(opt.meta_n), meta_seed));
    log_info("meta source '" + opt.meta_sources[i] + "': " +
             std::to_string(meta.back().size()) + " observations");
  }
  if ((opt.method == "metalearn-tpe" || opt.method == "warmstart-only") && meta.empty())
    log_info("method '" + opt.method + "' started without meta sources");

  OptimizerConfig cfg = opt.optimizer;
  cfg.seed = opt.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (opt.budget < cfg.n_init) throw UsageError("budget must be >= n_init");

  std::ofstream out(opt.out);
  if (!out) throw std::runtime_error("cannot write '" + opt.out + "'");

  std::vector<ObjectiveVector> so_far;
  std::vector<Observation> archive;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  auto record = [&](int trial, const Config& c, const std::vector<double>& y) {
    so_far.push_back(ObjectiveVector(y));
    const double hv = normalized_hv(so_far, bench.f_min, bench.f_max);
    write_record(out, bench, trial, c, y, hv, elapsed());
    Observation o;
    o.config = c;
    o.objectives = ObjectiveVector(y);
    o.trial_index = trial;
    archive.push_back(std::move(o));
    log_debug("trial " + std::to_string(trial) + " hv " + std::to_string(hv));
  };

  if (opt.method == "random") {
    RandomStream rng(cfg.seed);
    for (int t = 1; t <= opt.budget; ++t) {
      const Config c = sample_uniform(bench.space, rng);
      record(t, c, bench.eval(c));
    }
  } else if (opt.method == "warmstart-only") {
    // top-10% of each meta archive in random order, then uniform random
    std::vector<TaskDataset> tasks;
    for (std::size_t m = 0; m < meta.size(); ++m) {
      TaskDataset task("meta-" + std::to_string(m + 1));
      for (const auto& o : meta[m]) task.add(bench.space, o.config, o.objectives);
      tasks.push_back(std::move(task));
    }
    std::vector<Config> pool;
    for (const auto& task : tasks) {
      std::vector<ObjectiveVector> objs;
      for (const auto& o : task.observations()) objs.push_back(o.objectives);
      const auto order = sorted_by_rank(objs);
      const std::size_t take = split_size(order.size(), 0.1);
      for (std::size_t i = 0; i < take; ++i) pool.push_back(task.observations()[order[i]].config);
    }
    RandomStream rng(cfg.seed);
    for (int t = 1; t <= opt.budget; ++t) {
      Config c;
      if (!pool.empty()) {
        const std::size_t i = static_cast<std::size_t>(rng.uniform_int(pool.size()));
        c = pool[i];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        c = sample_uniform(bench.space, rng);
      }
      record(t, c, bench.eval(c));
    }
  } else if (opt.method == "tpe" || opt.method == "motpe") {
    MoTpe optimizer(bench.space, cfg);
    for (int t = 1; t <= opt.budget; ++t) {
      const Config c = optimizer.ask();
      const auto y = bench.eval(c);
      optimizer.tell(c, y);
      record(t, c, y);
    }
  } else {  // metalearn-tpe
    MetaLearnTpe optimizer(bench.space, cfg, meta);
    for (int t = 1; t <= opt.budget; ++t) {
      const Config c = optimizer.ask();
      const auto y = bench.eval(c);
      optimizer.tell(c, y);
      record(t, c, y);
    }
    if (!optimizer.kernel().weights.empty()) {
      std::string row;
      for (const double w : optimizer.kernel().weights[0]) row += std::to_string(w) + " ";
      log_info("final task kernel row: " + row);
    }
  }

  if (!opt.dump_dataset.empty()) {
    Dataset ds;
    ds.name = opt.benchmark;
    ds.space = bench.space;
    ds.objectives = bench.objectives;
    ds.observations = std::move(archive);
    save_dataset(opt.dump_dataset, ds);
  }
  return 0;
}

struct SimilarityOptions {
  std::string target;
  std::vector<std::string> meta;
  double gamma = 0.1;
  double eta = 2.5;
  int n_mc = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

std::vector<UnitConfig> dl_points(const Dataset& ds, double gamma) {
  const auto [good, rest] = split_observations(ds.observations, gamma);
  std::vector<UnitConfig> points;
  points.reserve(good.size());
  for (const auto& o : good) points.push_back(to_unit(ds.space, o.config));
  return points;
}

int cmd_similarity(const SimilarityOptions& opt) {
  if (opt.n_mc < 2 || opt.n_mc % 2 != 0) throw UsageError("--n-mc must be even and >= 2");
  if (!(opt.gamma > 0.0 && opt.gamma <= 1.0)) throw UsageError("--gamma must be in (0, 1]");
  if (!(opt.eta > 1.0)) throw UsageError("--eta must be > 1");
  const Dataset target = load_dataset(opt.target);
  if (target.observations.empty()) throw UsageError("target dataset has no observations");
  std::vector<std::vector<UnitConfig>> dl_sets = {dl_points(target, opt.gamma)};
  for (const auto& path : opt.meta) {
    Dataset ds = load_dataset(path);
    require_same_space(target.space, ds.space, "meta dataset '" + path + "'");
    if (ds.observations.empty()) throw UsageError("meta dataset '" + path + "' is empty");
    dl_sets.push_back(dl_points(ds, opt.gamma));
  }

  RandomStream rng(opt.seed);
  TaskKernelDiagnostics diag;
  const TaskKernelMatrix kernel = compute_task_kernel(target.space, dl_sets, opt.gamma, opt.eta,
                                                      opt.n_mc, rng, {}, &diag);
  json report;
  report["similarities"] = kernel.similarities;
  report["kernel_row"] = kernel.weights[0];
  report["selected_dims"] = diag.selected_dims;
  report["avg_hpi"] = diag.avg_hpi;
  report["tv_distances"] = diag.tv_distances;
  json dl_sizes = json::array();
  for (const auto& dl : dl_sets) dl_sizes.push_back(dl.size());
  report["dl_sizes"] = dl_sizes;

  if (opt.out.empty()) {
    std::cout << report.dump(1) << "\n";
  } else {
    std::ofstream out(opt.out);
    if (!out) throw std::runtime_error("cannot write '" + opt.out + "'");
    out << report.dump(1) << "\n";
  }
  return 0;
}

struct CurveOptions {
  std::vector<std::string> results;
  std::vector<double> f_min, f_max;
  std::string directions;
  std::string format = "json";
  std::string out;
};

std::ostream& open_report(const CurveOptions& opt, std::ofstream& file) {
  if (opt.out.empty()) return std::cout;
  file.open(opt.out);
  if (!file) throw std::runtime_error("cannot write '" + opt.out + "'");
  return file;
}

std::vector<Direction> parse_directions(const std::string& text, std::size_t m) {
  std::vector<Direction> dirs(m, Direction::minimize);
  if (text.empty()) return dirs;
  std::stringstream ss(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= m) throw UsageError("more directions than objectives");
    if (item == "max" || item == "maximize") {
      dirs[i] = Direction::maximize;
    } else if (item == "min" || item == "minimize") {
      dirs[i] = Direction::minimize;
    } else {
      throw UsageError("direction must be min or max, got '" + item + "'");
    }
    ++i;
  }
  if (i != m) throw UsageError("expected " + std::to_string(m) + " directions");
  return dirs;
}

// Reads one JSONL results file into minimized objective vectors.
std::vector<std::vector<double>> read_results(const std::string& path, std::size_t& m_out) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open results file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.contains("objectives"))
      throw ParseError(path + ":" + std::to_string(line_no) + ": missing 'objectives'");
    rows.push_back(record.at("objectives").get<std::vector<double>>());
    if (m_out == 0) m_out = rows.back().size();
    if (rows.back().size() != m_out)
      throw UsageError(path + ": records with mismatched objective counts");
  }
  if (rows.empty()) throw UsageError("results file '" + path + "' is empty");
  return rows;
}

int cmd_hv(const CurveOptions& opt) {
  std::size_t m = 0;
  std::vector<std::vector<std::vector<double>>> runs;
  for (const auto& path : opt.results) runs.push_back(read_results(path, m));
  if (opt.f_min.size() != m || opt.f_max.size() != m)
    throw UsageError("--f-min/--f-max must list one value per objective");
  const std::vector<Direction> dirs = parse_directions(opt.directions, m);

  std::vector<std::vector<double>> curves;
  std::size_t shortest = std::numeric_limits<std::size_t>::max();
  for (const auto& run : runs) {
    std::vector<ObjectiveVector> so_far;
    std::vector<double> curve;
    for (const auto& native : run) {
      ObjectiveVector v;
      v.values.resize(m);
      for (std::size_t k = 0; k < m; ++k)
        v.values[k] = dirs[k] == Direction::maximize ? -native[k] : native[k];
      so_far.push_back(std::move(v));
      curve.push_back(normalized_hv(so_far, opt.f_min, opt.f_max));
    }
    shortest = std::min(shortest, curve.size());
    curves.push_back(std::move(curve));
  }

  std::vector<double> mean(shortest, 0.0), stderr_of_mean(shortest, 0.0);
  std::vector<int> trials(shortest);
  for (std::size_t t = 0; t < shortest; ++t) {
    trials[t] = static_cast<int>(t) + 1;
    double sum = 0.0;
    for (const auto& curve : curves) sum += curve[t];
    mean[t] = sum / static_cast<double>(curves.size());
    if (curves.size() > 1) {
      double ss = 0.0;
      for (const auto& curve : curves) ss += (curve[t] - mean[t]) * (curve[t] - mean[t]);
      const double sd = std::sqrt(ss / static_cast<double>(curves.size() - 1));
      stderr_of_mean[t] = sd / std::sqrt(static_cast<double>(curves.size()));
    }
  }

  std::ofstream file;
  std::ostream& os = open_report(opt, file);
  if (opt.format == "csv") {
    os << "trial,mean,stderr";
    for (std::size_t r = 0; r < curves.size(); ++r) os << ",run" << r;
    os << "\n";
    for (std::size_t t = 0; t < shortest; ++t) {
      os << trials[t] << "," << json(mean[t]).dump() << "," << json(stderr_of_mean[t]).dump();
      for (const auto& curve : curves) os << "," << json(curve[t]).dump();
      os << "\n";
    }
  } else {
    json report;
    report["per_run"] = curves;
    report["trials"] = trials;
    report["mean"] = mean;
    report["stderr"] = stderr_of_mean;
    os << report.dump(1) << "\n";
  }
  return 0;
}

int cmd_eaf(const CurveOptions& opt) {
  std::size_t m = 0;
  std::vector<std::vector<ObjectiveVector>> runs;
  std::vector<Direction> dirs;
  for (const auto& path : opt.results) {
    const auto rows = read_results(path, m);
    if (m != 2) throw UsageError("attainment surfaces need exactly 2 objectives");
    if (dirs.empty()) dirs = parse_directions(opt.directions, m);
    std::vector<ObjectiveVector> run;
    for (const auto& native : rows) {
      ObjectiveVector v;
      v.values = {dirs[0] == Direction::maximize ? -native[0] : native[0],
                  dirs[1] == Direction::maximize ? -native[1] : native[1]};
      run.push_back(std::move(v));
    }
    runs.push_back(std::move(run));
  }
  const auto surface = attainment_surface_50(runs);
  std::vector<std::array<double, 2>> native;
  for (const auto& p : surface) {
    native.push_back({dirs[0] == Direction::maximize ? -p[0] : p[0],
                      dirs[1] == Direction::maximize ? -p[1] : p[1]});
  }

  std::ofstream file;
  std::ostream& os = open_report(opt, file);
  if (opt.format == "csv") {
    os << "f1,f2\n";
    for (const auto& p : native) {
      os << json(p[0]).dump() << "," << json(p[1]).dump() << "\n";
    }
  } else {
    json points = json::array();
    for (const auto& p : native) points.push_back({p[0], p[1]});
    json report;
    report["surface"] = points;
    os << report.dump(1) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-learning TPE runner and evaluation tools"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run an optimization method on a benchmark");
  run->add_option("--benchmark", run_opt.benchmark,
                  "Benchmark file or builtin (ellipsoid[:c=..,d=..])")
      ->required();
  run->add_option("--method", run_opt.method,
                  "One of tpe, motpe, metalearn-tpe, random, warmstart-only")
      ->required();
  run->add_option("--meta", run_opt.meta_sources,
                  "Meta-task source (dataset file, benchmark file, or builtin); repeatable");
  run->add_option("--meta-n", run_opt.meta_n, "Observations drawn per generated meta source");
  run->add_option("--budget", run_opt.budget, "Number of evaluations")->required();
  run->add_option("--seed", run_opt.seed, "Random seed");
  run->add_option("--gamma", run_opt.optimizer.gamma, "Split quantile");
  run->add_option("--eta", run_opt.optimizer.eta, "Dimension reduction factor");
  run->add_option("--epsilon", run_opt.optimizer.epsilon, "Uniform exploration probability");
  run->add_option("--n-candidates", run_opt.optimizer.n_candidates, "Candidates per task");
  run->add_option("--n-init", run_opt.optimizer.n_init, "Initial configurations");
  run->add_option("--n-mc", run_opt.optimizer.n_mc, "Monte-Carlo samples for the task kernel");
  run->add_option("--out", run_opt.out, "Results file (JSON Lines)")->required();
  run->add_option("--dump-dataset", run_opt.dump_dataset,
                  "Also write the run's observations as a dataset file");

  SimilarityOptions sim_opt;
  CLI::App* sim = app.add_subcommand("similarity", "Task kernel report for dataset files");
  sim->add_option("--target", sim_opt.target, "Target dataset file")->required();
  sim->add_option("--meta", sim_opt.meta, "Meta dataset file; repeatable")->required();
  sim->add_option("--gamma", sim_opt.gamma, "Split quantile");
  sim->add_option("--eta", sim_opt.eta, "Dimension reduction factor");
  sim->add_option("--n-mc", sim_opt.n_mc, "Monte-Carlo samples");
  sim->add_option("--seed", sim_opt.seed, "Random seed");
  sim->add_option("--out", sim_opt.out, "Report file (default stdout)");

  CurveOptions hv_opt;
  CLI::App* hv = app.add_subcommand("hv", "Normalized hypervolume curves from results files");
  hv->add_option("--results", hv_opt.results, "Results files, one per run")->required();
  hv->add_option("--f-min", hv_opt.f_min, "Best value per objective (minimized scale)")
      ->required()
      ->delimiter(',');
  hv->add_option("--f-max", hv_opt.f_max, "Worst value per objective (minimized scale)")
      ->required()
      ->delimiter(',');
  hv->add_option("--directions", hv_opt.directions, "Comma list of min/max (default all min)");
  hv->add_option("--format", hv_opt.format, "Report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  hv->add_option("--out", hv_opt.out, "Report file (default stdout)");

  CurveOptions eaf_opt;
  CLI::App* eaf = app.add_subcommand("eaf", "50% attainment surface from results files");
  eaf->add_option("--results", eaf_opt.results, "Results files, one per run")->required();
  eaf->add_option("--directions", eaf_opt.directions, "Comma list of min/max (default all min)");
  eaf->add_option("--format", eaf_opt.format, "Report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  eaf->add_option("--out", eaf_opt.out, "Report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (sim->parsed()) return cmd_similarity(sim_opt);
    if (hv->parsed()) return cmd_hv(hv_opt);
    if (eaf->parsed()) return cmd_eaf(eaf_opt);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

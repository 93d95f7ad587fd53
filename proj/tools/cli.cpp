#include "cli.hpp"

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace trajopt::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

template <class F>
auto named(const std::string& key, const std::string& value, F&& parse) {
  try {
    return parse(value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

const std::set<std::string> kKnownKeys = {
    "env",          "algo",         "linesearch",      "horizon", "discretizer",
    "track",        "seed",         "out",             "max-iters", "parallel",
    "rel-cost-tol", "residual-tol", "gradient-scaled", "gd-nu",   "min-stepsize"};

void check_keys(const Settings& settings) {
  for (const auto& [key, value] : settings) {
    if (!kKnownKeys.count(key)) throw ConfigError(key + ": unknown setting");
    if (value.empty()) throw ConfigError(key + ": empty value");
  }
}

// Fields shared by single runs and grids.
struct Common {
  std::optional<Discretizer> discretizer;
  std::string track = "simple";
  std::optional<unsigned> seed;
  int parallel = 1;
  SolveOptions options;
};

Common common_from(const Settings& s) {
  Common c;
  if (auto it = s.find("discretizer"); it != s.end()) {
    c.discretizer = named("discretizer", it->second, discretizer_from_string);
  }
  if (auto it = s.find("track"); it != s.end()) c.track = it->second;
  if (auto it = s.find("seed"); it != s.end()) {
    const long long v = parse_integer("seed", it->second);
    if (v < 0 || v > std::numeric_limits<unsigned>::max()) {
      throw ConfigError("seed: out of range");
    }
    c.seed = static_cast<unsigned>(v);
  }
  if (auto it = s.find("parallel"); it != s.end()) {
    const long long v = parse_integer("parallel", it->second);
    if (v < 1 || v > 1024) throw ConfigError("parallel: must be between 1 and 1024");
    c.parallel = static_cast<int>(v);
  }
  if (auto it = s.find("max-iters"); it != s.end()) {
    const long long v = parse_integer("max-iters", it->second);
    if (v < 0 || v > 1000000) throw ConfigError("max-iters: must be between 0 and 1000000");
    c.options.stop.max_iters = static_cast<int>(v);
  }
  if (auto it = s.find("rel-cost-tol"); it != s.end()) {
    c.options.stop.rel_cost_tol = parse_real("rel-cost-tol", it->second);
    if (c.options.stop.rel_cost_tol < 0) throw ConfigError("rel-cost-tol: must be >= 0");
  }
  if (auto it = s.find("residual-tol"); it != s.end()) {
    c.options.stop.residual_tol = parse_real("residual-tol", it->second);
    if (c.options.stop.residual_tol < 0) throw ConfigError("residual-tol: must be >= 0");
  }
  if (auto it = s.find("min-stepsize"); it != s.end()) {
    c.options.stop.min_stepsize = parse_real("min-stepsize", it->second);
    if (c.options.stop.min_stepsize < 0) throw ConfigError("min-stepsize: must be >= 0");
  }
  if (auto it = s.find("gradient-scaled"); it != s.end()) {
    c.options.line_search.gradient_scaled = parse_bool("gradient-scaled", it->second);
  }
  if (auto it = s.find("gd-nu"); it != s.end()) {
    c.options.line_search.gd_nu = parse_real("gd-nu", it->second);
    if (c.options.line_search.gd_nu <= 0) throw ConfigError("gd-nu: must be > 0");
  }
  return c;
}

int parse_horizon(const std::string& text) {
  const long long v = parse_integer("horizon", text);
  if (v < 1 || v > 10000000) throw ConfigError("horizon: must be between 1 and 10000000");
  return static_cast<int>(v);
}

std::string real_text(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

Settings parse_settings(const std::string& text) {
  Settings out;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::string serialize_settings(const Settings& settings) {
  std::string out;
  for (const auto& [key, value] : settings) out += key + "=" + value + "\n";
  return out;
}

Settings load_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_settings(ss.str());
}

RunConfig run_config_from(const Settings& s) {
  check_keys(s);
  RunConfig c;
  if (auto it = s.find("env"); it != s.end()) c.env = named("env", it->second, env_kind_from_string);
  if (auto it = s.find("algo"); it != s.end()) {
    c.algo = named("algo", it->second, oracle_kind_from_string);
  }
  if (auto it = s.find("linesearch"); it != s.end()) {
    c.linesearch = named("linesearch", it->second, line_search_rule_from_string);
  }
  if (auto it = s.find("horizon"); it != s.end()) c.horizon = parse_horizon(it->second);
  if (auto it = s.find("out"); it != s.end()) c.out = it->second;
  const Common common = common_from(s);
  c.discretizer = common.discretizer;
  c.track = common.track;
  c.seed = common.seed;
  c.options = common.options;
  c.options.line_search.rule = c.linesearch;
  return c;
}

Settings to_settings(const RunConfig& c) {
  Settings s;
  s["env"] = to_string(c.env);
  s["algo"] = to_string(c.algo);
  s["linesearch"] = to_string(c.linesearch);
  s["horizon"] = std::to_string(c.horizon);
  if (c.discretizer) s["discretizer"] = to_string(*c.discretizer);
  s["track"] = c.track;
  if (c.seed) s["seed"] = std::to_string(*c.seed);
  if (!c.out.empty()) s["out"] = c.out.string();
  s["max-iters"] = std::to_string(c.options.stop.max_iters);
  s["rel-cost-tol"] = real_text(c.options.stop.rel_cost_tol);
  s["residual-tol"] = real_text(c.options.stop.residual_tol);
  s["min-stepsize"] = real_text(c.options.stop.min_stepsize);
  s["gradient-scaled"] = c.options.line_search.gradient_scaled ? "true" : "false";
  s["gd-nu"] = real_text(c.options.line_search.gd_nu);
  return s;
}

GridConfig grid_config_from(const Settings& s) {
  check_keys(s);
  GridConfig g;
  auto list = [&](const std::string& key) {
    auto it = s.find(key);
    return it == s.end() ? std::vector<std::string>{} : split(it->second, ',');
  };
  for (const auto& v : list("env")) g.envs.push_back(named("env", v, env_kind_from_string));
  for (const auto& v : list("algo")) g.algos.push_back(named("algo", v, oracle_kind_from_string));
  for (const auto& v : list("linesearch")) {
    g.linesearches.push_back(named("linesearch", v, line_search_rule_from_string));
  }
  for (const auto& v : list("horizon")) g.horizons.push_back(parse_horizon(v));
  if (auto it = s.find("out"); it != s.end()) g.out = it->second;
  const Common common = common_from(s);
  g.discretizer = common.discretizer;
  g.track = common.track;
  g.seed = common.seed;
  g.parallel = common.parallel;
  g.options = common.options;
  return g;
}

ControlSequence initial_controls(const TrajectoryProblem& problem, std::optional<unsigned> seed) {
  ControlSequence u = problem.zero_controls();
  if (!seed) return u;
  std::mt19937 rng(*seed);
  std::normal_distribution<double> n(0.0, 0.1);
  for (auto& ut : u) {
    for (Eigen::Index i = 0; i < ut.size(); ++i) ut(i) = n(rng);
  }
  return u;
}

double rel_subopt(double cost, double initial_cost, double best) {
  const double gap0 = initial_cost - best;
  if (gap0 == 0.0) return 0.0;
  return (cost - best) / gap0;
}

TraceFile make_trace(const SolveTrace& trace, double best, std::optional<unsigned> seed) {
  TraceFile file;
  file.status = to_string(trace.status);
  file.seed = seed;
  if (!std::isfinite(trace.initial_cost)) return file;
  TraceRow first;
  first.cost = trace.initial_cost;
  first.rel_subopt = rel_subopt(trace.initial_cost, trace.initial_cost, best);
  first.residual = trace.initial_residual;
  file.rows.push_back(first);
  for (const TraceEntry& e : trace.entries) {
    TraceRow r;
    r.iter = e.iter;
    r.cost = e.cost;
    r.rel_subopt = rel_subopt(e.cost, trace.initial_cost, best);
    r.stepsize = e.stepsize;
    r.regularization = e.regularization;
    r.residual = e.residual;
    r.time_ms = e.time_ms;
    file.rows.push_back(r);
  }
  return file;
}

void write_trace(std::ostream& os, const TraceFile& trace) {
  os << kTraceHeader << '\n';
  for (const TraceRow& r : trace.rows) {
    os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.6f}\n", r.iter, r.cost,
                      r.rel_subopt, r.stepsize, r.regularization, r.residual, r.time_ms);
  }
  os << "# status=" << trace.status
     << " seed=" << (trace.seed ? std::to_string(*trace.seed) : std::string("none")) << '\n';
}

TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("trace: cannot read '" + path.string() + "'");
  TraceFile file;
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTraceHeader) {
    throw ConfigError("trace: bad header in '" + path.string() + "'");
  }
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      for (const auto& field : split(line.substr(1), ' ')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "status") file.status = value;
        if (key == "seed" && value != "none") {
          file.seed = static_cast<unsigned>(parse_integer("seed", value));
        }
      }
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 7) throw ConfigError("trace: expected 7 columns in '" + line + "'");
    TraceRow r;
    r.iter = static_cast<int>(parse_integer("iter", cols[0]));
    r.cost = parse_real("cost", cols[1]);
    r.rel_subopt = parse_real("rel_subopt", cols[2]);
    r.stepsize = parse_real("stepsize", cols[3]);
    r.regularization = parse_real("regularization", cols[4]);
    r.residual = parse_real("residual", cols[5]);
    r.time_ms = parse_real("time_ms", cols[6]);
    file.rows.push_back(r);
  }
  return file;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += fmt::format(".tmp.{}", std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("out: cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("out: write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged:
    case SolveStatus::max_iters: return kOk;
    case SolveStatus::stalled: return kStalled;
    case SolveStatus::diverged: return kDiverged;
  }
  return kConfigError;
}

namespace {

EnvOptions env_options(std::optional<Discretizer> discretizer, const std::string& track) {
  EnvOptions o;
  o.discretizer = discretizer;
  o.track = track;
  return o;
}

std::string trace_text(const TraceFile& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

}  // namespace

int cmd_solve(const RunConfig& config, std::ostream& report) {
  const TrajectoryProblem problem =
      build_problem(config.env, config.horizon, env_options(config.discretizer, config.track));
  SolveOptions options = config.options;
  options.line_search.rule = config.linesearch;
  spdlog::info("solving {} tau={} with {}/{}", to_string(config.env), config.horizon,
               to_string(config.algo), to_string(config.linesearch));
  const SolveResult result =
      solve(problem, initial_controls(problem, config.seed), config.algo, options);
  for (const TraceEntry& e : result.trace.entries) {
    spdlog::debug("iter {} cost {:.10g} step {:.3g} reg {:.3g} residual {:.3g}", e.iter, e.cost,
                  e.stepsize, e.regularization, e.residual);
  }
  const double best = std::isfinite(result.cost) ? result.cost : result.trace.initial_cost;
  const TraceFile trace = make_trace(result.trace, best, config.seed);
  if (!config.out.empty()) write_atomically(config.out, trace_text(trace));
  report << fmt::format("status={} cost={:.12g} iterations={} residual={:.3g}\n",
                        to_string(result.trace.status), result.cost, result.trace.entries.size(),
                        trace.rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : trace.rows.back().residual);
  if (!result.trace.message.empty()) spdlog::info("{}", result.trace.message);
  return exit_code(result.trace.status);
}

int cmd_benchmark(const GridConfig& grid, std::ostream& report, std::vector<CellResult>* out_cells) {
  if (grid.size() == 0) {
    spdlog::error("benchmark grid is empty: env, algo, linesearch and horizon need a value each");
    return kConfigError;
  }
  std::vector<CellResult> cells;
  for (EnvKind env : grid.envs) {
    for (int horizon : grid.horizons) {
      for (OracleKind algo : grid.algos) {
        for (LineSearchRule ls : grid.linesearches) {
          CellResult c;
          c.env = env;
          c.horizon = horizon;
          c.algo = algo;
          c.linesearch = ls;
          c.trace = grid.out / fmt::format("{}_{}_{}_{}.csv", to_string(env), horizon,
                                           to_string(algo), to_string(ls));
          cells.push_back(std::move(c));
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      CellResult& c = cells[i];
      try {
        const TrajectoryProblem problem =
            build_problem(c.env, c.horizon, env_options(grid.discretizer, grid.track));
        SolveOptions options = grid.options;
        options.line_search.rule = c.linesearch;
        const auto start = std::chrono::steady_clock::now();
        SolveResult r = solve(problem, initial_controls(problem, grid.seed), c.algo, options);
        c.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        c.status = to_string(r.trace.status);
        c.message = r.trace.message;
        c.initial_cost = r.trace.initial_cost;
        c.final_cost = r.cost;
        c.iterations = static_cast<int>(r.trace.entries.size());
        c.solve_trace = std::move(r.trace);
      } catch (const Error& e) {
        c.status = "error";
        c.message = e.what();
        c.final_cost = std::numeric_limits<double>::infinity();
      }
      spdlog::info("{} tau={} {}/{}: {} cost={:.10g}", to_string(c.env), c.horizon,
                   to_string(c.algo), to_string(c.linesearch), c.status, c.final_cost);
    }
  };
  const int threads = std::max(1, std::min<int>(grid.parallel, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  auto usable = [](const CellResult& c) {
    return c.status != "error" && c.status != "diverged" && std::isfinite(c.final_cost);
  };
  std::map<std::pair<EnvKind, int>, double> best;
  for (const CellResult& c : cells) {
    if (!usable(c)) continue;
    auto [it, inserted] = best.try_emplace({c.env, c.horizon}, c.final_cost);
    if (!inserted) it->second = std::min(it->second, c.final_cost);
  }

  bool any_ok = false;
  std::string summary =
      "env,horizon,algo,linesearch,status,initial_cost,final_cost,iterations,wall_ms,rel_subopt,"
      "trace\n";
  for (CellResult& c : cells) {
    const auto it = best.find({c.env, c.horizon});
    if (usable(c)) {
      any_ok = true;
      c.rel_subopt = rel_subopt(c.final_cost, c.initial_cost, it->second);
    } else {
      c.rel_subopt = std::numeric_limits<double>::quiet_NaN();
    }
    if (c.status != "error") {
      const double ref = it != best.end() ? it->second : c.initial_cost;
      write_atomically(c.trace, trace_text(make_trace(c.solve_trace, ref, grid.seed)));
    }
    summary += fmt::format("{},{},{},{},{},{:.17g},{:.17g},{},{:.3f},{:.17g},{}\n",
                           to_string(c.env), c.horizon, to_string(c.algo),
                           to_string(c.linesearch), c.status, c.initial_cost, c.final_cost,
                           c.iterations, c.wall_ms, c.rel_subopt,
                           c.status == "error" ? "" : c.trace.filename().string());
  }
  write_atomically(grid.out / "summary.csv", summary);
  report << summary;
  if (out_cells) *out_cells = std::move(cells);
  return any_ok ? kOk : kDiverged;
}

int cmd_verify(const VerifyOptions& options, std::ostream& report) {
  std::vector<CheckReport> checks;
  try {
    checks = run_verify(options);
  } catch (const ConfigError& e) {
    report << e.what() << '\n';
    return kConfigError;
  }
  bool all = true;
  for (const CheckReport& c : checks) {
    all = all && c.pass;
    report << fmt::format("{} {:<16} max_error={:.3e} tolerance={:.1e}\n", c.pass ? "PASS" : "FAIL",
                          c.name, c.observed, c.tolerance);
  }
  report << (all ? "verify: all checks passed\n" : "verify: FAILED\n");
  return all ? kOk : kStalled;
}

}  // namespace trajopt::cli

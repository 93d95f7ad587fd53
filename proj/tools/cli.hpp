#pragma once

// Command-line harness: run configuration, trace files, benchmark grids and the verify suite.

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "trajopt/envs/problems.hpp"
#include "trajopt/linesearch.hpp"

namespace trajopt::cli {

enum ExitCode { kOk = 0, kConfigError = 1, kStalled = 2, kDiverged = 3 };

/// Flat key=value settings. Keys mirror the long flags without dashes.
using Settings = std::map<std::string, std::string>;

/// Parses `key=value` lines; blank lines and lines starting with '#' are skipped.
/// Throws ConfigError naming the line on malformed input.
Settings parse_settings(const std::string& text);
/// Canonical form: one `key=value` per line, keys sorted.
std::string serialize_settings(const Settings& settings);
Settings load_settings(const std::filesystem::path& path);

struct RunConfig {
  EnvKind env = EnvKind::pendulum;
  OracleKind algo = OracleKind::gn;
  LineSearchRule linesearch = LineSearchRule::directional;
  int horizon = 50;
  std::optional<Discretizer> discretizer;
  std::string track = "simple";
  /// Absent means u_0 = 0.
  std::optional<unsigned> seed;
  std::filesystem::path out;
  SolveOptions options;
};

/// Builds a run configuration; unknown keys and bad values raise ConfigError naming the key.
RunConfig run_config_from(const Settings& settings);
Settings to_settings(const RunConfig& config);

struct GridConfig {
  std::vector<EnvKind> envs;
  std::vector<OracleKind> algos;
  std::vector<LineSearchRule> linesearches;
  std::vector<int> horizons;
  std::optional<Discretizer> discretizer;
  std::string track = "simple";
  std::optional<unsigned> seed;
  std::filesystem::path out = "bench";
  int parallel = 1;
  SolveOptions options;

  std::size_t size() const {
    return envs.size() * algos.size() * linesearches.size() * horizons.size();
  }
};

/// Same keys as a run, each of env/algo/linesearch/horizon taking a comma-separated list.
GridConfig grid_config_from(const Settings& settings);

/// Initial controls: zero, or N(0, 0.1^2) entries drawn from `seed`.
ControlSequence initial_controls(const TrajectoryProblem& problem, std::optional<unsigned> seed);

/// (J - J*) / (J_0 - J*), 0 when J_0 == J*.
double rel_subopt(double cost, double initial_cost, double best);

struct TraceRow {
  int iter = 0;
  double cost = 0.0;
  double rel_subopt = 0.0;
  double stepsize = 0.0;
  double regularization = 0.0;
  double residual = 0.0;
  double time_ms = 0.0;
};

struct TraceFile {
  std::vector<TraceRow> rows;
  std::string status;
  std::optional<unsigned> seed;
};

inline constexpr const char* kTraceHeader =
    "iter,cost,rel_subopt,stepsize,regularization,residual,time_ms";

/// Row 0 holds J(u_0); row k the k-th accepted iterate. `best` is the J* estimate.
TraceFile make_trace(const SolveTrace& trace, double best, std::optional<unsigned> seed);
void write_trace(std::ostream& os, const TraceFile& trace);
TraceFile read_trace(const std::filesystem::path& path);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomically(const std::filesystem::path& path, const std::string& content);

int exit_code(SolveStatus status);

/// Builds the problem, solves and writes the trace if `config.out` is set.
int cmd_solve(const RunConfig& config, std::ostream& report);

struct CellResult {
  EnvKind env{};
  int horizon = 0;
  OracleKind algo{};
  LineSearchRule linesearch{};
  std::string status;  ///< solve status, or "error"
  std::string message;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
  double rel_subopt = 0.0;
  std::filesystem::path trace;
  SolveTrace solve_trace;
};

/// Runs every cell, writes one trace per cell and `summary.csv` under `grid.out`.
/// Exit 0 if any cell finished without diverging or erroring, 1 for an empty grid.
int cmd_benchmark(const GridConfig& grid, std::ostream& report,
                  std::vector<CellResult>* cells = nullptr);

struct VerifyOptions {
  int scale = 1;
  std::vector<std::string> only;
  /// Relative perturbation applied to every reference value; nonzero makes the suite fail.
  double perturb = 0.0;
};

struct CheckReport {
  std::string name;
  double tolerance = 0.0;
  double observed = 0.0;
  bool pass = false;
};

std::vector<std::string> verify_check_names();
std::vector<CheckReport> run_verify(const VerifyOptions& options);
int cmd_verify(const VerifyOptions& options, std::ostream& report);

}  // namespace trajopt::cli

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "cli.hpp"

namespace {

using trajopt::cli::Settings;

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("trajopt");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("TRAJOPT_LOG");
  const std::string name = level ? level : "info";
  if (name == "quiet") {
    spdlog::set_level(spdlog::level::off);
  } else if (name == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    if (name != "info") spdlog::warn("TRAJOPT_LOG={} not recognized, using info", name);
  }
}

// Flags that mirror config keys. Values given on the command line override the config file.
struct Flags {
  std::string config;
  Settings values;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        "--" + key, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  void add_all(CLI::App* app, bool lists) {
    const std::string many = lists ? " (comma-separated list)" : "";
    app->add_option("--config", config, "key=value config file");
    add(app, "env", "pendulum | cartpole | simple-car | bicycle-car" + many);
    add(app, "algo", "gd | gn | ne | ddp-lq | ddp-q" + many);
    add(app, "linesearch", "directional | regularized" + many);
    add(app, "horizon", "number of control steps" + many);
    add(app, "discretizer", "euler | rk4 (default per env)");
    add(app, "track", "bundled track name or track file (car envs)");
    add(app, "max-iters", "iteration budget");
    add(app, "seed", "randomize u_0 with this seed (default u_0 = 0)");
    add(app, "out", lists ? "output directory" : "trace CSV path");
    add(app, "parallel", "worker threads for benchmark cells");
    add(app, "rel-cost-tol", "stop when the relative cost change falls below");
    add(app, "residual-tol", "convergence test on the stationarity residual");
    add(app, "min-stepsize", "stop when the accepted stepsize falls below");
    add(app, "gradient-scaled", "scale the regularized stepsize by the gradient norm");
    add(app, "gd-nu", "fixed ridge of the gradient oracle in directional mode");
  }

  Settings merged() const {
    Settings s = config.empty() ? Settings{} : trajopt::cli::load_settings(config);
    for (const auto& [k, v] : values) s[k] = v;
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Trajectory optimization solvers and benchmarks"};
  app.require_subcommand(1);

  Flags solve_flags;
  auto* solve = app.add_subcommand("solve", "solve one problem and write its trace");
  solve_flags.add_all(solve, false);

  Flags bench_flags;
  auto* bench = app.add_subcommand("benchmark", "run a grid of env x algo x linesearch x horizon");
  bench_flags.add_all(bench, true);

  trajopt::cli::VerifyOptions verify_options;
  std::string only;
  auto* verify = app.add_subcommand("verify", "run the oracle and invariant checks");
  verify->add_option("--scale", verify_options.scale, "instance count multiplier");
  verify->add_option("--only", only, "comma-separated subset of checks");
  verify->add_option("--perturb", verify_options.perturb,
                     "perturb reference values (harness self-test)");
  verify->add_flag_callback(
      "--list",
      [] {
        for (const auto& name : trajopt::cli::verify_check_names()) std::cout << name << '\n';
        std::exit(0);
      },
      "list check names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : trajopt::cli::kConfigError;
  }

  try {
    if (solve->parsed()) {
      return trajopt::cli::cmd_solve(trajopt::cli::run_config_from(solve_flags.merged()),
                                     std::cout);
    }
    if (bench->parsed()) {
      return trajopt::cli::cmd_benchmark(trajopt::cli::grid_config_from(bench_flags.merged()),
                                         std::cout);
    }
    std::stringstream ss(only);
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) verify_options.only.push_back(item);
    }
    return trajopt::cli::cmd_verify(verify_options, std::cout);
  } catch (const trajopt::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    std::cerr << "error: " << e.what() << '\n';
    return trajopt::cli::kConfigError;
  } catch (const trajopt::Error& e) {
    spdlog::error("{}", e.what());
    return trajopt::cli::kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return trajopt::cli::kConfigError;
  }
}

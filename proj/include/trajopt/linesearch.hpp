#pragma once

#include <string>
#include <vector>

#include "trajopt/oracles.hpp"

namespace trajopt {

enum class LineSearchRule { directional, regularized };

std::string to_string(LineSearchRule rule);
LineSearchRule line_search_rule_from_string(const std::string& name);

/// Relative allowance for roundoff in J(u + v) - J(u) when testing a strict decrease.
inline constexpr double kCostRoundoff = 1e-13;

struct LineSearchConfig {
  LineSearchRule rule = LineSearchRule::directional;
  double rho_dec = 0.5;
  double rho_inc = 10.0;
  double gamma_min = 1e-12;
  double nu_init = 1e-6;
  /// Directional mode gives up raising nu past this value.
  double nu_max = 1e20;
  /// Regularized mode divides the first trial stepsize by the cost gradient norm.
  bool gradient_scaled = true;
  /// Fixed ridge for the gradient oracle in directional mode.
  double gd_nu = 1.0;
  ValidityMode validity = ValidityMode::descent;
};

struct StopCriteria {
  int max_iters = 100;
  double rel_cost_tol = 1e-12;
  double min_stepsize = 1e-20;
  /// Converged means residual <= residual_tol * (1 + |J|).
  double residual_tol = 1e-6;
};

struct StepResult {
  ControlSequence u_next;
  double cost_next = 0.0;
  /// Accepted gamma (directional) or 1/nu (regularized, including gradient scaling).
  double gamma = 0.0;
  /// Warm start for the next regularized search.
  double gamma_unscaled = 0.0;
  double nu = 0.0;
  /// Right-hand side of the acceptance test: gamma c_0(0) or c_0(0), plus the roundoff
  /// allowance when only the relaxed test passed.
  double bound = 0.0;
  double model_decrease = 0.0;
  ControlSequence direction;
  int trials = 0;
};

/// Armijo backtracking on gamma-scaled policies. Throws StallError below gamma_min.
StepResult directional_search(const TrajectoryProblem& problem, const ControlSequence& u,
                              double cost, const std::vector<AffinePolicy>& policies,
                              double model_decrease, const StepMap& step_maps,
                              const LineSearchConfig& cfg);

/// Backtracking on the ridge nu = 1/gamma, recomputing the backward pass for each trial.
/// Throws StallError below gamma_min.
StepResult regularized_search(const TrajectoryProblem& problem, const ExpansionBundle& bundle,
                              OracleKind kind, const LineSearchConfig& cfg, double gamma_prev);

enum class SolveStatus { converged, stalled, max_iters, diverged };
std::string to_string(SolveStatus status);

struct TraceEntry {
  int iter = 0;
  double cost = 0.0;
  double stepsize = 0.0;
  double regularization = 0.0;
  double model_decrease = 0.0;
  /// J(u_{k+1}) - J(u_k).
  double actual_decrease = 0.0;
  /// Acceptance bound the step was checked against.
  double bound = 0.0;
  /// 1/2 grad J' v for the accepted direction, NaN unless audited.
  double half_slope = 0.0;
  double residual = 0.0;
  double time_ms = 0.0;
};

struct SolveTrace {
  double initial_cost = 0.0;
  double initial_residual = 0.0;
  std::vector<TraceEntry> entries;
  SolveStatus status = SolveStatus::max_iters;
  std::string message;
};

struct SolveOptions {
  LineSearchConfig line_search;
  StopCriteria stop;
  /// Record 1/2 grad J' v for each accepted direction (one extra gradient per iteration).
  bool audit = false;
};

struct SolveResult {
  ControlSequence u;
  double cost = 0.0;
  SolveTrace trace;
};

SolveResult solve(const TrajectoryProblem& problem, const ControlSequence& u0, OracleKind kind,
                  const SolveOptions& options);

/// max_t |d H_t / d u_t|_inf from the discrete necessary conditions.
double stationarity_residual(const TrajectoryProblem& problem, const ControlSequence& u);

}  // namespace trajopt

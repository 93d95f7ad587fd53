#include "trajopt/linesearch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace trajopt {

std::string to_string(LineSearchRule rule) {
  return rule == LineSearchRule::directional ? "directional" : "regularized";
}

LineSearchRule line_search_rule_from_string(const std::string& name) {
  if (name == "directional") return LineSearchRule::directional;
  if (name == "regularized") return LineSearchRule::regularized;
  throw ConfigError("unknown linesearch '" + name + "'");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::stalled: return "stalled";
    case SolveStatus::max_iters: return "max-iters";
    case SolveStatus::diverged: return "diverged";
  }
  return "unknown";
}

namespace {

// Returns the bound the step passed, or NaN. A strict decrease within cost roundoff of the
// exact bound also passes; the returned bound then includes the allowance.
double acceptance(double cost, double next, double bound) {
  if (next - cost <= bound) return bound;
  const double relaxed = bound + kCostRoundoff * (1.0 + std::abs(cost));
  if (next < cost && next - cost <= relaxed) return relaxed;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

StepResult directional_search(const TrajectoryProblem& problem, const ControlSequence& u,
                              double cost, const std::vector<AffinePolicy>& policies,
                              double model_decrease, const StepMap& step_maps,
                              const LineSearchConfig& cfg) {
  StepResult r;
  r.model_decrease = model_decrease;
  const StateVec y0 = StateVec::Zero(problem.nx);
  for (double gamma = 1.0; gamma >= cfg.gamma_min; gamma *= cfg.rho_dec) {
    ++r.trials;
    ControlSequence v;
    double next = 0.0;
    try {
      v = rollout(y0, policies, step_maps, gamma);
      next = total_cost(problem, add(u, v));
    } catch (const NumericError&) {
      continue;
    }
    const double bound = acceptance(cost, next, gamma * model_decrease);
    if (!std::isnan(bound)) {
      r.u_next = add(u, v);
      r.cost_next = next;
      r.gamma = gamma;
      r.gamma_unscaled = gamma;
      r.bound = bound;
      r.direction = std::move(v);
      return r;
    }
  }
  throw StallError("directional search: no stepsize above gamma_min satisfies the Armijo rule");
}

StepResult regularized_search(const TrajectoryProblem& problem, const ExpansionBundle& bundle,
                              OracleKind kind, const LineSearchConfig& cfg, double gamma_prev) {
  double scale = 1.0;
  if (cfg.gradient_scaled) {
    const double g = cost_gradient_norm(bundle);
    if (g > 0.0 && std::isfinite(g)) scale = g;
  }
  const double cost = bundle.total_cost;
  const StateVec y0 = StateVec::Zero(problem.nx);
  const StepMap steps = step_maps_for(kind, problem, bundle);
  StepResult r;
  for (double gamma = cfg.rho_inc * gamma_prev / scale; gamma >= cfg.gamma_min;
       gamma *= cfg.rho_dec) {
    ++r.trials;
    const double nu = 1.0 / gamma;
    const OracleDirection d = backward(bundle, kind, nu, cfg.validity);
    if (!d.feasible) continue;
    ControlSequence v;
    double next = 0.0;
    try {
      v = kind == OracleKind::gd ? d.direction : rollout(y0, d.policies, steps);
      next = total_cost(problem, add(bundle.u, v));
    } catch (const NumericError&) {
      continue;
    }
    const double bound = acceptance(cost, next, d.model_decrease());
    if (!std::isnan(bound)) {
      r.u_next = add(bundle.u, v);
      r.cost_next = next;
      r.gamma = gamma;
      r.gamma_unscaled = gamma * scale;
      r.nu = nu;
      r.bound = bound;
      r.model_decrease = d.model_decrease();
      r.direction = std::move(v);
      return r;
    }
  }
  throw StallError("regularized search: no stepsize above gamma_min satisfies the decrease rule");
}

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

struct DirectionalChoice {
  OracleDirection direction;
  double nu = 0.0;
};

DirectionalChoice descent_direction(const ExpansionBundle& bundle, OracleKind kind,
                                    const LineSearchConfig& cfg) {
  if (kind == OracleKind::gd) return {backward_gd(bundle, cfg.gd_nu), cfg.gd_nu};
  double nu = 0.0;
  for (;;) {
    OracleDirection d = backward(bundle, kind, nu, cfg.validity);
    if (d.feasible && d.model_decrease() < 0.0) return {std::move(d), nu};
    nu = nu == 0.0 ? cfg.nu_init : nu * cfg.rho_inc;
    if (nu > cfg.nu_max) throw StallError("no descent direction below the regularization cap");
  }
}

}  // namespace

SolveResult solve(const TrajectoryProblem& problem, const ControlSequence& u0, OracleKind kind,
                  const SolveOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const LineSearchConfig& cfg = options.line_search;
  const StopCriteria& stop = options.stop;
  problem.validate();

  SolveResult out;
  out.u = u0;
  const ExpansionOrders orders = orders_for(kind);
  ExpansionBundle bundle;
  try {
    bundle = forward(problem, u0, orders.dynamics, orders.costs);
  } catch (const DivergenceError& e) {
    out.cost = std::numeric_limits<double>::infinity();
    out.trace.initial_cost = out.cost;
    out.trace.status = SolveStatus::diverged;
    out.trace.message = e.what();
    return out;
  }
  double J = bundle.total_cost;
  double residual = inf_norm(gradient_from_bundle(bundle));
  out.cost = J;
  out.trace.initial_cost = J;
  out.trace.initial_residual = residual;
  const auto converged = [&] { return residual <= stop.residual_tol * (1.0 + std::abs(J)); };

  double gamma_prev = 1.0;
  bool stopped = false;
  for (int k = 1; k <= stop.max_iters; ++k) {
    if (residual == 0.0) {
      out.trace.status = SolveStatus::converged;
      stopped = true;
      break;
    }
    StepResult step;
    double half_slope = std::numeric_limits<double>::quiet_NaN();
    try {
      if (cfg.rule == LineSearchRule::directional) {
        DirectionalChoice choice = descent_direction(bundle, kind, cfg);
        const StepMap maps = step_maps_for(kind, problem, bundle);
        step = directional_search(problem, bundle.u, J, choice.direction.policies,
                                  choice.direction.model_decrease(), maps, cfg);
        step.nu = choice.nu;
        if (options.audit) {
          const ControlSequence v = kind == OracleKind::gd
                                        ? choice.direction.direction
                                        : rollout(StateVec::Zero(problem.nx),
                                                  choice.direction.policies,
                                                  linearized_steps(bundle));
          half_slope = 0.5 * gradient_from_bundle(bundle).dot(flatten(v));
        }
      } else {
        step = regularized_search(problem, bundle, kind, cfg, gamma_prev);
        gamma_prev = step.gamma_unscaled;
        if (options.audit) {
          half_slope = 0.5 * gradient_from_bundle(bundle).dot(flatten(step.direction));
        }
      }
    } catch (const StallError& e) {
      out.trace.status = converged() ? SolveStatus::converged : SolveStatus::stalled;
      out.trace.message = e.what();
      stopped = true;
      break;
    }

    ExpansionBundle next;
    try {
      next = forward(problem, step.u_next, orders.dynamics, orders.costs);
    } catch (const DivergenceError& e) {
      out.trace.status = SolveStatus::diverged;
      out.trace.message = e.what();
      stopped = true;
      break;
    }
    TraceEntry entry;
    entry.iter = k;
    entry.cost = next.total_cost;
    entry.stepsize = step.gamma;
    entry.regularization = step.nu;
    entry.model_decrease = step.model_decrease;
    entry.actual_decrease = next.total_cost - J;
    entry.bound = step.bound;
    entry.half_slope = half_slope;
    const double rel_change = std::abs(J - next.total_cost) / std::max(std::abs(J), 1e-300);
    bundle = std::move(next);
    J = bundle.total_cost;
    residual = inf_norm(gradient_from_bundle(bundle));
    entry.residual = residual;
    entry.time_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    out.trace.entries.push_back(entry);
    out.u = bundle.u;
    out.cost = J;
    if (rel_change < stop.rel_cost_tol || step.gamma < stop.min_stepsize) {
      out.trace.status = converged() ? SolveStatus::converged : SolveStatus::stalled;
      stopped = true;
      break;
    }
  }
  if (!stopped) out.trace.status = converged() ? SolveStatus::converged : SolveStatus::max_iters;
  return out;
}

double stationarity_residual(const TrajectoryProblem& problem, const ControlSequence& u) {
  problem.validate();
  const int tau = problem.horizon;
  const int nx = problem.nx;
  const int nu = problem.nu;
  std::vector<StateVec> x(tau + 1);
  x[0] = problem.x0;
  for (int t = 0; t < tau; ++t) x[t + 1] = problem.dynamics[t](x[t], u[t]);

  // Costate of the Hamiltonian H_t = -h_t + mu_{t+1}' f_t, so that d H_t / d u_t = -d J / d u_t.
  Vector mu = -gradient(problem.final_cost.function(), x[tau]);
  double worst = 0.0;
  for (int t = tau - 1; t >= 0; --t) {
    Vector z(nx + nu);
    z << x[t], u[t];
    const Matrix F = jacobian(problem.dynamics[t].joint(), z);
    const Vector g = gradient(problem.costs[t].joint(), z);
    const Vector dHdu = F.rightCols(nu).transpose() * mu - g.tail(nu);
    worst = std::max(worst, inf_norm(dHdu));
    mu = F.leftCols(nx).transpose() * mu - g.head(nx);
  }
  return worst;
}

}  // namespace trajopt

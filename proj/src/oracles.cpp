#include "trajopt/oracles.hpp"

#include <cmath>

namespace trajopt {

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::gd: return "gd";
    case OracleKind::gn: return "gn";
    case OracleKind::ne: return "ne";
    case OracleKind::ddp_lq: return "ddp-lq";
    case OracleKind::ddp_q: return "ddp-q";
  }
  return "unknown";
}

OracleKind oracle_kind_from_string(const std::string& name) {
  if (name == "gd") return OracleKind::gd;
  if (name == "gn") return OracleKind::gn;
  if (name == "ne") return OracleKind::ne;
  if (name == "ddp-lq") return OracleKind::ddp_lq;
  if (name == "ddp-q") return OracleKind::ddp_q;
  throw ConfigError("unknown algo '" + name + "'");
}

bool rolls_on_original_dynamics(OracleKind kind) {
  return kind == OracleKind::ddp_lq || kind == OracleKind::ddp_q;
}

ExpansionOrders orders_for(OracleKind kind) {
  switch (kind) {
    case OracleKind::gd: return {1, 1};
    case OracleKind::gn:
    case OracleKind::ddp_lq: return {1, 2};
    case OracleKind::ne:
    case OracleKind::ddp_q: return {2, 2};
  }
  return {2, 2};
}

namespace {

std::size_t bytes(const Matrix& m) { return static_cast<std::size_t>(m.size()) * sizeof(double); }
std::size_t bytes(const Vector& v) { return static_cast<std::size_t>(v.size()) * sizeof(double); }

Vector stack(const StateVec& x, const CtrlVec& u) {
  Vector z(x.size() + u.size());
  z << x, u;
  return z;
}

}  // namespace

std::size_t ExpansionBundle::storage_bytes() const {
  std::size_t total = bytes(final_gradient) + bytes(final_hessian);
  for (const auto& s : steps) {
    total += sizeof(double) + bytes(s.p) + bytes(s.q);
    if (s.lin) total += bytes(s.lin->A) + bytes(s.lin->B);
    if (s.quad) total += bytes(s.quad->H) + bytes(s.quad->Q) + bytes(s.quad->R) +
                         bytes(s.quad->p) + bytes(s.quad->q);
    if (s.handle) total += sizeof(Dynamics);
  }
  return total;
}

ExpansionBundle forward(const TrajectoryProblem& problem, const ControlSequence& u, int order_f,
                        int order_h) {
  const int tau = problem.horizon;
  const int nx = problem.nx;
  const int nu = problem.nu;
  if (static_cast<int>(u.size()) != tau) throw ShapeError("forward: wrong number of controls");
  ExpansionBundle b;
  b.order_f = order_f;
  b.order_h = order_h;
  b.u = u;
  b.x.resize(tau + 1);
  b.x[0] = problem.x0;
  b.steps.resize(tau);
  double J = 0.0;
  for (int t = 0; t < tau; ++t) {
    if (u[t].size() != nu) throw ShapeError("forward: control has wrong size");
    StepExpansion& s = b.steps[t];
    const Vector z = stack(b.x[t], u[t]);
    try {
      if (order_f <= 0) {
        b.x[t + 1] = problem.dynamics[t].joint()(z);
      } else {
        const VectorExpansion e = expand(problem.dynamics[t].joint(), z, DerivativeRequest{1, {}});
        b.x[t + 1] = e.value;
        s.lin = LinearMap{e.jacobian.leftCols(nx), e.jacobian.rightCols(nu)};
      }
      if (order_f >= 2) s.handle = problem.dynamics[t];
      const ScalarExpansion h = expand(problem.costs[t].joint(), z, order_h);
      s.cost = h.value;
      if (order_h >= 1) {
        s.p = h.gradient.head(nx);
        s.q = h.gradient.tail(nu);
      }
      if (order_h >= 2) {
        s.quad = QuadraticCostModel(h.hessian.topLeftCorner(nx, nx),
                                    h.hessian.bottomRightCorner(nu, nu),
                                    h.hessian.topRightCorner(nx, nu), s.p, s.q);
      }
    } catch (const NumericError&) {
      throw DivergenceError(t);
    }
    if (!b.x[t + 1].allFinite()) throw DivergenceError(t + 1);
    if (!std::isfinite(s.cost)) throw DivergenceError(t);
    J += s.cost;
  }
  try {
    const ScalarExpansion h = expand(problem.final_cost.function(), b.x[tau], order_h);
    b.final_cost = h.value;
    if (order_h >= 1) b.final_gradient = h.gradient;
    if (order_h >= 2) b.final_hessian = symmetrize(h.hessian);
  } catch (const NumericError&) {
    throw DivergenceError(tau);
  }
  if (!std::isfinite(b.final_cost)) throw DivergenceError(tau);
  b.total_cost = J + b.final_cost;
  return b;
}

double total_cost(const TrajectoryProblem& problem, const ControlSequence& u) {
  return forward(problem, u, 0, 0).total_cost;
}

namespace {

void require_orders(const ExpansionBundle& b, int order_f, int order_h, const char* who) {
  if (b.order_f < order_f || b.order_h < order_h) {
    throw ParameterError(std::string(who) + ": expansion bundle lacks the required orders");
  }
}

enum class Curvature { none, adjoint, value_slope };

OracleDirection lq_backward(const ExpansionBundle& b, double nu, ValidityMode mode, Curvature c) {
  if (nu < 0.0) throw ParameterError("backward pass: nu must be non-negative");
  const int tau = b.horizon();
  const int nx = static_cast<int>(b.x[0].size());
  const int nu_dim = tau > 0 ? static_cast<int>(b.u[0].size()) : 0;
  OracleDirection out;
  out.policies.assign(tau, AffinePolicy::zero(nx, nu_dim));
  QuadraticValueFunction value{b.final_hessian, b.final_gradient, 0.0};
  Vector lambda = b.final_gradient;
  for (int t = tau - 1; t >= 0; --t) {
    const StepExpansion& s = b.steps[t];
    QuadraticCostModel cost = *s.quad;
    cost.Q.diagonal().array() += nu;
    if (c != Curvature::none) {
      const Vector& w = c == Curvature::adjoint ? lambda : value.j;
      const Matrix Hl = lambda_hessian(s.handle->joint(), stack(b.x[t], b.u[t]), w);
      cost.H = symmetrize(cost.H + Hl.topLeftCorner(nx, nx));
      cost.R += Hl.topRightCorner(nx, nu_dim);
      cost.Q = symmetrize(cost.Q + Hl.bottomRightCorner(nu_dim, nu_dim));
    }
    LqStageProblem stage{*s.lin, std::move(cost), std::move(value)};
    CheckedStage cs = solve_checked(stage, mode);
    if (!cs.report.valid) {
      for (int r = 0; r <= t; ++r) out.policies[r] = AffinePolicy::zero(nx, nu_dim);
      out.c0 = QuadraticValueFunction::infeasible(nx);
      out.feasible = false;
      out.failed_stage = t;
      return out;
    }
    out.policies[t] = std::move(cs.solution.policy);
    value = std::move(cs.solution.value);
    if (c == Curvature::adjoint) lambda = s.p + s.lin->A.transpose() * lambda;
  }
  out.c0 = std::move(value);
  return out;
}

}  // namespace

OracleDirection backward_gd(const ExpansionBundle& b, double nu, bool do_rollout) {
  require_orders(b, 1, 1, "backward_gd");
  if (!(nu > 0.0)) throw ParameterError("backward_gd: nu must be positive");
  const int tau = b.horizon();
  OracleDirection out;
  out.policies.resize(tau);
  AffineValue value{b.final_gradient, 0.0};
  for (int t = tau - 1; t >= 0; --t) {
    const StepExpansion& s = b.steps[t];
    LbpResult r = lbp(*s.lin, s.p, s.q, value, nu);
    out.policies[t] = std::move(r.policy);
    value = std::move(r.value);
  }
  const int nx = static_cast<int>(b.x[0].size());
  out.c0 = QuadraticValueFunction{Matrix::Zero(nx, nx), value.j, value.j0};
  if (do_rollout) {
    out.direction = rollout(Vector::Zero(nx), out.policies, linearized_steps(b));
  } else {
    out.direction.resize(tau);
    for (int t = 0; t < tau; ++t) out.direction[t] = out.policies[t].k;
  }
  return out;
}

OracleDirection backward_gn(const ExpansionBundle& b, double nu, ValidityMode mode) {
  require_orders(b, 1, 2, "backward_gn");
  return lq_backward(b, nu, mode, Curvature::none);
}

OracleDirection backward_ne(const ExpansionBundle& b, double nu, ValidityMode mode) {
  require_orders(b, 2, 2, "backward_ne");
  return lq_backward(b, nu, mode, Curvature::adjoint);
}

OracleDirection backward_ddp_q(const ExpansionBundle& b, double nu, ValidityMode mode) {
  require_orders(b, 2, 2, "backward_ddp_q");
  return lq_backward(b, nu, mode, Curvature::value_slope);
}

OracleDirection backward(const ExpansionBundle& b, OracleKind kind, double nu, ValidityMode mode) {
  switch (kind) {
    case OracleKind::gd: return backward_gd(b, nu);
    case OracleKind::gn:
    case OracleKind::ddp_lq: return backward_gn(b, nu, mode);
    case OracleKind::ne: return backward_ne(b, nu, mode);
    case OracleKind::ddp_q: return backward_ddp_q(b, nu, mode);
  }
  throw ParameterError("backward: unknown oracle kind");
}

std::vector<Vector> adjoints(const ExpansionBundle& b) {
  require_orders(b, 1, 1, "adjoints");
  const int tau = b.horizon();
  std::vector<Vector> lambda(tau + 1);
  lambda[tau] = b.final_gradient;
  for (int t = tau - 1; t >= 0; --t) {
    lambda[t] = b.steps[t].p + b.steps[t].lin->A.transpose() * lambda[t + 1];
  }
  return lambda;
}

Vector gradient_from_bundle(const ExpansionBundle& b) {
  const std::vector<Vector> lambda = adjoints(b);
  const int tau = b.horizon();
  ControlSequence g(tau);
  for (int t = 0; t < tau; ++t) {
    g[t] = b.steps[t].q + b.steps[t].lin->B.transpose() * lambda[t + 1];
  }
  return flatten(g);
}

double cost_gradient_norm(const ExpansionBundle& b) {
  require_orders(b, 0, 1, "cost_gradient_norm");
  double sq = b.final_gradient.squaredNorm();
  for (int t = 0; t < b.horizon(); ++t) {
    if (t > 0) sq += b.steps[t].p.squaredNorm();
    sq += b.steps[t].q.squaredNorm();
  }
  return std::sqrt(sq);
}

StepMap linearized_steps(const ExpansionBundle& b) {
  require_orders(b, 1, 0, "linearized_steps");
  return [&b](int t, const StateVec& y, const CtrlVec& v) -> StateVec {
    return b.steps[t].lin->apply(y, v);
  };
}

StepMap finite_difference_steps(const TrajectoryProblem& problem, const ExpansionBundle& b) {
  return [&problem, &b](int t, const StateVec& y, const CtrlVec& v) -> StateVec {
    try {
      return problem.dynamics[t](b.x[t] + y, b.u[t] + v) - b.x[t + 1];
    } catch (const NumericError&) {
      throw DivergenceError(t + 1);
    }
  };
}

StepMap step_maps_for(OracleKind kind, const TrajectoryProblem& problem,
                      const ExpansionBundle& bundle) {
  if (rolls_on_original_dynamics(kind)) return finite_difference_steps(problem, bundle);
  return linearized_steps(bundle);
}

ControlSequence rollout(const StateVec& y0, const std::vector<AffinePolicy>& policies,
                        const StepMap& step, double gamma) {
  const int tau = static_cast<int>(policies.size());
  ControlSequence v(tau);
  StateVec y = y0;
  for (int t = 0; t < tau; ++t) {
    v[t] = gamma * policies[t].k + policies[t].K * y;
    if (t + 1 < tau) {
      y = step(t, y, v[t]);
      if (!y.allFinite()) throw DivergenceError(t + 1);
    }
  }
  return v;
}

OracleDirection oracle(const TrajectoryProblem& problem, const ControlSequence& u, OracleKind kind,
                       double nu, ValidityMode mode) {
  const ExpansionOrders o = orders_for(kind);
  const ExpansionBundle b = forward(problem, u, o.dynamics, o.costs);
  return oracle(problem, b, kind, nu, mode);
}

OracleDirection oracle(const TrajectoryProblem& problem, const ExpansionBundle& bundle,
                       OracleKind kind, double nu, ValidityMode mode) {
  OracleDirection d = backward(bundle, kind, nu, mode);
  if (kind == OracleKind::gd) return d;
  if (!d.feasible) {
    d.direction.assign(bundle.horizon(), CtrlVec::Zero(problem.nu));
    return d;
  }
  d.direction = rollout(StateVec::Zero(problem.nx), d.policies,
                        step_maps_for(kind, problem, bundle));
  return d;
}

SmoothnessBounds smoothness_bounds(double lx, double lu, double Lxx, double Lxu, double Luu,
                                   int horizon) {
  if (horizon < 1) throw ParameterError("smoothness_bounds: horizon must be positive");
  if (lx < 0 || lu < 0 || Lxx < 0 || Lxu < 0 || Luu < 0) {
    throw ParameterError("smoothness_bounds: constants must be non-negative");
  }
  double S = 0.0;
  double power = 1.0;
  for (int t = 0; t < horizon; ++t) {
    S += power;
    power *= lx;
  }
  SmoothnessBounds out;
  out.l_bound = lu * S;
  out.L_bound = S * (Lxx * out.l_bound * out.l_bound + 2.0 * Lxu * out.l_bound + Luu);
  return out;
}

}  // namespace trajopt

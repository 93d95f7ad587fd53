#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trajopt/core.hpp"
#include "trajopt/lqsolve.hpp"

namespace trajopt {

enum class OracleKind { gd, gn, ne, ddp_lq, ddp_q };

std::string to_string(OracleKind kind);
OracleKind oracle_kind_from_string(const std::string& name);
/// True for DDP-LQ and DDP-Q, which roll out on the original dynamics.
bool rolls_on_original_dynamics(OracleKind kind);

struct ExpansionOrders {
  int dynamics = 0;
  int costs = 0;
};
ExpansionOrders orders_for(OracleKind kind);

struct StepExpansion {
  double cost = 0.0;
  std::optional<LinearMap> lin;
  Vector p;  ///< d h_t / d x, empty below order 1
  Vector q;  ///< d h_t / d u, empty below order 1
  std::optional<QuadraticCostModel> quad;
  /// Handle to re-differentiate f_t at (x_t, u_t); set when the dynamics order is 2.
  std::optional<Dynamics> handle;
};

struct ExpansionBundle {
  int order_f = 0;
  int order_h = 0;
  std::vector<StateVec> x;  ///< x_0 .. x_tau
  ControlSequence u;        ///< u_0 .. u_{tau-1}
  std::vector<StepExpansion> steps;
  double final_cost = 0.0;
  Vector final_gradient;
  Matrix final_hessian;
  double total_cost = 0.0;

  int horizon() const { return static_cast<int>(u.size()); }
  /// Bytes held by stored derivative information (trajectory excluded).
  std::size_t storage_bytes() const;
};

/// Rolls out u, accumulates J(u) and records derivatives of the requested orders.
/// Throws DivergenceError(t) on a non-finite state or cost.
ExpansionBundle forward(const TrajectoryProblem& problem, const ControlSequence& u, int order_f,
                        int order_h);

/// J(u). Throws DivergenceError like `forward`.
double total_cost(const TrajectoryProblem& problem, const ControlSequence& u);

struct OracleDirection {
  ControlSequence direction;
  std::vector<AffinePolicy> policies;
  QuadraticValueFunction c0;
  bool feasible = true;
  int failed_stage = -1;

  /// c_0(0); +infinity when infeasible.
  double model_decrease() const { return c0.j0; }
};

OracleDirection backward_gd(const ExpansionBundle& bundle, double nu, bool rollout = false);
OracleDirection backward_gn(const ExpansionBundle& bundle, double nu,
                            ValidityMode mode = ValidityMode::descent);
OracleDirection backward_ne(const ExpansionBundle& bundle, double nu,
                            ValidityMode mode = ValidityMode::descent);
OracleDirection backward_ddp_q(const ExpansionBundle& bundle, double nu,
                               ValidityMode mode = ValidityMode::descent);
/// Dispatches on kind; DDP-LQ uses the Gauss-Newton pass.
OracleDirection backward(const ExpansionBundle& bundle, OracleKind kind, double nu,
                         ValidityMode mode = ValidityMode::descent);

/// Adjoint variables lambda_0 .. lambda_tau.
std::vector<Vector> adjoints(const ExpansionBundle& bundle);
/// Stacked gradient of J with respect to u.
Vector gradient_from_bundle(const ExpansionBundle& bundle);
/// Norm of the stacked partial cost gradients over x_1..x_tau and u_0..u_{tau-1}.
double cost_gradient_norm(const ExpansionBundle& bundle);

using StepMap = std::function<StateVec(int t, const StateVec& y, const CtrlVec& v)>;

/// y, v -> A_t y + B_t v. The map references `bundle`.
StepMap linearized_steps(const ExpansionBundle& bundle);
/// y, v -> f_t(x_t + y, u_t + v) - x_{t+1}. The map references `problem` and `bundle`.
StepMap finite_difference_steps(const TrajectoryProblem& problem, const ExpansionBundle& bundle);
StepMap step_maps_for(OracleKind kind, const TrajectoryProblem& problem,
                      const ExpansionBundle& bundle);

/// v_t = gamma k_t + K_t y_t, y_{t+1} = step(t, y_t, v_t). Throws DivergenceError on non-finite y.
ControlSequence rollout(const StateVec& y0, const std::vector<AffinePolicy>& policies,
                        const StepMap& step, double gamma = 1.0);

/// Forward pass, backward pass of `kind` and rollout, composed.
OracleDirection oracle(const TrajectoryProblem& problem, const ControlSequence& u, OracleKind kind,
                       double nu, ValidityMode mode = ValidityMode::descent);
/// Same, reusing a bundle computed with at least `orders_for(kind)`.
OracleDirection oracle(const TrajectoryProblem& problem, const ExpansionBundle& bundle,
                       OracleKind kind, double nu, ValidityMode mode = ValidityMode::descent);

struct SmoothnessBounds {
  double l_bound = 0.0;
  double L_bound = 0.0;
};

/// Lipschitz constants of the trajectory map u -> x from per-step constants of the dynamics.
SmoothnessBounds smoothness_bounds(double lx, double lu, double Lxx, double Lxu, double Luu,
                                   int horizon);

}  // namespace trajopt

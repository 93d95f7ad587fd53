#pragma once

#include <limits>
#include <vector>

#include "trajopt/autodiff.hpp"

namespace trajopt {

using StateVec = Vector;
using CtrlVec = Vector;
using ControlSequence = std::vector<CtrlVec>;

/// One step of the dynamics, x_{t+1} = f(x_t, u_t).
class Dynamics {
 public:
  Dynamics() = default;

  /// `f` must be callable as f(VecX<T> x, VecX<T> u) -> VecX<T> for T in {double, HyperDual}.
  template <class F>
  Dynamics(int nx, int nu, F f)
      : nx_(nx),
        nu_(nu),
        joint_(nx + nu, nx, [f, nx, nu](const auto& z) {
          using T = typename std::decay_t<decltype(z)>::Scalar;
          const VecX<T> x = z.head(nx);
          const VecX<T> u = z.tail(nu);
          return VecX<T>(f(x, u));
        }) {}

  int nx() const { return nx_; }
  int nu() const { return nu_; }

  StateVec operator()(const StateVec& x, const CtrlVec& u) const;
  /// The same map viewed as a function of the stacked input (x, u).
  const VectorFunction& joint() const { return joint_; }

 private:
  int nx_ = 0;
  int nu_ = 0;
  VectorFunction joint_;
};

/// Running cost h_t(x_t, u_t).
class StageCost {
 public:
  StageCost() = default;

  template <class F>
  StageCost(int nx, int nu, F h)
      : nx_(nx),
        nu_(nu),
        joint_(nx + nu, [h, nx, nu](const auto& z) {
          using T = typename std::decay_t<decltype(z)>::Scalar;
          const VecX<T> x = z.head(nx);
          const VecX<T> u = z.tail(nu);
          return T(h(x, u));
        }) {}

  int nx() const { return nx_; }
  int nu() const { return nu_; }

  double operator()(const StateVec& x, const CtrlVec& u) const;
  const ScalarFunction& joint() const { return joint_; }

 private:
  int nx_ = 0;
  int nu_ = 0;
  ScalarFunction joint_;
};

/// Final cost h_tau(x_tau).
class FinalCost {
 public:
  FinalCost() = default;

  template <class F>
  FinalCost(int nx, F h) : nx_(nx), fn_(nx, [h](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    return T(h(x));
  }) {}

  int nx() const { return nx_; }
  double operator()(const StateVec& x) const { return fn_(x); }
  const ScalarFunction& function() const { return fn_; }

 private:
  int nx_ = 0;
  ScalarFunction fn_;
};

struct TrajectoryProblem {
  int horizon = 0;
  int nx = 0;
  int nu = 0;
  StateVec x0;
  std::vector<Dynamics> dynamics;
  std::vector<StageCost> costs;
  FinalCost final_cost;

  /// Throws ShapeError/ParameterError on inconsistent sizes.
  void validate() const;
  /// Length-tau zero control sequence.
  ControlSequence zero_controls() const;
};

/// Linear expansion y, v -> A y + B v of a dynamic (A = d f / d x, B = d f / d u).
struct LinearMap {
  Matrix A;
  Matrix B;

  Vector apply(const Vector& y, const Vector& v) const { return A * y + B * v; }
};

/// y, v -> 1/2 y'Hy + 1/2 v'Qv + y'Rv + p'y + q'v.
struct QuadraticCostModel {
  Matrix H;
  Matrix Q;
  Matrix R;
  Vector p;
  Vector q;

  QuadraticCostModel() = default;
  /// Symmetrizes H and Q.
  QuadraticCostModel(Matrix H, Matrix Q, Matrix R, Vector p, Vector q);
  static QuadraticCostModel zero(int nx, int nu);
};

double evaluate_quadratic(const QuadraticCostModel& model, const Vector& y, const Vector& v);

/// Second-order derivatives of a dynamic, one block triple per output coordinate.
struct DynTensor {
  std::vector<Matrix> xx;
  std::vector<Matrix> xu;
  std::vector<Matrix> uu;

  int nx() const;
  int nu() const;
  /// Symmetric (nx+nu) x (nx+nu) matrix sum_k lambda_k [[xx_k, xu_k], [xu_k', uu_k]].
  Matrix contract(const Vector& lambda) const;
};

DynTensor dyn_tensor(const Dynamics& f, const StateVec& x, const CtrlVec& u);

/// c(y) = 1/2 y'Jy + j'y + j0.
struct QuadraticValueFunction {
  Matrix J;
  Vector j;
  double j0 = 0.0;

  double operator()(const Vector& y) const;
  static QuadraticValueFunction infeasible(int nx);
  bool is_infeasible() const { return j0 == std::numeric_limits<double>::infinity(); }
};

/// y -> K y + k.
struct AffinePolicy {
  Matrix K;
  Vector k;

  Vector operator()(const Vector& y) const { return K * y + k; }
  static AffinePolicy zero(int nx, int nu);
};

/// f(x + y, u + v) - f(x, u). Throws NumericError carrying `t` on non-finite output.
StateVec finite_difference_dynamic(const Dynamics& f, const StateVec& x, const CtrlVec& u,
                                   const StateVec& y, const CtrlVec& v, int t = -1);

Matrix symmetrize(const Matrix& M);
bool all_finite(const Vector& v);

/// Stacks a control sequence into one flat vector.
Vector flatten(const ControlSequence& u);
ControlSequence unflatten(const Vector& flat, int horizon, int nu);
ControlSequence add(const ControlSequence& a, const ControlSequence& b, double scale = 1.0);

}  // namespace trajopt

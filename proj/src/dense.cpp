#include "trajopt/dense.hpp"

#include <string>

namespace trajopt::dense {

namespace {

struct Assembly {
  int tau = 0;
  int nx = 0;
  int nu = 0;
  std::vector<StateVec> x;
  Matrix Jx;  // d F / d x over stacked x_1..x_tau
  Matrix Ju;  // d F / d u
  Matrix Dx;  // (I - Jx)^{-1} Ju
  Eigen::PartialPivLU<Matrix> lu;  // of I - Jx
};

Vector stack(const StateVec& x, const CtrlVec& u) {
  Vector z(x.size() + u.size());
  z << x, u;
  return z;
}

Assembly assemble(const TrajectoryProblem& problem, const ControlSequence& u) {
  problem.validate();
  Assembly a;
  a.tau = problem.horizon;
  a.nx = problem.nx;
  a.nu = problem.nu;
  if (a.tau * a.nx > kMaxStackedStates) {
    throw ParameterError("dense oracle refuses tau * nx = " + std::to_string(a.tau * a.nx));
  }
  const int N = a.tau * a.nx;
  const int Mu = a.tau * a.nu;
  a.x.resize(a.tau + 1);
  a.x[0] = problem.x0;
  a.Jx = Matrix::Zero(N, N);
  a.Ju = Matrix::Zero(N, Mu);
  for (int t = 0; t < a.tau; ++t) {
    const Vector z = stack(a.x[t], u[t]);
    const Matrix F = jacobian(problem.dynamics[t].joint(), z);
    a.x[t + 1] = problem.dynamics[t](a.x[t], u[t]);
    a.Ju.block(t * a.nx, t * a.nu, a.nx, a.nu) = F.rightCols(a.nu);
    if (t >= 1) a.Jx.block(t * a.nx, (t - 1) * a.nx, a.nx, a.nx) = F.leftCols(a.nx);
  }
  a.lu.compute(Matrix::Identity(N, N) - a.Jx);
  a.Dx = a.lu.solve(a.Ju);
  return a;
}

struct CostDerivatives {
  Vector gx;
  Vector gu;
  Matrix Hxx;
  Matrix Hxu;
  Matrix Huu;
};

CostDerivatives cost_derivatives(const TrajectoryProblem& problem, const ControlSequence& u,
                                 const Assembly& a) {
  const int nx = a.nx;
  const int nu = a.nu;
  CostDerivatives c;
  c.gx = Vector::Zero(a.tau * nx);
  c.gu = Vector::Zero(a.tau * nu);
  c.Hxx = Matrix::Zero(a.tau * nx, a.tau * nx);
  c.Hxu = Matrix::Zero(a.tau * nx, a.tau * nu);
  c.Huu = Matrix::Zero(a.tau * nu, a.tau * nu);
  for (int t = 0; t < a.tau; ++t) {
    const ScalarExpansion h = expand(problem.costs[t].joint(), stack(a.x[t], u[t]), 2);
    c.gu.segment(t * nu, nu) = h.gradient.tail(nu);
    c.Huu.block(t * nu, t * nu, nu, nu) = h.hessian.bottomRightCorner(nu, nu);
    if (t >= 1) {
      const int s = (t - 1) * nx;
      c.gx.segment(s, nx) = h.gradient.head(nx);
      c.Hxx.block(s, s, nx, nx) = h.hessian.topLeftCorner(nx, nx);
      c.Hxu.block(s, t * nu, nx, nu) = h.hessian.topRightCorner(nx, nu);
    }
  }
  const ScalarExpansion fin = expand(problem.final_cost.function(), a.x[a.tau], 2);
  const int s = (a.tau - 1) * nx;
  c.gx.segment(s, nx) = fin.gradient;
  c.Hxx.block(s, s, nx, nx) = fin.hessian;
  return c;
}

Matrix curvature(const TrajectoryProblem& problem, const ControlSequence& u, const Assembly& a,
                 const Vector& mu) {
  const int nx = a.nx;
  const int nu = a.nu;
  const Vector w = a.lu.transpose().solve(mu);
  Matrix Lxx = Matrix::Zero(a.tau * nx, a.tau * nx);
  Matrix Lxu = Matrix::Zero(a.tau * nx, a.tau * nu);
  Matrix Luu = Matrix::Zero(a.tau * nu, a.tau * nu);
  for (int t = 0; t < a.tau; ++t) {
    const DynTensor T = dyn_tensor(problem.dynamics[t], a.x[t], u[t]);
    const Matrix C = T.contract(w.segment(t * nx, nx));
    Luu.block(t * nu, t * nu, nu, nu) = C.bottomRightCorner(nu, nu);
    if (t >= 1) {
      const int s = (t - 1) * nx;
      Lxx.block(s, s, nx, nx) = C.topLeftCorner(nx, nx);
      Lxu.block(s, t * nu, nx, nu) = C.topRightCorner(nx, nu);
    }
  }
  const Matrix cross = a.Dx.transpose() * Lxu;
  return symmetrize(a.Dx.transpose() * Lxx * a.Dx + Luu + cross + cross.transpose());
}

Matrix gauss_newton_from(const Assembly& a, const CostDerivatives& c) {
  const Matrix cross = a.Dx.transpose() * c.Hxu;
  return symmetrize(a.Dx.transpose() * c.Hxx * a.Dx + c.Huu + cross + cross.transpose());
}

}  // namespace

Matrix trajectory_jacobian(const TrajectoryProblem& problem, const ControlSequence& u) {
  return assemble(problem, u).Dx;
}

Vector gradient(const TrajectoryProblem& problem, const ControlSequence& u) {
  const Assembly a = assemble(problem, u);
  const CostDerivatives c = cost_derivatives(problem, u, a);
  return c.gu + a.Dx.transpose() * c.gx;
}

Matrix hessian(const TrajectoryProblem& problem, const ControlSequence& u) {
  const Assembly a = assemble(problem, u);
  const CostDerivatives c = cost_derivatives(problem, u, a);
  return gauss_newton_from(a, c) + curvature(problem, u, a, c.gx);
}

Matrix gauss_newton(const TrajectoryProblem& problem, const ControlSequence& u) {
  const Assembly a = assemble(problem, u);
  return gauss_newton_from(a, cost_derivatives(problem, u, a));
}

Matrix trajectory_curvature(const TrajectoryProblem& problem, const ControlSequence& u,
                            const Vector& mu) {
  const Assembly a = assemble(problem, u);
  if (mu.size() != a.Jx.rows()) throw ShapeError("trajectory_curvature: multiplier size");
  return curvature(problem, u, a, mu);
}

}  // namespace trajopt::dense

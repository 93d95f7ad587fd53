#include "trajopt/lqsolve.hpp"

#include <cmath>

namespace trajopt {

namespace {

struct StageTerms {
  Matrix M;  // Q + B'JB
  Matrix N;  // R' + B'JA
  Vector m;  // q + B'j
};

StageTerms stage_terms(const LqStageProblem& s) {
  const Matrix& A = s.lin.A;
  const Matrix& B = s.lin.B;
  const Matrix& J = s.next_value.J;
  if (A.rows() != J.rows() || B.rows() != J.rows() || s.cost.H.rows() != A.cols() ||
      s.cost.Q.rows() != B.cols() || s.next_value.j.size() != J.rows()) {
    throw ShapeError("LQ stage: inconsistent dimensions");
  }
  const Matrix JB = J * B;
  StageTerms out;
  out.M = symmetrize(s.cost.Q + B.transpose() * JB);
  out.N = s.cost.R.transpose() + JB.transpose() * A;
  out.m = s.cost.q + B.transpose() * s.next_value.j;
  return out;
}

LqStageSolution solve_with(const LqStageProblem& s, const StageTerms& st,
                           const Eigen::LLT<Matrix>& llt) {
  const Matrix& A = s.lin.A;
  const Matrix MinvN = llt.solve(st.N);
  const Vector Minvm = llt.solve(st.m);
  LqStageSolution out;
  out.policy.K = -MinvN;
  out.policy.k = -Minvm;
  const Matrix JA = s.next_value.J * A;
  out.value.J = symmetrize(s.cost.H + A.transpose() * JA - st.N.transpose() * MinvN);
  out.value.j = s.cost.p + A.transpose() * s.next_value.j - st.N.transpose() * Minvm;
  out.value.j0 = s.next_value.j0 - 0.5 * st.m.dot(Minvm);
  return out;
}

double descent_threshold(const LqStageProblem& s) {
  return 1e-14 * (1.0 + std::abs(s.next_value.j0));
}

}  // namespace

LqStageSolution lqbp(const LqStageProblem& stage, int t) {
  const StageTerms st = stage_terms(stage);
  Eigen::LLT<Matrix> llt(st.M);
  if (llt.info() != Eigen::Success) throw InfeasibleStageError(t);
  return solve_with(stage, st, llt);
}

LbpResult lbp(const LinearMap& lin, const Vector& p, const Vector& q, const AffineValue& next,
              double nu) {
  if (!(nu > 0.0)) throw ParameterError("lbp: regularization nu must be positive");
  const Vector m = q + lin.B.transpose() * next.j;
  LbpResult out;
  out.value.j = p + lin.A.transpose() * next.j;
  out.value.j0 = next.j0 - m.squaredNorm() / (2.0 * nu);
  out.policy.K = Matrix::Zero(q.size(), p.size());
  out.policy.k = -m / nu;
  return out;
}

ValidityReport check_subproblem(const LqStageProblem& stage, ValidityMode mode) {
  return solve_checked(stage, mode).report;
}

CheckedStage solve_checked(const LqStageProblem& stage, ValidityMode mode) {
  const StageTerms st = stage_terms(stage);
  CheckedStage out;
  out.report.mode = mode;
  Eigen::LLT<Matrix> llt(st.M);
  const bool spd = llt.info() == Eigen::Success;
  if (mode == ValidityMode::strong_convexity) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(st.M, Eigen::EigenvaluesOnly);
    out.report.witness = eig.eigenvalues().minCoeff();
    out.report.valid = out.report.witness > 0.0 && spd;
  } else {
    if (spd) {
      out.report.witness = -0.5 * st.m.dot(llt.solve(st.m));
    } else {
      Eigen::FullPivLU<Matrix> lu(st.M);
      out.report.witness = lu.isInvertible() ? -0.5 * st.m.dot(lu.solve(st.m))
                                             : std::numeric_limits<double>::infinity();
    }
    out.report.valid = spd && out.report.witness <= descent_threshold(stage);
  }
  if (out.report.valid) out.solution = solve_with(stage, st, llt);
  return out;
}

ControlSequence dynprog(const TrajectoryProblem& problem) {
  problem.validate();
  const int tau = problem.horizon;
  const int nx = problem.nx;
  const int nu = problem.nu;
  const Vector u0 = Vector::Zero(nu);

  std::vector<StateVec> xbar(tau + 1);
  xbar[0] = problem.x0;
  for (int t = 0; t < tau; ++t) xbar[t + 1] = problem.dynamics[t](xbar[t], u0);

  const ScalarExpansion fin = expand(problem.final_cost.function(), xbar[tau], 2);
  QuadraticValueFunction value{symmetrize(fin.hessian), fin.gradient, 0.0};
  std::vector<AffinePolicy> policies(tau);
  for (int t = tau - 1; t >= 0; --t) {
    Vector z(nx + nu);
    z << xbar[t], u0;
    const Matrix F = jacobian(problem.dynamics[t].joint(), z);
    const ScalarExpansion h = expand(problem.costs[t].joint(), z, 2);
    LqStageProblem stage{
        LinearMap{F.leftCols(nx), F.rightCols(nu)},
        QuadraticCostModel(h.hessian.topLeftCorner(nx, nx), h.hessian.bottomRightCorner(nu, nu),
                           h.hessian.topRightCorner(nx, nu), h.gradient.head(nx),
                           h.gradient.tail(nu)),
        value};
    LqStageSolution sol = lqbp(stage, t);
    policies[t] = std::move(sol.policy);
    value = std::move(sol.value);
  }

  ControlSequence u(tau);
  StateVec x = problem.x0;
  for (int t = 0; t < tau; ++t) {
    u[t] = policies[t](x - xbar[t]);
    x = problem.dynamics[t](x, u[t]);
  }
  return u;
}

}  // namespace trajopt

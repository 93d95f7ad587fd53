#pragma once

#include <utility>

#include "trajopt/core.hpp"

namespace trajopt {

struct LqStageProblem {
  LinearMap lin;
  QuadraticCostModel cost;
  QuadraticValueFunction next_value;
};

enum class ValidityMode { strong_convexity, descent };

struct ValidityReport {
  bool valid = false;
  ValidityMode mode = ValidityMode::descent;
  /// Min eigenvalue of M (strong convexity) or j0_t - j0_{t+1} (descent).
  double witness = 0.0;
};

struct LqStageSolution {
  QuadraticValueFunction value;
  AffinePolicy policy;
};

/// Bellman back-propagation of a linear-quadratic stage. Throws InfeasibleStageError(t) when
/// M = Q + B'J'B is not positive definite.
LqStageSolution lqbp(const LqStageProblem& stage, int t = -1);

struct AffineValue {
  Vector j;
  double j0 = 0.0;
};

struct LbpResult {
  AffineValue value;
  AffinePolicy policy;
};

/// Back-propagation through linear dynamics and linear costs with ridge nu / 2 |v|^2.
LbpResult lbp(const LinearMap& lin, const Vector& p, const Vector& q, const AffineValue& next,
              double nu);

ValidityReport check_subproblem(const LqStageProblem& stage,
                                ValidityMode mode = ValidityMode::descent);

/// Combined check and solve; returns std::nullopt-like `valid == false` without throwing.
struct CheckedStage {
  ValidityReport report;
  LqStageSolution solution;
};
CheckedStage solve_checked(const LqStageProblem& stage, ValidityMode mode);

/// Exact solution of a problem with linear dynamics and quadratic costs, expanded around zero.
ControlSequence dynprog(const TrajectoryProblem& problem);

}  // namespace trajopt

#pragma once

// Brute-force derivatives of the total objective, assembled as dense block matrices.
// Cubic in tau * nx; meant for validating the recursive oracles on small instances.

#include "trajopt/core.hpp"

namespace trajopt::dense {

inline constexpr int kMaxStackedStates = 256;

/// d x_{1..tau} / d u_{0..tau-1}, shape (tau nx) x (tau nu).
Matrix trajectory_jacobian(const TrajectoryProblem& problem, const ControlSequence& u);

/// Gradient of J with respect to the stacked controls.
Vector gradient(const TrajectoryProblem& problem, const ControlSequence& u);

/// Full Hessian of J, including the second-order terms of the dynamics.
Matrix hessian(const TrajectoryProblem& problem, const ControlSequence& u);

/// Gauss-Newton matrix G' H G, dynamics curvature dropped.
Matrix gauss_newton(const TrajectoryProblem& problem, const ControlSequence& u);

/// Hessian of u -> Phi(u)' mu for a multiplier mu on the stacked states x_{1..tau}.
Matrix trajectory_curvature(const TrajectoryProblem& problem, const ControlSequence& u,
                            const Vector& mu);

}  // namespace trajopt::dense

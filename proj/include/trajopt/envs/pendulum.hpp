#pragma once

#include <numbers>

#include "trajopt/autodiff.hpp"

namespace trajopt {

struct PendulumParams {
  double m = 1.0;
  double g = 10.0;
  double l = 1.0;
  double mu = 0.01;
  double lambda_ctrl = 1e-6;
  double rho_speed = 0.1;
  double T = 2.0;
};

/// (theta, omega), u -> (omega, -(g/l) sin theta - mu/(m l^2) omega + u/(m l^2)).
template <class T>
VecX<T> pendulum_dynamics(const PendulumParams& p, const VecX<T>& x, const VecX<T>& u) {
  using std::sin;
  const double inertia = p.m * p.l * p.l;
  VecX<T> out(2);
  out(0) = x(1);
  out(1) = -(p.g / p.l) * sin(x(0)) - (p.mu / inertia) * x(1) + u(0) / inertia;
  return out;
}

template <class T>
T pendulum_running_cost(const PendulumParams& p, const VecX<T>& u) {
  return p.lambda_ctrl * u.squaredNorm();
}

/// (pi - theta)^2 + rho omega^2.
template <class T>
T pendulum_final_cost(const PendulumParams& p, const VecX<T>& x) {
  const T e = std::numbers::pi - x(0);
  return e * e + p.rho_speed * x(1) * x(1);
}

}  // namespace trajopt

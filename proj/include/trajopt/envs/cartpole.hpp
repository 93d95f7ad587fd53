#pragma once

#include <cmath>
#include <numbers>

#include "trajopt/autodiff.hpp"

namespace trajopt {

struct CartPoleParams {
  double m = 0.2;   ///< rod mass
  double M = 0.5;   ///< cart mass
  double b = 0.1;   ///< viscous friction of the cart
  double I = 0.006;
  double l = 0.3;
  double g = 9.81;
  double rho_speed = 0.1;    ///< weight on omega^2 once the pole must stay up
  double rho_barrier = 1.0;  ///< weight on the cart position hinges
  double lambda_ctrl = 1e-6;
  double T = 2.5;
  double z_max = 2.0;
  double z_min = -2.0;
  double stay_put_time = 0.6;
};

/// Step index after which the pole must stay inverted: tau - floor(stay_put_time / dt).
int cartpole_stay_put_step(const CartPoleParams& p, int horizon);

/// (z, theta, zeta, omega), u -> (zeta, omega, z'', theta'').
template <class T>
VecX<T> cartpole_dynamics(const CartPoleParams& p, const VecX<T>& x, const VecX<T>& u) {
  using std::cos;
  using std::sin;
  const T s = sin(x(1));
  const T c = cos(x(1));
  const T a11(p.M + p.m);
  const T a12 = p.m * p.l * c;
  const T a22(p.I + p.m * p.l * p.l);
  const T r1 = -p.b * x(2) + p.m * p.l * x(3) * x(3) * s + u(0);
  const T r2 = -p.m * p.g * p.l * s;
  const T det = a11 * a22 - a12 * a12;
  VecX<T> out(4);
  out(0) = x(2);
  out(1) = x(3);
  out(2) = (a22 * r1 - a12 * r2) / det;
  out(3) = (a11 * r2 - a12 * r1) / det;
  return out;
}

/// Smooth hinges keeping the cart inside [z_min, z_max].
template <class T>
T cartpole_barrier(const CartPoleParams& p, const T& z) {
  return p.rho_barrier * (smooth_max(T(z - p.z_max)) + smooth_max(T(p.z_min - z)));
}

/// (theta + pi)^2 + rho omega^2.
template <class T>
T cartpole_target(const CartPoleParams& p, const VecX<T>& x) {
  const T e = x(1) + std::numbers::pi;
  return e * e + p.rho_speed * x(3) * x(3);
}

template <class T>
T cartpole_cost(const CartPoleParams& p, int t, int stay_put_step, const VecX<T>& x,
                const VecX<T>& u) {
  T c = cartpole_barrier(p, x(0)) + p.lambda_ctrl * u(0) * u(0);
  if (t >= stay_put_step) c += cartpole_target(p, x);
  return c;
}

template <class T>
T cartpole_final_cost(const CartPoleParams& p, const VecX<T>& x) {
  return cartpole_barrier(p, x(0)) + cartpole_target(p, x);
}

}  // namespace trajopt

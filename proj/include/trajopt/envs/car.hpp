#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "trajopt/autodiff.hpp"
#include "trajopt/errors.hpp"

namespace trajopt {

struct SimpleCarParams {
  double L = 1.0;
  double v_ref = 3.0;
  double v_init = 1.0;
  double lambda_ctrl = 1e-6;
  double T = 2.0;
};

struct BicycleParams {
  double Cm1 = 0.287;
  double Cm2 = 0.0545;
  double Cr0 = 0.0518;
  double Crd = 0.00035;
  double Br = 3.3852;
  double Cr = 1.2691;
  double Dr = 0.1737;
  double lr = 0.033;
  double Bf = 2.579;
  double Cf = 1.2;
  double Df = 0.192;
  double lf = 0.029;
  double m = 0.041;
  double Iz = 27.8e-6;
  double rho_contouring = 0.1;
  double rho_lagging = 10.0;
  double rho_speed = 0.1;
  double rho_border = 100.0;
  double v_ref = 3.0;
  double v_init = 1.0;
  double lambda_ctrl = 1e-6;
  double eps_barrier = 1e-6;
  double T = 1.0;
  /// Margin w added to the signed border distances.
  double car_margin = 0.05;
};

inline constexpr double kThrottleMin = -0.1;
inline constexpr double kThrottleMax = 1.0;

/// (steer_raw, throttle_raw) -> (delta, a): delta = (2/3) atan(steer_raw),
/// a = (d - c) sigmoid(4 throttle_raw / (d - c)) + c.
template <class T>
std::pair<T, T> squash_controls(const T& steer_raw, const T& throttle_raw) {
  using std::atan;
  const double span = kThrottleMax - kThrottleMin;
  const T delta = (2.0 / 3.0) * atan(steer_raw);
  const T a = span * sigmoid(T(4.0 * throttle_raw / span)) + kThrottleMin;
  return {delta, a};
}

/// (x, y, theta, v), (a, delta) -> (v cos theta, v sin theta, v tan(delta) / L, a).
template <class T>
VecX<T> simple_car_dynamics(const SimpleCarParams& p, const VecX<T>& x, const T& a,
                            const T& delta) {
  using std::cos;
  using std::sin;
  using std::tan;
  if (std::abs(value_of(delta)) >= 0.5 * std::numbers::pi) {
    throw DomainError("simple car: steering angle must satisfy |delta| < pi/2");
  }
  VecX<T> out(4);
  out(0) = x(3) * cos(x(2));
  out(1) = x(3) * sin(x(2));
  out(2) = x(3) * tan(delta) / p.L;
  out(3) = a;
  return out;
}

/// Simplified Pacejka lateral force D sin(C atan(B alpha)).
template <class T>
T pacejka(double B, double C, double D, const T& alpha) {
  using std::atan;
  using std::sin;
  return D * sin(C * atan(B * alpha));
}

/// (x, y, theta, vx, vy, omega), (a, delta) -> time derivative of the bicycle model.
template <class T>
VecX<T> bicycle_dynamics(const BicycleParams& p, const VecX<T>& z, const T& a, const T& delta) {
  using std::atan2;
  using std::cos;
  using std::sin;
  const T& theta = z(2);
  const T& vx = z(3);
  const T& vy = z(4);
  const T& omega = z(5);
  if (!(value_of(vx) > 0.0)) {
    throw DomainError("bicycle: longitudinal speed must be positive, got vx=" +
                      std::to_string(value_of(vx)));
  }
  const T alpha_f = delta - atan2(T(omega * p.lf + vy), vx);
  const T alpha_r = atan2(T(omega * p.lr - vy), vx);
  const T F_fy = pacejka(p.Bf, p.Cf, p.Df, alpha_f);
  const T F_ry = pacejka(p.Br, p.Cr, p.Dr, alpha_r);
  const T F_rx = (p.Cm1 - p.Cm2 * vx) * a - p.Cr0 - p.Crd * vx * vx;
  const T sd = sin(delta);
  const T cd = cos(delta);
  const T st = sin(theta);
  const T ct = cos(theta);
  VecX<T> out(6);
  out(0) = vx * ct - vy * st;
  out(1) = vx * st + vy * ct;
  out(2) = omega;
  out(3) = (F_rx - F_fy * sd) / p.m + vy * omega;
  out(4) = (F_ry + F_fy * cd) / p.m - vx * omega;
  out(5) = (F_fy * p.lf * cd - F_ry * p.lr) / p.Iz;
  return out;
}

}  // namespace trajopt

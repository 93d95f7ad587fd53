#pragma once

#include <string>

#include "trajopt/autodiff.hpp"
#include "trajopt/errors.hpp"

namespace trajopt {

enum class Discretizer { euler, rk4, rk4_varying };

std::string to_string(Discretizer d);
Discretizer discretizer_from_string(const std::string& name);

namespace detail {
template <class T>
void require_finite(const VecX<T>& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (!std::isfinite(value_of(z(i)))) throw DivergenceError(-1);
  }
}
}  // namespace detail

/// z + dt f(z, u).
template <class T, class F>
VecX<T> euler_step(const F& f, const VecX<T>& z, const VecX<T>& u, double dt) {
  if (!(dt > 0.0)) throw ParameterError("euler_step: dt must be positive");
  VecX<T> out = z + T(dt) * VecX<T>(f(z, u));
  detail::require_finite(out);
  return out;
}

/// Classical RK4 with the control held constant over the step.
template <class T, class F>
VecX<T> rk4_step(const F& f, const VecX<T>& z, const VecX<T>& u, double dt) {
  if (!(dt > 0.0)) throw ParameterError("rk4_step: dt must be positive");
  const T h(dt);
  const T half(0.5 * dt);
  const VecX<T> k1 = f(z, u);
  const VecX<T> k2 = f(VecX<T>(z + half * k1), u);
  const VecX<T> k3 = f(VecX<T>(z + half * k2), u);
  const VecX<T> k4 = f(VecX<T>(z + h * k3), u);
  VecX<T> out = z + T(dt / 6.0) * (k1 + T(2.0) * k2 + T(2.0) * k3 + k4);
  detail::require_finite(out);
  return out;
}

/// RK4 fed with controls sampled at the start, one third and two thirds of the step.
template <class T, class F>
VecX<T> rk4_varying_step(const F& f, const VecX<T>& z, const VecX<T>& v, const VecX<T>& v13,
                         const VecX<T>& v23, double dt) {
  if (!(dt > 0.0)) throw ParameterError("rk4_varying_step: dt must be positive");
  const T h(dt);
  const T half(0.5 * dt);
  const VecX<T> k1 = f(z, v);
  const VecX<T> k2 = f(VecX<T>(z + half * k1), v13);
  const VecX<T> k3 = f(VecX<T>(z + half * k2), v13);
  const VecX<T> k4 = f(VecX<T>(z + h * k3), v23);
  VecX<T> out = z + T(dt / 6.0) * (k1 + T(2.0) * k2 + T(2.0) * k3 + k4);
  detail::require_finite(out);
  return out;
}

/// Dispatches on `d`; rk4_varying is not a single-control scheme and is rejected.
template <class T, class F>
VecX<T> discrete_step(Discretizer d, const F& f, const VecX<T>& z, const VecX<T>& u, double dt) {
  switch (d) {
    case Discretizer::euler: return euler_step(f, z, u, dt);
    case Discretizer::rk4: return rk4_step(f, z, u, dt);
    case Discretizer::rk4_varying: break;
  }
  throw ConfigError("discretizer rk4-varying needs intermediate controls");
}

}  // namespace trajopt

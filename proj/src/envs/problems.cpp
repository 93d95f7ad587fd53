#include "trajopt/envs/problems.hpp"

#include <cmath>

namespace trajopt {

std::string to_string(Discretizer d) {
  switch (d) {
    case Discretizer::euler: return "euler";
    case Discretizer::rk4: return "rk4";
    case Discretizer::rk4_varying: return "rk4-varying";
  }
  return "unknown";
}

Discretizer discretizer_from_string(const std::string& name) {
  if (name == "euler") return Discretizer::euler;
  if (name == "rk4") return Discretizer::rk4;
  if (name == "rk4-varying") return Discretizer::rk4_varying;
  throw ConfigError("unknown discretizer '" + name + "'");
}

std::string to_string(EnvKind env) {
  switch (env) {
    case EnvKind::pendulum: return "pendulum";
    case EnvKind::cartpole: return "cartpole";
    case EnvKind::simple_car: return "simple-car";
    case EnvKind::bicycle_car: return "bicycle-car";
  }
  return "unknown";
}

EnvKind env_kind_from_string(const std::string& name) {
  if (name == "pendulum") return EnvKind::pendulum;
  if (name == "cartpole") return EnvKind::cartpole;
  if (name == "simple-car") return EnvKind::simple_car;
  if (name == "bicycle-car") return EnvKind::bicycle_car;
  throw ConfigError("unknown env '" + name + "'");
}

Discretizer default_discretizer(EnvKind env) {
  return env == EnvKind::bicycle_car ? Discretizer::rk4 : Discretizer::euler;
}

int cartpole_stay_put_step(const CartPoleParams& p, int horizon) {
  const double dt = p.T / horizon;
  return horizon - static_cast<int>(std::floor(p.stay_put_time / dt + 1e-9));
}

std::shared_ptr<const Track> resolve_track(const std::string& name) {
  if (name.find('/') == std::string::npos && name.find('.') == std::string::npos) {
    return std::make_shared<const Track>(Track::builtin(name));
  }
  return std::make_shared<const Track>(Track::load(name));
}

namespace {

TrajectoryProblem skeleton(int horizon, int nx, int nu, StateVec x0) {
  TrajectoryProblem pb;
  pb.horizon = horizon;
  pb.nx = nx;
  pb.nu = nu;
  pb.x0 = std::move(x0);
  pb.dynamics.reserve(horizon);
  pb.costs.reserve(horizon);
  return pb;
}

TrajectoryProblem pendulum_problem(int horizon, Discretizer disc, const PendulumParams& p) {
  const double dt = p.T / horizon;
  TrajectoryProblem pb = skeleton(horizon, 2, 1, StateVec::Zero(2));
  const Dynamics f(2, 1, [p, disc, dt](const auto& x, const auto& u) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    const auto rhs = [&p](const VecX<T>& z, const VecX<T>& v) { return pendulum_dynamics(p, z, v); };
    return discrete_step<T>(disc, rhs, x, u, dt);
  });
  const StageCost h(2, 1, [p](const auto&, const auto& u) { return pendulum_running_cost(p, u); });
  for (int t = 0; t < horizon; ++t) {
    pb.dynamics.push_back(f);
    pb.costs.push_back(h);
  }
  pb.final_cost = FinalCost(2, [p](const auto& x) { return pendulum_final_cost(p, x); });
  return pb;
}

TrajectoryProblem cartpole_problem(int horizon, Discretizer disc, const CartPoleParams& p) {
  const double dt = p.T / horizon;
  const int stay = cartpole_stay_put_step(p, horizon);
  TrajectoryProblem pb = skeleton(horizon, 4, 1, StateVec::Zero(4));
  const Dynamics f(4, 1, [p, disc, dt](const auto& x, const auto& u) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    const auto rhs = [&p](const VecX<T>& z, const VecX<T>& v) { return cartpole_dynamics(p, z, v); };
    return discrete_step<T>(disc, rhs, x, u, dt);
  });
  for (int t = 0; t < horizon; ++t) {
    pb.dynamics.push_back(f);
    pb.costs.emplace_back(4, 1, [p, t, stay](const auto& x, const auto& u) {
      return cartpole_cost(p, t, stay, x, u);
    });
  }
  pb.final_cost = FinalCost(4, [p](const auto& x) { return cartpole_final_cost(p, x); });
  return pb;
}

TrajectoryProblem simple_car_problem(int horizon, Discretizer disc, const SimpleCarParams& p,
                                     std::shared_ptr<const Track> track) {
  const double dt = p.T / horizon;
  const TrackPoint<double> start = track->eval(0.0);
  StateVec x0(4);
  x0 << start.x, start.y, start.theta, p.v_init;
  TrajectoryProblem pb = skeleton(horizon, 4, 2, x0);
  const Dynamics f(4, 2, [p, disc, dt](const auto& x, const auto& u) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    const auto [delta, a] = squash_controls(u(1), u(0));
    const auto rhs = [&p, delta = delta, a = a](const VecX<T>& z, const VecX<T>&) {
      return simple_car_dynamics(p, z, a, delta);
    };
    return discrete_step<T>(disc, rhs, x, u, dt);
  });
  const auto tracking = [track, p, dt](int t) {
    const TrackPoint<double> ref = track->eval(dt * p.v_ref * t);
    return Eigen::Vector2d(ref.x, ref.y);
  };
  for (int t = 0; t < horizon; ++t) {
    pb.dynamics.push_back(f);
    const Eigen::Vector2d ref = tracking(t);
    const bool track_state = t > 0;
    pb.costs.emplace_back(4, 2, [p, ref, track_state](const auto& x, const auto& u) {
      using T = typename std::decay_t<decltype(x)>::Scalar;
      T c = p.lambda_ctrl * u.squaredNorm();
      if (track_state) {
        const T ex = x(0) - ref.x();
        const T ey = x(1) - ref.y();
        c += ex * ex + ey * ey;
      }
      return c;
    });
  }
  const Eigen::Vector2d ref = tracking(horizon);
  pb.final_cost = FinalCost(4, [ref](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    const T ex = x(0) - ref.x();
    const T ey = x(1) - ref.y();
    return T(ex * ex + ey * ey);
  });
  return pb;
}

// State (x, y, theta, vx, vy, omega, s, nu_s), control (throttle_raw, steer_raw, alpha).
template <class T>
VecX<T> bicycle_step(const BicycleParams& p, Discretizer disc, double dt, const VecX<T>& x,
                     const VecX<T>& u) {
  const auto [delta, a] = squash_controls(u(1), u(0));
  const auto rhs = [&p, delta = delta, a = a](const VecX<T>& z, const VecX<T>&) {
    return bicycle_dynamics(p, z, a, delta);
  };
  const VecX<T> car = discrete_step<T>(disc, rhs, VecX<T>(x.head(6)), u, dt);
  VecX<T> out(8);
  out.head(6) = car;
  out(6) = x(6) + dt * x(7);
  out(7) = x(7) + dt * u(2);
  return out;
}

template <class T>
T bicycle_stage_cost(const BicycleParams& p, const Track& track, const VecX<T>& x) {
  using std::log;
  const auto [ec, el] = contouring_errors(track, x(0), x(1), x(6));
  const T dv = x(7) - p.v_ref;
  return p.rho_contouring * ec * ec + p.rho_lagging * el * el + p.rho_speed * dv * dv -
         p.eps_barrier * log(x(7)) + p.rho_border * border_cost(track, x(0), x(1), x(6), p.car_margin);
}

TrajectoryProblem bicycle_problem(int horizon, Discretizer disc, const BicycleParams& p,
                                  std::shared_ptr<const Track> track) {
  const double dt = p.T / horizon;
  const TrackPoint<double> start = track->eval(0.0);
  StateVec x0(8);
  x0 << start.x, start.y, start.theta, p.v_init, 0.0, 0.0, 0.0, p.v_ref;
  TrajectoryProblem pb = skeleton(horizon, 8, 3, x0);
  const Dynamics f(8, 3, [p, disc, dt](const auto& x, const auto& u) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    return bicycle_step<T>(p, disc, dt, x, u);
  });
  const StageCost h(8, 3, [p, track](const auto& x, const auto& u) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    return T(bicycle_stage_cost<T>(p, *track, x) + p.lambda_ctrl * u.squaredNorm());
  });
  for (int t = 0; t < horizon; ++t) {
    pb.dynamics.push_back(f);
    pb.costs.push_back(h);
  }
  pb.final_cost = FinalCost(8, [](const auto& x) {
    using T = typename std::decay_t<decltype(x)>::Scalar;
    return T(0.0 * x(0));
  });
  return pb;
}

}  // namespace

TrajectoryProblem build_problem(EnvKind env, int horizon, const EnvOptions& options) {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  const Discretizer disc = options.discretizer.value_or(default_discretizer(env));
  if (disc == Discretizer::rk4_varying) {
    throw ConfigError("discretizer rk4-varying is not available for env " + to_string(env));
  }
  switch (env) {
    case EnvKind::pendulum: return pendulum_problem(horizon, disc, options.pendulum);
    case EnvKind::cartpole: return cartpole_problem(horizon, disc, options.cartpole);
    case EnvKind::simple_car:
      return simple_car_problem(horizon, disc, options.simple_car, resolve_track(options.track));
    case EnvKind::bicycle_car:
      return bicycle_problem(horizon, disc, options.bicycle, resolve_track(options.track));
  }
  throw ConfigError("unknown env");
}

double bicycle_border_cost(const TrajectoryProblem& problem, const ControlSequence& u,
                           const EnvOptions& options) {
  const auto track = resolve_track(options.track);
  StateVec x = problem.x0;
  double total = border_cost(*track, x(0), x(1), x(6), options.bicycle.car_margin);
  for (int t = 0; t < problem.horizon; ++t) {
    x = problem.dynamics[t](x, u[t]);
    total += border_cost(*track, x(0), x(1), x(6), options.bicycle.car_margin);
  }
  return total;
}

}  // namespace trajopt

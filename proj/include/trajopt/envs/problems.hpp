#pragma once

#include <memory>
#include <optional>
#include <string>

#include "trajopt/core.hpp"
#include "trajopt/envs/car.hpp"
#include "trajopt/envs/cartpole.hpp"
#include "trajopt/envs/integrators.hpp"
#include "trajopt/envs/pendulum.hpp"
#include "trajopt/envs/track.hpp"

namespace trajopt {

enum class EnvKind { pendulum, cartpole, simple_car, bicycle_car };

std::string to_string(EnvKind env);
EnvKind env_kind_from_string(const std::string& name);
Discretizer default_discretizer(EnvKind env);

struct EnvOptions {
  std::optional<Discretizer> discretizer;  ///< defaults per env
  std::string track = "simple";            ///< bundled fixture name or path to a track file
  PendulumParams pendulum;
  CartPoleParams cartpole;
  SimpleCarParams simple_car;
  BicycleParams bicycle;
};

/// Assembles the benchmark instance with dt = T / horizon.
TrajectoryProblem build_problem(EnvKind env, int horizon, const EnvOptions& options = {});

/// Loads `name` as a bundled fixture if it has no path separator or extension, else as a file.
std::shared_ptr<const Track> resolve_track(const std::string& name);

/// Sum of border costs along the car trajectory of a bicycle-car problem.
double bicycle_border_cost(const TrajectoryProblem& problem, const ControlSequence& u,
                           const EnvOptions& options = {});

}  // namespace trajopt

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "trajopt/envs/problems.hpp"
#include "trajopt/oracles.hpp"
#include "trajopt/testing/random_problems.hpp"

namespace trajopt {
namespace {

constexpr double kPi = std::numbers::pi;

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Track straight_track(double width = 1.0) {
  return Track({{0, 0}, {1, 0}, {2, 0}, {3, 0}}, width);
}

TEST(Pendulum, Examples) {
  const PendulumParams p;
  EXPECT_TRUE(pendulum_dynamics<double>(p, vec({0, 0}), vec({0})).isZero(0.0));
  EXPECT_EQ(pendulum_dynamics<double>(p, vec({0, 0}), vec({1})), vec({0, 1}));
  EXPECT_LE(pendulum_dynamics<double>(p, vec({kPi, 0}), vec({0})).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Pendulum, UndampedRk4ConservesEnergy) {
  PendulumParams p;
  p.mu = 0.0;
  auto energy = [&p](const Vector& x) {
    return 0.5 * p.m * p.l * p.l * x(1) * x(1) - p.m * p.g * p.l * std::cos(x(0));
  };
  Vector x = vec({1.0, 0.0});
  const Vector u = vec({0.0});
  const double e0 = energy(x);
  const auto rhs = [&p](const Vector& z, const Vector& v) { return pendulum_dynamics<double>(p, z, v); };
  for (int k = 0; k < 2000; ++k) x = rk4_step<double>(rhs, x, u, 1e-3);
  EXPECT_LE(std::abs(energy(x) - e0) / std::abs(e0), 1e-6);
}

TEST(CartPole, Examples) {
  const CartPoleParams p;
  const Vector d = cartpole_dynamics<double>(p, Vector::Zero(4), vec({1.0}));
  EXPECT_NEAR(d(2), 1.818181818, 1e-8);
  EXPECT_NEAR(d(3), -4.545454545, 1e-8);
  EXPECT_TRUE(cartpole_dynamics<double>(p, Vector::Zero(4), vec({0})).isZero(0.0));
  EXPECT_LE(cartpole_dynamics<double>(p, vec({0, kPi, 0, 0}), vec({0})).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(CartPole, CostExamples) {
  const CartPoleParams p;
  const int stay = 10;
  EXPECT_LE(cartpole_cost<double>(p, 0, stay, vec({0.5, 0.3, 0.1, 0.0}), vec({0})), 1e-4);
  EXPECT_LE(cartpole_cost<double>(p, stay, stay, vec({0, -kPi, 0, 0}), vec({0})), 1e-4);
  EXPECT_NEAR(cartpole_cost<double>(p, 0, stay, vec({3, 0, 0, 0}), vec({0})), 1.0, 1e-4);
  EXPECT_NEAR(cartpole_cost<double>(p, 0, stay, vec({-3, 0, 0, 0}), vec({0})), 1.0, 1e-4);
}

TEST(CartPole, StayPutStep) {
  const CartPoleParams p;
  EXPECT_EQ(cartpole_stay_put_step(p, 25), 19);
  EXPECT_EQ(cartpole_stay_put_step(p, 50), 38);
}

TEST(SimpleCar, Examples) {
  const SimpleCarParams p;
  EXPECT_EQ(simple_car_dynamics<double>(p, vec({0, 0, 0, 1}), 0.0, 0.0), vec({1, 0, 0, 0}));
  EXPECT_NEAR(simple_car_dynamics<double>(p, vec({0, 0, 0, 1}), 0.0, kPi / 4)(2), 1.0, 1e-15);
  EXPECT_TRUE(simple_car_dynamics<double>(p, vec({2, 3, 0.4, 0}), 0.0, 0.3).isZero(0.0));
  EXPECT_THROW(simple_car_dynamics<double>(p, vec({0, 0, 0, 1}), 0.0, kPi / 2), DomainError);
}

TEST(Bicycle, StraightCoasting) {
  const BicycleParams p;
  const Vector d = bicycle_dynamics<double>(p, vec({0, 0, 0, 1, 0, 0}), 0.0, 0.0);
  EXPECT_NEAR(d(0), 1.0, 1e-15);
  EXPECT_NEAR(d(1), 0.0, 1e-15);
  EXPECT_NEAR(d(2), 0.0, 1e-15);
  EXPECT_NEAR(d(3), -0.05215 / 0.041, 1e-12);
  EXPECT_NEAR(d(3), -1.27195, 1e-5);
  EXPECT_NEAR(d(4), 0.0, 1e-15);
  EXPECT_NEAR(d(5), 0.0, 1e-15);
}

TEST(Bicycle, ForceBalanceHoldsSpeed) {
  const BicycleParams p;
  const double a = (p.Cr0 + p.Crd) / (p.Cm1 - p.Cm2);
  EXPECT_NEAR(a, 0.22430, 1e-5);
  EXPECT_NEAR(bicycle_dynamics<double>(p, vec({0, 0, 0, 1, 0, 0}), a, 0.0)(3), 0.0, 1e-14);
}

TEST(Bicycle, RejectsNonPositiveSpeed) {
  EXPECT_THROW(bicycle_dynamics<double>(BicycleParams{}, vec({0, 0, 0, 0, 0, 0}), 0.0, 0.0),
               DomainError);
}

TEST(Pacejka, ZeroAtZeroSlipAndOdd) {
  const BicycleParams p;
  EXPECT_EQ(pacejka(p.Bf, p.Cf, p.Df, 0.0), 0.0);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> alpha(-1.5, 1.5);
  for (int k = 0; k < 100; ++k) {
    const double a = alpha(rng);
    EXPECT_EQ(pacejka(p.Bf, p.Cf, p.Df, -a), -pacejka(p.Bf, p.Cf, p.Df, a));
    EXPECT_EQ(pacejka(p.Br, p.Cr, p.Dr, -a), -pacejka(p.Br, p.Cr, p.Dr, a));
  }
}

TEST(Integrators, Examples) {
  const auto zero = [](const Vector& z, const Vector&) { return Vector::Zero(z.size()).eval(); };
  const auto grow = [](const Vector& z, const Vector&) { return z; };
  const Vector z = vec({1.0});
  const Vector u = vec({0.0});
  EXPECT_EQ(euler_step<double>(zero, z, u, 0.1), z);
  EXPECT_EQ(rk4_step<double>(zero, z, u, 0.1), z);
  EXPECT_EQ(rk4_varying_step<double>(zero, z, u, u, u, 0.1), z);
  EXPECT_DOUBLE_EQ(euler_step<double>(grow, z, u, 0.1)(0), 1.1);
  const double rk = rk4_step<double>(grow, z, u, 0.1)(0);
  EXPECT_NEAR(rk, 1.10517083333, 1e-11);
  EXPECT_LT(std::abs(rk - std::exp(0.1)), 1e-7);
}

TEST(Integrators, VaryingControlFeedsIntermediateStages) {
  // z' = v: exact integral of the piecewise samples with RK4 weights 1/6, 2/6, 2/6, 1/6.
  const auto rhs = [](const Vector&, const Vector& v) { return v; };
  const double got =
      rk4_varying_step<double>(rhs, vec({0.0}), vec({1.0}), vec({2.0}), vec({3.0}), 0.6)(0);
  EXPECT_NEAR(got, 0.6 * (1.0 + 2 * 2.0 + 2 * 2.0 + 3.0) / 6.0, 1e-15);
}

TEST(Integrators, NonFiniteOutputIsDivergence) {
  const auto blow = [](const Vector& z, const Vector&) { return (z / 0.0).eval(); };
  EXPECT_THROW(euler_step<double>(blow, vec({1.0}), vec({0.0}), 0.1), DivergenceError);
}

TEST(Track, TwoWaypointsInterpolateLinearly) {
  const Track t({{0, 0}, {2, 4}}, 1.0);
  for (double s : {0.0, 0.25, 0.5, 1.0}) {
    const TrackPoint<double> p = t.eval(s);
    EXPECT_NEAR(p.x, 2 * s, 1e-15);
    EXPECT_NEAR(p.y, 4 * s, 1e-15);
    EXPECT_NEAR(p.theta, std::atan2(4.0, 2.0), 1e-15);
  }
}

TEST(Track, AxisAlignedGeometry) {
  const TrackPoint<double> p = straight_track().eval(1.5);
  EXPECT_NEAR(p.theta, 0.0, 1e-15);
  EXPECT_NEAR(p.nx, 0.0, 1e-15);
  EXPECT_NEAR(p.ny, -1.0, 1e-15);
  EXPECT_NEAR(p.inner_y, 0.5, 1e-15);
  EXPECT_NEAR(p.outer_y, -0.5, 1e-15);
}

// Property: knots are reproduced and borders sit at width / 2 from the centerline.
TEST(Track, KnotsAndBordersOnBundledTracks) {
  for (const char* name : {"simple", "complex"}) {
    const Track t = Track::builtin(name);
    for (int i = 0; i < t.num_knots(); ++i) {
      const TrackPoint<double> p = t.eval(static_cast<double>(i));
      EXPECT_NEAR(p.x, t.waypoints()[i].x(), 1e-12) << name;
      EXPECT_NEAR(p.y, t.waypoints()[i].y(), 1e-12) << name;
      EXPECT_NEAR(std::hypot(p.inner_x - p.x, p.inner_y - p.y), t.width() / 2, 1e-10);
      EXPECT_NEAR(std::hypot(p.outer_x - p.x, p.outer_y - p.y), t.width() / 2, 1e-10);
    }
  }
}

TEST(Track, ContouringErrors) {
  const Track t = straight_track();
  const TrackPoint<double> p = t.eval(1.0);
  auto [c0, l0] = contouring_errors(t, p.x, p.y, 1.0);
  EXPECT_NEAR(c0, 0.0, 1e-15);
  EXPECT_NEAR(l0, 0.0, 1e-15);
  auto [c1, l1] = contouring_errors(t, p.x, p.y + 0.1, 1.0);
  EXPECT_NEAR(c1, -0.1, 1e-15);
  EXPECT_NEAR(l1, 0.0, 1e-15);
  auto [c2, l2] = contouring_errors(t, p.x + 0.2, p.y, 1.0);
  EXPECT_NEAR(c2, 0.0, 1e-15);
  EXPECT_NEAR(l2, -0.2, 1e-15);
}

TEST(Track, BorderCost) {
  const Track t = straight_track(1.0);
  EXPECT_LE(border_cost(t, 1.0, 0.0, 1.0, 0.1), 1e-6);
  // Right border at y = -0.5; 0.1 past it.
  EXPECT_NEAR(border_cost(t, 1.0, -0.6, 1.0, 0.0), 0.01, 1e-4);
  EXPECT_NEAR(border_cost(t, 1.0, 0.6, 1.0, 0.0), 0.01, 1e-4);
  const double on_border = border_cost(t, 1.0, -0.5, 1.0, 0.0);
  EXPECT_GT(on_border, 0.0);
  EXPECT_LE(on_border, std::pow(kSmoothMaxSharpness * std::log(2.0), 2) + 1e-12);
}

TEST(Track, ParseAndValidate) {
  std::istringstream ok("# fixture\nwidth=0.8\n0,0\n1,0\n2,1\n");
  const Track t = Track::parse(ok);
  EXPECT_EQ(t.num_knots(), 3);
  EXPECT_DOUBLE_EQ(t.width(), 0.8);
  std::istringstream nan("width=1\n0,0\nnan,1\n");
  EXPECT_THROW(Track::parse(nan), Error);
  std::istringstream nowidth("0,0\n1,1\n");
  EXPECT_THROW(Track::parse(nowidth), Error);
  EXPECT_THROW(Track({{0, 0}}, 1.0), ParameterError);
  EXPECT_THROW(Track({{0, 0}, {0, 0}, {1, 0}}, 1.0), ParameterError);
  EXPECT_THROW(Track({{0, 0}, {1, 0}}, 0.0), ParameterError);
  EXPECT_THROW(Track::builtin("oval"), Error);
}

TEST(Squash, Examples) {
  auto [d0, a0] = squash_controls(0.0, 0.0);
  EXPECT_EQ(d0, 0.0);
  EXPECT_NEAR(a0, 0.45, 1e-15);
  EXPECT_NEAR(squash_controls(1.0, 0.0).first, kPi / 6, 1e-15);
  EXPECT_NEAR(squash_controls(1e12, 0.0).first, kPi / 3, 1e-9);
}

TEST(Squash, OutputsStayInRange) {
  std::mt19937 rng(2);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    auto [d, a] = squash_controls(n(rng), n(rng));
    EXPECT_GT(d, -kPi / 3);
    EXPECT_LT(d, kPi / 3);
    EXPECT_GE(a, kThrottleMin);
    EXPECT_LE(a, kThrottleMax);
  }
}

TEST(BuildProblem, Dimensions) {
  const TrajectoryProblem pend = build_problem(EnvKind::pendulum, 50);
  EXPECT_EQ(pend.nx, 2);
  EXPECT_EQ(pend.nu, 1);
  EXPECT_NEAR(pend.dynamics[0](vec({0, 1}), vec({0}))(0), 0.04, 1e-15);

  const TrajectoryProblem bike = build_problem(EnvKind::bicycle_car, 50);
  EXPECT_EQ(bike.nx, 8);
  EXPECT_EQ(bike.nu, 3);
  EXPECT_EQ(bike.x0(3), BicycleParams{}.v_init);
  EXPECT_EQ(bike.x0(6), 0.0);
  EXPECT_EQ(bike.x0(7), BicycleParams{}.v_ref);

  const TrajectoryProblem cart = build_problem(EnvKind::cartpole, 25);
  EXPECT_EQ(cart.nx, 4);
  EXPECT_EQ(cart.nu, 1);
  EXPECT_NO_THROW(cart.validate());
}

TEST(BuildProblem, SimpleCarTracksTheTimedReference) {
  const int tau = 50;
  const SimpleCarParams p;
  const TrajectoryProblem pb = build_problem(EnvKind::simple_car, tau);
  const Track track = Track::builtin("simple");
  const int t = 20;
  const TrackPoint<double> ref = track.eval(p.T / tau * p.v_ref * t);
  const Vector u = Vector::Zero(2);
  EXPECT_NEAR(pb.costs[t](vec({ref.x, ref.y, 0.3, 1.0}), u), 0.0, 1e-12);
  EXPECT_NEAR(pb.costs[t](vec({ref.x + 0.5, ref.y, 0.3, 1.0}), u), 0.25, 1e-12);
}

TEST(BuildProblem, RejectsBadConfigurations) {
  EXPECT_THROW(build_problem(EnvKind::pendulum, 0), ConfigError);
  EnvOptions o;
  o.discretizer = Discretizer::rk4_varying;
  EXPECT_THROW(build_problem(EnvKind::pendulum, 10, o), ConfigError);
  EXPECT_THROW(env_kind_from_string("foo"), ConfigError);
  EXPECT_THROW(discretizer_from_string("midpoint"), ConfigError);
  for (EnvKind e : {EnvKind::pendulum, EnvKind::cartpole, EnvKind::simple_car, EnvKind::bicycle_car}) {
    EXPECT_EQ(env_kind_from_string(to_string(e)), e);
  }
}

TEST(BuildProblem, NegativeProgressSpeedDiverges) {
  const TrajectoryProblem pb = build_problem(EnvKind::bicycle_car, 10);
  ControlSequence u = pb.zero_controls();
  for (auto& ut : u) ut(2) = -100.0;
  EXPECT_THROW(forward(pb, u, 0, 0), DivergenceError);
}

// Property: derivatives of every model match central differences at random interior points.
TEST(Models, DerivativesMatchFiniteDifferences) {
  std::mt19937 rng(3);
  for (EnvKind env :
       {EnvKind::pendulum, EnvKind::cartpole, EnvKind::simple_car, EnvKind::bicycle_car}) {
    const TrajectoryProblem pb = build_problem(env, 20);
    for (int k = 0; k < 100; ++k) {
      const auto [x, u] = testing::sample_point(env, rng);
      Vector z(pb.nx + pb.nu);
      z << x, u;
      const int t = k % pb.horizon;
      const VectorFunction& f = pb.dynamics[t].joint();
      const ScalarFunction& h = pb.costs[t].joint();
      const Matrix J = jacobian(f, z);
      const Matrix Jfd = testing::fd_jacobian(f, z);
      EXPECT_LE((J - Jfd).cwiseAbs().maxCoeff() / std::max(1.0, Jfd.cwiseAbs().maxCoeff()), 1e-6)
          << to_string(env);
      const Matrix H = hessian(h, z);
      const Matrix Hfd = testing::fd_hessian(h, z);
      EXPECT_LE((H - Hfd).cwiseAbs().maxCoeff() / std::max(1.0, Hfd.cwiseAbs().maxCoeff()), 1e-4)
          << to_string(env);
    }
  }
}

}  // namespace
}  // namespace trajopt

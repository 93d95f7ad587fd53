#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "cli.hpp"
#include "trajopt/dense.hpp"
#include "trajopt/testing/random_problems.hpp"

namespace trajopt::cli {

namespace {

using testing::random_controls;
using testing::random_nonlinear_problem;

double rel_error(const Matrix& a, const Matrix& ref) {
  const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
  return (a - ref).cwiseAbs().maxCoeff() / scale;
}

double min_eigenvalue(const Matrix& M) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrize(M)).eigenvalues()(0);
}

struct Instance {
  TrajectoryProblem problem;
  ControlSequence u;
};

Instance random_instance(std::mt19937& rng) {
  const int tau = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? 3 : 5;
  const int nx = std::uniform_int_distribution<int>(1, 3)(rng);
  const int nu = std::uniform_int_distribution<int>(1, 3)(rng);
  Instance inst{random_nonlinear_problem(rng, tau, nx, nu), {}};
  inst.u = random_controls(rng, tau, nu, 0.5);
  return inst;
}

CheckReport dense_oracles(const VerifyOptions& o) {
  CheckReport r{"dense-oracles", 1e-8, 0.0, false};
  std::mt19937 rng(11);
  const double p = 1.0 + o.perturb;
  for (int i = 0; i < 10 * o.scale; ++i) {
    const Instance inst = random_instance(rng);
    const TrajectoryProblem& pb = inst.problem;
    const Vector g = dense::gradient(pb, inst.u);
    const Matrix eye = Matrix::Identity(g.size(), g.size());

    const double nu_gd = 2.0;
    const ExpansionBundle b1 = forward(pb, inst.u, 1, 1);
    const Vector gd = -nu_gd * flatten(backward_gd(b1, nu_gd).direction);
    r.observed = std::max(r.observed, rel_error(gd, p * g));

    const Matrix G = dense::gauss_newton(pb, inst.u);
    const double nu_gn = 1.0 + std::max(0.0, -min_eigenvalue(G));
    const Vector v_gn = flatten(oracle(pb, inst.u, OracleKind::gn, nu_gn).direction);
    const Vector ref_gn = (G + nu_gn * eye).ldlt().solve(-g);
    r.observed = std::max(r.observed, rel_error(v_gn, p * ref_gn));

    const Matrix H = dense::hessian(pb, inst.u);
    const double nu_ne = 1.0 + std::max(0.0, -min_eigenvalue(H));
    const Vector v_ne = flatten(oracle(pb, inst.u, OracleKind::ne, nu_ne).direction);
    const Vector ref_ne = (H + nu_ne * eye).ldlt().solve(-g);
    r.observed = std::max(r.observed, rel_error(v_ne, p * ref_ne));
  }
  r.pass = r.observed <= r.tolerance;
  return r;
}

CheckReport stationarity(const VerifyOptions& o) {
  CheckReport r{"stationarity", 1e-8, 0.0, false};
  std::mt19937 rng(12);
  for (int i = 0; i < 10 * o.scale; ++i) {
    const Instance inst = random_instance(rng);
    const double ref = dense::gradient(inst.problem, inst.u).lpNorm<Eigen::Infinity>();
    const double got = stationarity_residual(inst.problem, inst.u);
    r.observed = std::max(r.observed, std::abs(got - (1.0 + o.perturb) * ref) / std::max(1.0, ref));
  }
  r.pass = r.observed <= r.tolerance;
  return r;
}

ScalarFunction contract(const VectorFunction& f, const Vector& lambda) {
  return ScalarFunction(f.input_dim(), [f, lambda](const auto& z) {
    using T = typename std::decay_t<decltype(z)>::Scalar;
    const VecX<T> v = f(z);
    T s(0.0);
    for (Eigen::Index i = 0; i < v.size(); ++i) s += lambda(i) * v(i);
    return s;
  });
}

// Jacobians (and gradients) at 1e-6, Hessians at 1e-4, both relative.
CheckReport finite_differences(const VerifyOptions& o, const char* name, bool second_order) {
  CheckReport r{name, second_order ? 1e-4 : 1e-6, 0.0, false};
  std::mt19937 rng(second_order ? 14 : 13);
  const double p = 1.0 + o.perturb;
  for (EnvKind env :
       {EnvKind::pendulum, EnvKind::cartpole, EnvKind::simple_car, EnvKind::bicycle_car}) {
    const TrajectoryProblem pb = build_problem(env, 20);
    const int t = pb.horizon / 2;
    for (int k = 0; k < 5 * o.scale; ++k) {
      const auto [x, u] = testing::sample_point(env, rng);
      Vector z(pb.nx + pb.nu);
      z << x, u;
      const VectorFunction& f = pb.dynamics[t].joint();
      const ScalarFunction& h = pb.costs[t].joint();
      const ScalarFunction& hf = pb.final_cost.function();
      if (!second_order) {
        r.observed = std::max(r.observed, rel_error(jacobian(f, z), p * testing::fd_jacobian(f, z)));
        r.observed = std::max(r.observed, rel_error(gradient(h, z), p * testing::fd_gradient(h, z)));
        r.observed =
            std::max(r.observed, rel_error(gradient(hf, x), p * testing::fd_gradient(hf, x)));
        continue;
      }
      const Vector lambda = testing::random_vector(rng, pb.nx);
      const Matrix lh = lambda_hessian(f, z, lambda);
      r.observed = std::max(r.observed, rel_error(lh, p * testing::fd_hessian(contract(f, lambda), z)));
      r.observed = std::max(r.observed, rel_error(hessian(h, z), p * testing::fd_hessian(h, z)));
      r.observed = std::max(r.observed, rel_error(hessian(hf, x), p * testing::fd_hessian(hf, x)));
    }
  }
  r.pass = r.observed <= r.tolerance;
  return r;
}

CheckReport policy_scaling(const VerifyOptions& o) {
  CheckReport r{"policy-scaling", 1e-12, 0.0, false};
  std::mt19937 rng(15);
  for (int i = 0; i < 10 * o.scale; ++i) {
    const Instance inst = random_instance(rng);
    const ExpansionBundle b = forward(inst.problem, inst.u, 2, 2);
    const StateVec y0 = StateVec::Zero(inst.problem.nx);
    for (OracleKind kind : {OracleKind::gn, OracleKind::ne, OracleKind::ddp_q}) {
      const OracleDirection d = backward(b, kind, 10.0);
      if (!d.feasible) continue;
      const StepMap steps = linearized_steps(b);
      const Vector unit = flatten(rollout(y0, d.policies, steps, 1.0));
      for (double gamma : {0.5, 0.25, 0.1}) {
        const Vector scaled = flatten(rollout(y0, d.policies, steps, gamma));
        r.observed = std::max(r.observed, rel_error(scaled, (1.0 + o.perturb) * gamma * unit));
      }
    }
  }
  r.pass = r.observed <= r.tolerance;
  return r;
}

CheckReport smoothness(const VerifyOptions& o) {
  CheckReport r{"smoothness", 1e-12, 0.0, false};
  std::mt19937 rng(16);
  for (int i = 0; i < 10 * o.scale; ++i) {
    const int tau = std::uniform_int_distribution<int>(2, 6)(rng);
    const int nx = std::uniform_int_distribution<int>(1, 3)(rng);
    const int nu = std::uniform_int_distribution<int>(1, 3)(rng);
    const auto inst = testing::random_lipschitz_problem(rng, tau, nx, nu);
    const ControlSequence u = random_controls(rng, tau, nu);
    const double norm = Eigen::JacobiSVD<Matrix>(dense::trajectory_jacobian(inst.problem, u))
                            .singularValues()(0);
    const double bound =
        smoothness_bounds(inst.lx, inst.lu, 0.0, 0.0, inst.Luu, tau).l_bound / (1.0 + o.perturb);
    r.observed = std::max(r.observed, norm - bound);
  }
  r.pass = r.observed <= r.tolerance;
  return r;
}

// Acceptance of every step against its bound, and c_0(0) = 1/2 grad' v for GN and NE.
// Slopes below 1e-14 (1 + |J|) are compared absolutely.
CheckReport armijo(const VerifyOptions& o) {
  CheckReport r{"armijo", 1e-8, 0.0, false};
  std::mt19937 rng(17);
  std::vector<TrajectoryProblem> problems;
  for (int i = 0; i < 2 * o.scale; ++i) problems.push_back(random_instance(rng).problem);
  problems.push_back(build_problem(EnvKind::pendulum, 30));
  for (const TrajectoryProblem& pb : problems) {
    for (OracleKind kind : {OracleKind::gd, OracleKind::gn, OracleKind::ne, OracleKind::ddp_lq,
                            OracleKind::ddp_q}) {
      for (LineSearchRule rule : {LineSearchRule::directional, LineSearchRule::regularized}) {
        SolveOptions opts;
        opts.line_search.rule = rule;
        opts.stop.max_iters = 15;
        opts.audit = true;
        const SolveResult res = solve(pb, pb.zero_controls(), kind, opts);
        for (const TraceEntry& e : res.trace.entries) {
          const double bound = e.bound * (1.0 - o.perturb);
          if (e.actual_decrease > bound) r.observed = std::max(r.observed, 1.0);
          if (kind != OracleKind::gn && kind != OracleKind::ne) continue;
          const double half = (1.0 + o.perturb) * e.half_slope;
          const double floor = 1e-14 * (1.0 + std::abs(e.cost - e.actual_decrease));
          r.observed = std::max(r.observed, std::abs(e.model_decrease - half) /
                                                std::max(std::abs(half), floor));
        }
      }
    }
  }
  r.pass = r.observed <= r.tolerance;
  return r;
}

CheckReport counterexample(const VerifyOptions& o) {
  CheckReport r{"counterexample", 1e-9, 0.0, false};
  const TrajectoryProblem pb = testing::discrete_counterexample(10, 500.0);
  // u = 0 is already stationary.
  const ControlSequence u0(pb.horizon, CtrlVec::Ones(1));
  const double lmin = min_eigenvalue(dense::hessian(pb, u0));
  SolveOptions opts;
  opts.stop.max_iters = 3;
  const SolveResult res = solve(pb, u0, OracleKind::ne, opts);
  r.observed = stationarity_residual(pb, res.u) * (1.0 + o.perturb) + o.perturb;
  r.pass = lmin > 0.0 && r.observed <= r.tolerance;
  return r;
}

struct NamedCheck {
  std::string name;
  std::function<CheckReport(const VerifyOptions&)> run;
};

const std::vector<NamedCheck>& registry() {
  static const std::vector<NamedCheck> checks = {
      {"dense-oracles", dense_oracles},
      {"stationarity", stationarity},
      {"fd-jacobian", [](const VerifyOptions& o) { return finite_differences(o, "fd-jacobian", false); }},
      {"fd-hessian", [](const VerifyOptions& o) { return finite_differences(o, "fd-hessian", true); }},
      {"policy-scaling", policy_scaling},
      {"smoothness", smoothness},
      {"armijo", armijo},
      {"counterexample", counterexample},
  };
  return checks;
}

// Older names accepted by --only.
std::string canonical(const std::string& name) {
  static const std::map<std::string, std::string> aliases = {
      {"lemma2", "dense-oracles"}, {"lemma3", "smoothness"}, {"lemma5", "policy-scaling"}};
  const auto it = aliases.find(name);
  return it == aliases.end() ? name : it->second;
}

}  // namespace

std::vector<std::string> verify_check_names() {
  std::vector<std::string> names;
  for (const auto& c : registry()) names.push_back(c.name);
  return names;
}

std::vector<CheckReport> run_verify(const VerifyOptions& options) {
  if (options.scale < 1) throw ConfigError("scale: must be >= 1");
  std::vector<std::string> only;
  for (const auto& name : options.only) only.push_back(canonical(name));
  for (const auto& name : only) {
    const auto& reg = registry();
    if (std::none_of(reg.begin(), reg.end(), [&](const auto& c) { return c.name == name; })) {
      throw ConfigError("only: unknown check '" + name + "'");
    }
  }
  std::vector<CheckReport> out;
  for (const auto& c : registry()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) {
      continue;
    }
    out.push_back(c.run(options));
  }
  return out;
}

}  // namespace trajopt::cli

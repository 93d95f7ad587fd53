// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lq_fixture.hpp"
#include "trajopt/dense.hpp"
#include "trajopt/envs/problems.hpp"
#include "trajopt/linesearch.hpp"
#include "trajopt/lqsolve.hpp"
#include "trajopt/oracles.hpp"
#include "trajopt/testing/random_problems.hpp"

namespace {

using namespace trajopt;
using Clock = std::chrono::steady_clock;

// Tolerances.
constexpr double kOracleTol = 1e-8;
constexpr double kOracleSeconds = 30.0;
constexpr double kKktTol = 1e-8;
constexpr double kOneStepResidual = 1e-9;
constexpr double kTimeRatio = 2.5;
constexpr double kMemoryRatio = 3.0;
constexpr double kScalingTol = 1e-12;
constexpr double kSlopeTol = 1e-8;
constexpr double kCounterexampleResidual = 1e-9;
constexpr double kRelSubopt = 1e-6;
constexpr double kBorderTol = 1e-3;
constexpr double kRunSeconds = 300.0;
constexpr double kJacobianTol = 1e-6;
constexpr double kHessianTol = 1e-4;
constexpr double kContractionTol = 1e-12;
constexpr double kStationarityTol = 1e-8;
constexpr double kResidualTol = 1e-6;
constexpr double kBoundSlack = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_error(const Matrix& a, const Matrix& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Matrix& M) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (M + M.transpose())).eigenvalues()(0);
}

struct Instance {
  TrajectoryProblem problem;
  ControlSequence u;
};

Instance random_instance(std::mt19937& rng) {
  const int tau = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? 3 : 5;
  const int nx = std::uniform_int_distribution<int>(1, 3)(rng);
  const int nu = std::uniform_int_distribution<int>(1, 3)(rng);
  Instance inst{testing::random_nonlinear_problem(rng, tau, nx, nu), {}};
  inst.u = testing::random_controls(rng, tau, nu, 0.5);
  return inst;
}

// ---------------------------------------------------------------------------------------------
// Benchmark runs shared by criteria 5, 7 and 9.

struct Run {
  std::string label;
  EnvKind env{};
  int horizon = 0;
  OracleKind kind{};
  LineSearchRule rule{};
  TrajectoryProblem problem;
  SolveResult result;
  double seconds = 0.0;
};

Run benchmark_run(EnvKind env, int horizon, OracleKind kind, LineSearchRule rule, int iters) {
  Run r;
  r.env = env;
  r.horizon = horizon;
  r.kind = kind;
  r.rule = rule;
  r.label = to_string(env) + "/" + std::to_string(horizon) + "/" + to_string(kind) + "/" +
            to_string(rule);
  r.problem = build_problem(env, horizon);
  SolveOptions o;
  o.line_search.rule = rule;
  o.stop.max_iters = iters;
  o.audit = true;
  const auto t0 = Clock::now();
  r.result = solve(r.problem, r.problem.zero_controls(), kind, o);
  r.seconds = seconds_since(t0);
  return r;
}

const std::vector<Run>& benchmark_runs() {
  static const std::vector<Run> runs = [] {
    std::vector<Run> out;
    const auto rules = {LineSearchRule::directional, LineSearchRule::regularized};
    for (OracleKind k : {OracleKind::gd, OracleKind::gn, OracleKind::ddp_lq}) {
      for (LineSearchRule r : rules) out.push_back(benchmark_run(EnvKind::pendulum, 50, k, r, 100));
    }
    for (int tau : {25, 50}) {
      for (OracleKind k : {OracleKind::gn, OracleKind::ddp_lq, OracleKind::ddp_q}) {
        for (LineSearchRule r : rules) out.push_back(benchmark_run(EnvKind::cartpole, tau, k, r, 200));
      }
    }
    out.push_back(benchmark_run(EnvKind::bicycle_car, 50, OracleKind::ddp_lq,
                                LineSearchRule::regularized, 200));
    return out;
  }();
  return runs;
}

std::vector<const Run*> select(EnvKind env, int horizon) {
  std::vector<const Run*> out;
  for (const Run& r : benchmark_runs()) {
    if (r.env == env && r.horizon == horizon) out.push_back(&r);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937 rng(101);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Instance inst = random_instance(rng);
    const TrajectoryProblem& pb = inst.problem;
    const Vector g = dense::gradient(pb, inst.u);
    const Matrix eye = Matrix::Identity(g.size(), g.size());

    const double nu_gd = 0.5 + i % 3;
    const Vector gd = flatten(backward_gd(forward(pb, inst.u, 1, 1), nu_gd).direction);
    worst = std::max(worst, rel_error(-nu_gd * gd, g));

    const Matrix G = dense::gauss_newton(pb, inst.u);
    const double nu_gn = 0.5 + std::max(0.0, -min_eigenvalue(G));
    const Vector gn = flatten(oracle(pb, inst.u, OracleKind::gn, nu_gn).direction);
    worst = std::max(worst, rel_error(gn, (G + nu_gn * eye).ldlt().solve(-g)));

    const Matrix H = dense::hessian(pb, inst.u);
    const double nu_ne = 0.5 + std::max(0.0, -min_eigenvalue(H));
    const Vector ne = flatten(oracle(pb, inst.u, OracleKind::ne, nu_ne).direction);
    worst = std::max(worst, rel_error(ne, (H + nu_ne * eye).ldlt().solve(-g)));
  }
  const double secs = seconds_since(t0);
  return {worst <= kOracleTol && secs < kOracleSeconds,
          fmt("max_rel=%.3g tol=%.0e time=%.2fs limit=%.0fs", worst, kOracleTol, secs,
              kOracleSeconds)};
}

Outcome lq_exactness() {
  std::mt19937 rng(102);
  double kkt = 0.0;
  double residual = 0.0;
  int bad_iters = 0;
  for (int i = 0; i < 20; ++i) {
    const int nx = 1 + i % 3;
    const int nu = 1 + (i / 3) % 3;
    const test::LqData d = test::LqData::random(rng, 4 + i % 5, nx, nu);
    const TrajectoryProblem pb = d.problem();
    const Vector ref = flatten(d.kkt_solve());
    kkt = std::max(kkt, rel_error(flatten(dynprog(pb)), ref));
    for (OracleKind k : {OracleKind::gn, OracleKind::ne, OracleKind::ddp_lq, OracleKind::ddp_q}) {
      SolveOptions o;
      o.stop.max_iters = 1;
      const SolveResult r = solve(pb, pb.zero_controls(), k, o);
      if (r.trace.entries.size() != 1 || r.trace.entries[0].regularization != 0.0) ++bad_iters;
      residual = std::max(residual, stationarity_residual(pb, r.u));
    }
  }
  return {kkt <= kKktTol && residual <= kOneStepResidual && bad_iters == 0,
          fmt("kkt_rel=%.3g tol=%.0e one_step_residual=%.3g tol=%.0e runs_not_one_step_nu0=%d", kkt,
              kKktTol, residual, kOneStepResidual, bad_iters)};
}

Outcome linear_complexity() {
  std::mt19937 rng(103);
  std::map<int, TrajectoryProblem> problems;
  std::map<int, ControlSequence> controls;
  for (int tau : {1000, 2000}) {
    problems.emplace(tau, build_problem(EnvKind::pendulum, tau));
    controls.emplace(tau, testing::random_controls(rng, tau, 1, 0.1));
  }
  // Median over 20 reps after 2 warmups; the two horizons alternate so drift hits both alike.
  auto median_ratio = [&](OracleKind kind, double nu) {
    const ExpansionOrders ord = orders_for(kind);
    std::map<int, ExpansionBundle> bundles;
    std::map<int, std::vector<double>> ms;
    for (int tau : {1000, 2000}) {
      bundles.emplace(tau, forward(problems.at(tau), controls.at(tau), ord.dynamics, ord.costs));
    }
    for (int rep = 0; rep < 22; ++rep) {
      for (int tau : {1000, 2000}) {
        const auto t0 = Clock::now();
        const OracleDirection d = oracle(problems.at(tau), bundles.at(tau), kind, nu);
        const double elapsed = seconds_since(t0);
        if (!d.feasible) return -1.0;
        if (rep >= 2) ms[tau].push_back(elapsed);
      }
    }
    auto median = [](std::vector<double> v) {
      std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
      return v[v.size() / 2];
    };
    return median(ms.at(2000)) / median(ms.at(1000));
  };
  bool pass = true;
  std::string detail;
  for (OracleKind kind :
       {OracleKind::gd, OracleKind::gn, OracleKind::ne, OracleKind::ddp_lq, OracleKind::ddp_q}) {
    const double ratio = median_ratio(kind, 1.0);
    if (!(ratio > 0.0 && ratio <= kTimeRatio)) pass = false;
    detail += fmt("%s=%.2f ", to_string(kind).c_str(), ratio);
  }
  const TrajectoryProblem& pb = problems.at(2000);
  auto storage = [&](OracleKind kind) {
    const ExpansionOrders ord = orders_for(kind);
    return static_cast<double>(forward(pb, controls.at(2000), ord.dynamics, ord.costs).storage_bytes());
  };
  const double gn = storage(OracleKind::gn);
  const double ne = storage(OracleKind::ne) / gn;
  const double ddp = storage(OracleKind::ddp_q) / gn;
  if (!(ne <= kMemoryRatio) || !(ddp <= kMemoryRatio)) pass = false;
  return {pass, fmt("time_ratio[%s] limit=%.1f storage_ratio[ne=%.2f ddp-q=%.2f] limit=%.0f",
                    detail.substr(0, detail.size() - 1).c_str(), kTimeRatio, ne, ddp, kMemoryRatio)};
}

Outcome policy_scaling() {
  std::mt19937 rng(104);
  double worst = 0.0;
  int checked = 0;
  for (int i = 0; i < 20; ++i) {
    const Instance inst = random_instance(rng);
    const ExpansionBundle b = forward(inst.problem, inst.u, 2, 2);
    const StepMap steps = linearized_steps(b);
    const StateVec y0 = StateVec::Zero(inst.problem.nx);
    for (OracleKind kind : {OracleKind::gn, OracleKind::ne, OracleKind::ddp_q}) {
      const OracleDirection d = backward(b, kind, 10.0);
      if (!d.feasible) continue;
      ++checked;
      const Vector unit = flatten(rollout(y0, d.policies, steps, 1.0));
      for (double gamma : {0.5, 0.25, 0.1}) {
        worst = std::max(worst, rel_error(flatten(rollout(y0, d.policies, steps, gamma)), gamma * unit));
      }
    }
  }
  return {worst <= kScalingTol && checked >= 20,
          fmt("max_rel=%.3g tol=%.0e policies_checked=%d", worst, kScalingTol, checked)};
}

Outcome line_search_contracts() {
  int steps = 0;
  int violations = 0;
  double slope = 0.0;
  for (const Run& r : benchmark_runs()) {
    const bool check_slope = r.kind == OracleKind::gn || r.kind == OracleKind::ne;
    for (const TraceEntry& e : r.result.trace.entries) {
      ++steps;
      if (!(e.actual_decrease <= e.bound)) ++violations;
      if (!check_slope) continue;
      const double floor = 1e-14 * (1.0 + std::abs(e.cost - e.actual_decrease));
      slope = std::max(slope, std::abs(e.model_decrease - e.half_slope) /
                                  std::max(std::abs(e.half_slope), floor));
    }
  }
  return {violations == 0 && slope <= kSlopeTol && steps > 0,
          fmt("accepted_steps=%d bound_violations=%d c0_vs_half_slope_rel=%.3g tol=%.0e", steps,
              violations, slope, kSlopeTol)};
}

Outcome counterexample() {
  const TrajectoryProblem pb = testing::discrete_counterexample(10, 500.0);
  // u = 0 is already stationary.
  const ControlSequence u0(pb.horizon, CtrlVec::Ones(1));
  const double lmin = min_eigenvalue(dense::hessian(pb, u0));
  SolveOptions o;
  o.stop.max_iters = 3;
  const SolveResult r = solve(pb, u0, OracleKind::ne, o);
  const double res = stationarity_residual(pb, r.u);
  const double res0 = stationarity_residual(pb, u0);
  return {lmin > 0.0 && res0 > kCounterexampleResidual && res <= kCounterexampleResidual &&
              r.trace.entries.size() <= 3,
          fmt("lambda_min=%.4g initial_residual=%.3g residual=%.3g tol=%.0e iterations=%zu", lmin, res0, res,
              kCounterexampleResidual, r.trace.entries.size())};
}

Outcome benchmark_reproduction() {
  bool pass = true;
  std::string detail;
  double slowest = 0.0;
  for (const Run& r : benchmark_runs()) slowest = std::max(slowest, r.seconds);
  if (slowest >= kRunSeconds) pass = false;

  // (a) pendulum: J* is the lowest cost seen by any pendulum run.
  const auto pend = select(EnvKind::pendulum, 50);
  double best = INFINITY;
  for (const Run* r : pend) {
    best = std::min(best, r->result.cost);
  }
  bool a = true;
  double gd_min = INFINITY;
  double fast_max = 0.0;
  for (const Run* r : pend) {
    double lowest = INFINITY;
    const double j0 = r->result.trace.initial_cost;
    for (const TraceEntry& e : r->result.trace.entries) {
      lowest = std::min(lowest, (e.cost - best) / (j0 - best));
    }
    if (r->kind == OracleKind::gd) {
      gd_min = std::min(gd_min, lowest);
      if (lowest <= kRelSubopt) a = false;
    } else {
      fast_max = std::max(fast_max, lowest);
      if (!(lowest <= kRelSubopt)) a = false;
    }
  }
  detail += fmt("(a)%s gn/ddp-lq_worst=%.2g gd_best=%.2g tol=%.0e; ", a ? "ok" : "FAIL", fast_max,
                gd_min, kRelSubopt);
  pass = pass && a;

  // (b) cart-pole: each DDP variant's best final cost over both rules against Gauss-Newton's.
  bool b = true;
  for (int tau : {25, 50}) {
    std::map<OracleKind, double> best_cost;
    for (const Run* r : select(EnvKind::cartpole, tau)) {
      auto [it, fresh] = best_cost.emplace(r->kind, r->result.cost);
      if (!fresh) it->second = std::min(it->second, r->result.cost);
    }
    const double gn = best_cost.at(OracleKind::gn);
    const double lq = best_cost.at(OracleKind::ddp_lq);
    const double q = best_cost.at(OracleKind::ddp_q);
    const bool ok = lq <= gn && q <= gn;
    b = b && ok;
    detail += fmt("(b)tau=%d %s gn=%.4g ddp-lq=%.4g ddp-q=%.4g; ", tau, ok ? "ok" : "FAIL", gn, lq, q);
  }
  pass = pass && b;

  // (c) bicycle car.
  const Run& bike = *select(EnvKind::bicycle_car, 50).front();
  bool monotone = true;
  double prev = bike.result.trace.initial_cost;
  for (const TraceEntry& e : bike.result.trace.entries) {
    if (e.cost > prev) monotone = false;
    prev = e.cost;
  }
  bool finite = true;
  for (const StateVec& x : forward(bike.problem, bike.result.u, 0, 0).x) finite = finite && x.allFinite();
  const double border = bicycle_border_cost(bike.problem, bike.result.u, EnvOptions{});
  const bool c = monotone && finite && border < kBorderTol &&
                 bike.result.trace.status != SolveStatus::diverged;
  detail += fmt("(c)%s monotone=%d finite=%d border=%.3g tol=%.0e; slowest_run=%.1fs limit=%.0fs",
                c ? "ok" : "FAIL", monotone, finite, border, kBorderTol, slowest, kRunSeconds);
  pass = pass && c;
  return {pass, detail};
}

ScalarFunction component(const VectorFunction& f, int i) {
  return ScalarFunction(f.input_dim(), [f, i](const auto& z) {
    using T = typename std::decay_t<decltype(z)>::Scalar;
    return T(f(z)(i));
  });
}

Outcome derivative_engine() {
  std::mt19937 rng(108);
  double jac = 0.0;
  double hes = 0.0;
  double contraction = 0.0;
  int points = 0;
  for (EnvKind env :
       {EnvKind::pendulum, EnvKind::cartpole, EnvKind::simple_car, EnvKind::bicycle_car}) {
    const TrajectoryProblem pb = build_problem(env, 20);
    for (int k = 0; k < 100; ++k, ++points) {
      const auto [x, u] = testing::sample_point(env, rng);
      Vector z(pb.nx + pb.nu);
      z << x, u;
      const int t = k % pb.horizon;
      const VectorFunction& f = pb.dynamics[t].joint();
      const ScalarFunction& h = pb.costs[t].joint();
      const ScalarFunction& hf = pb.final_cost.function();
      jac = std::max(jac, rel_error(jacobian(f, z), testing::fd_jacobian(f, z)));
      jac = std::max(jac, rel_error(gradient(h, z), testing::fd_gradient(h, z)));
      jac = std::max(jac, rel_error(gradient(hf, x), testing::fd_gradient(hf, x)));
      hes = std::max(hes, rel_error(hessian(h, z), testing::fd_hessian(h, z)));
      hes = std::max(hes, rel_error(hessian(hf, x), testing::fd_hessian(hf, x)));
      const Vector lambda = testing::random_vector(rng, pb.nx);
      Matrix sum = Matrix::Zero(z.size(), z.size());
      for (int i = 0; i < pb.nx; ++i) {
        const Matrix Hi = hessian(component(f, i), z);
        hes = std::max(hes, rel_error(Hi, testing::fd_hessian(component(f, i), z)));
        sum += lambda(i) * Hi;
      }
      contraction = std::max(contraction, rel_error(lambda_hessian(f, z, lambda), sum));
    }
  }
  return {jac <= kJacobianTol && hes <= kHessianTol && contraction <= kContractionTol,
          fmt("points=%d jacobian_rel=%.3g tol=%.0e hessian_rel=%.3g tol=%.0e "
              "lambda_hessian_rel=%.3g tol=%.0e",
              points, jac, kJacobianTol, hes, kHessianTol, contraction, kContractionTol)};
}

Outcome stationarity_certificate() {
  std::mt19937 rng(109);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Instance inst = random_instance(rng);
    const double ref = dense::gradient(inst.problem, inst.u).lpNorm<Eigen::Infinity>();
    worst = std::max(worst, std::abs(stationarity_residual(inst.problem, inst.u) - ref) /
                                std::max(1.0, ref));
  }
  int converged = 0;
  int violations = 0;
  for (const Run& r : benchmark_runs()) {
    if (r.result.trace.status != SolveStatus::converged) continue;
    ++converged;
    const double res = stationarity_residual(r.problem, r.result.u);
    if (!(res <= kResidualTol * (1.0 + std::abs(r.result.cost)))) ++violations;
  }
  return {worst <= kStationarityTol && violations == 0,
          fmt("residual_vs_dense_rel=%.3g tol=%.0e converged_endpoints=%d violations=%d", worst,
              kStationarityTol, converged, violations)};
}

Outcome smoothness() {
  std::mt19937 rng(110);
  double worst = -INFINITY;
  for (int i = 0; i < 20; ++i) {
    const int tau = std::uniform_int_distribution<int>(2, 6)(rng);
    const int nx = std::uniform_int_distribution<int>(1, 3)(rng);
    const int nu = std::uniform_int_distribution<int>(1, 3)(rng);
    const auto inst = testing::random_lipschitz_problem(rng, tau, nx, nu);
    const ControlSequence u = testing::random_controls(rng, tau, nu);
    const double norm =
        Eigen::JacobiSVD<Matrix>(dense::trajectory_jacobian(inst.problem, u)).singularValues()(0);
    const double bound = smoothness_bounds(inst.lx, inst.lu, 0.0, 0.0, inst.Luu, tau).l_bound;
    worst = std::max(worst, norm - bound);
  }
  return {worst <= kBoundSlack, fmt("max(norm - l_bound)=%.3g slack=%.0e", worst, kBoundSlack)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 oracle-equivalence", oracle_equivalence},
      {"2 lq-exactness", lq_exactness},
      {"3 linear-complexity", linear_complexity},
      {"4 policy-scaling", policy_scaling},
      {"5 line-search-contracts", line_search_contracts},
      {"6 counterexample", counterexample},
      {"7 benchmark-reproduction", benchmark_reproduction},
      {"8 derivative-engine", derivative_engine},
      {"9 stationarity-certificate", stationarity_certificate},
      {"10 smoothness-bounds", smoothness},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

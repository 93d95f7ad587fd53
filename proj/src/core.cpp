#include "trajopt/core.hpp"

#include <string>

namespace trajopt {

StateVec Dynamics::operator()(const StateVec& x, const CtrlVec& u) const {
  if (x.size() != nx_ || u.size() != nu_) throw ShapeError("dynamics: input size mismatch");
  Vector z(nx_ + nu_);
  z << x, u;
  return joint_(z);
}

double StageCost::operator()(const StateVec& x, const CtrlVec& u) const {
  if (x.size() != nx_ || u.size() != nu_) throw ShapeError("stage cost: input size mismatch");
  Vector z(nx_ + nu_);
  z << x, u;
  return joint_(z);
}

void TrajectoryProblem::validate() const {
  if (horizon < 1) throw ParameterError("horizon must be at least 1");
  if (static_cast<int>(dynamics.size()) != horizon || static_cast<int>(costs.size()) != horizon) {
    throw ShapeError("dynamics and cost lists must have one entry per step");
  }
  if (x0.size() != nx) throw ShapeError("initial state has wrong size");
  for (int t = 0; t < horizon; ++t) {
    if (dynamics[t].nx() != nx || dynamics[t].nu() != nu) {
      throw ShapeError("dynamics at step " + std::to_string(t) + " has wrong dimensions");
    }
    if (costs[t].nx() != nx || costs[t].nu() != nu) {
      throw ShapeError("cost at step " + std::to_string(t) + " has wrong dimensions");
    }
  }
  if (final_cost.nx() != nx) throw ShapeError("final cost has wrong dimension");
}

ControlSequence TrajectoryProblem::zero_controls() const {
  return ControlSequence(horizon, CtrlVec::Zero(nu));
}

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

bool all_finite(const Vector& v) { return v.allFinite(); }

QuadraticCostModel::QuadraticCostModel(Matrix H_, Matrix Q_, Matrix R_, Vector p_, Vector q_)
    : H(symmetrize(H_)), Q(symmetrize(Q_)), R(std::move(R_)), p(std::move(p_)), q(std::move(q_)) {
  const auto nx = H.rows();
  const auto nu = Q.rows();
  if (H.cols() != nx || Q.cols() != nu || R.rows() != nx || R.cols() != nu || p.size() != nx ||
      q.size() != nu) {
    throw ShapeError("quadratic cost model: inconsistent block sizes");
  }
}

QuadraticCostModel QuadraticCostModel::zero(int nx, int nu) {
  return {Matrix::Zero(nx, nx), Matrix::Zero(nu, nu), Matrix::Zero(nx, nu), Vector::Zero(nx),
          Vector::Zero(nu)};
}

double evaluate_quadratic(const QuadraticCostModel& m, const Vector& y, const Vector& v) {
  if (y.size() != m.H.rows() || v.size() != m.Q.rows()) {
    throw ShapeError("evaluate_quadratic: dimension mismatch");
  }
  return 0.5 * y.dot(m.H * y) + 0.5 * v.dot(m.Q * v) + y.dot(m.R * v) + m.p.dot(y) + m.q.dot(v);
}

int DynTensor::nx() const { return xx.empty() ? 0 : static_cast<int>(xx.front().rows()); }
int DynTensor::nu() const { return uu.empty() ? 0 : static_cast<int>(uu.front().rows()); }

Matrix DynTensor::contract(const Vector& lambda) const {
  if (lambda.size() != static_cast<Eigen::Index>(xx.size())) {
    throw ShapeError("DynTensor::contract: lambda has wrong size");
  }
  const int n = nx();
  const int m = nu();
  Matrix out = Matrix::Zero(n + m, n + m);
  for (std::size_t k = 0; k < xx.size(); ++k) {
    out.topLeftCorner(n, n) += lambda(k) * xx[k];
    out.topRightCorner(n, m) += lambda(k) * xu[k];
    out.bottomRightCorner(m, m) += lambda(k) * uu[k];
  }
  out.bottomLeftCorner(m, n) = out.topRightCorner(n, m).transpose();
  return out;
}

DynTensor dyn_tensor(const Dynamics& f, const StateVec& x, const CtrlVec& u) {
  const int n = f.nx();
  const int m = f.nu();
  Vector z(n + m);
  z << x, u;
  DynTensor T;
  for (int k = 0; k < n; ++k) {
    const Vector e = Vector::Unit(n, k);
    const Matrix Hk = lambda_hessian(f.joint(), z, e);
    T.xx.push_back(Hk.topLeftCorner(n, n));
    T.xu.push_back(Hk.topRightCorner(n, m));
    T.uu.push_back(Hk.bottomRightCorner(m, m));
  }
  return T;
}

double QuadraticValueFunction::operator()(const Vector& y) const {
  return 0.5 * y.dot(J * y) + j.dot(y) + j0;
}

QuadraticValueFunction QuadraticValueFunction::infeasible(int nx) {
  return {Matrix::Zero(nx, nx), Vector::Zero(nx), std::numeric_limits<double>::infinity()};
}

AffinePolicy AffinePolicy::zero(int nx, int nu) { return {Matrix::Zero(nu, nx), Vector::Zero(nu)}; }

StateVec finite_difference_dynamic(const Dynamics& f, const StateVec& x, const CtrlVec& u,
                                   const StateVec& y, const CtrlVec& v, int t) {
  StateVec out = f(x + y, u + v) - f(x, u);
  if (!out.allFinite()) throw NumericError("finite difference of dynamic is not finite", t);
  return out;
}

Vector flatten(const ControlSequence& u) {
  Eigen::Index n = 0;
  for (const auto& ut : u) n += ut.size();
  Vector flat(n);
  Eigen::Index off = 0;
  for (const auto& ut : u) {
    flat.segment(off, ut.size()) = ut;
    off += ut.size();
  }
  return flat;
}

ControlSequence unflatten(const Vector& flat, int horizon, int nu) {
  if (flat.size() != static_cast<Eigen::Index>(horizon) * nu) {
    throw ShapeError("unflatten: size mismatch");
  }
  ControlSequence u(horizon);
  for (int t = 0; t < horizon; ++t) u[t] = flat.segment(t * nu, nu);
  return u;
}

ControlSequence add(const ControlSequence& a, const ControlSequence& b, double scale) {
  if (a.size() != b.size()) throw ShapeError("add: control sequences differ in length");
  ControlSequence out(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) out[t] = a[t] + scale * b[t];
  return out;
}

}  // namespace trajopt

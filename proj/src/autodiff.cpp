#include "trajopt/autodiff.hpp"

#include <string>

namespace trajopt {

namespace {

void check_input(int expected, Eigen::Index got, const char* what) {
  if (expected != got) {
    throw ShapeError(std::string(what) + ": expected input of size " + std::to_string(expected) +
                     ", got " + std::to_string(got));
  }
}

template <class V>
void check_output(int expected, const V& out) {
  if (out.size() != expected) {
    throw ShapeError("vector function returned size " + std::to_string(out.size()) +
                     ", declared " + std::to_string(expected));
  }
}

}  // namespace

Vector VectorFunction::operator()(const Vector& z) const {
  check_input(impl_->in, z.size(), "vector function");
  Vector out = impl_->eval(z);
  check_output(impl_->out, out);
  return out;
}

HdVector VectorFunction::operator()(const HdVector& z) const {
  check_input(impl_->in, z.size(), "vector function");
  HdVector out = impl_->eval_hd(z);
  check_output(impl_->out, out);
  return out;
}

double ScalarFunction::operator()(const Vector& z) const {
  check_input(impl_->in, z.size(), "scalar function");
  return impl_->eval(z);
}

HyperDual ScalarFunction::operator()(const HdVector& z) const {
  check_input(impl_->in, z.size(), "scalar function");
  return impl_->eval_hd(z);
}

HdVector seed(const Vector& z, int i, int j) {
  HdVector out(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    out(k) = HyperDual(z(k), k == i ? 1.0 : 0.0, k == j ? 1.0 : 0.0, 0.0);
  }
  return out;
}

Matrix jacobian(const VectorFunction& g, const Vector& z) {
  check_input(g.input_dim(), z.size(), "jacobian");
  const int m = g.input_dim();
  Matrix jac(g.output_dim(), m);
  for (int i = 0; i < m; ++i) {
    const HdVector out = g(seed(z, i, -1));
    for (int k = 0; k < g.output_dim(); ++k) jac(k, i) = out(k).d1;
  }
  return jac;
}

Vector gradient(const ScalarFunction& g, const Vector& z) { return expand(g, z, 1).gradient; }

Matrix hessian(const ScalarFunction& g, const Vector& z) { return expand(g, z, 2).hessian; }

Matrix lambda_hessian(const VectorFunction& f, const Vector& z, const Vector& lambda) {
  return expand(f, z, DerivativeRequest{2, lambda}).lambda_hessian;
}

ScalarExpansion expand(const ScalarFunction& g, const Vector& z, int order) {
  check_input(g.input_dim(), z.size(), "expand");
  const int m = g.input_dim();
  ScalarExpansion e;
  if (order <= 0) {
    e.value = g(z);
    return e;
  }
  e.gradient.resize(m);
  if (order == 1) {
    e.value = g(z);
    for (int i = 0; i < m; ++i) e.gradient(i) = g(seed(z, i, -1)).d1;
    return e;
  }
  e.hessian.resize(m, m);
  e.value = g(z);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const HyperDual out = g(seed(z, i, j));
      if (i == j) e.gradient(i) = out.d1;
      e.hessian(i, j) = out.d12;
      e.hessian(j, i) = out.d12;
    }
  }
  return e;
}

VectorExpansion expand(const VectorFunction& f, const Vector& z, const DerivativeRequest& request) {
  check_input(f.input_dim(), z.size(), "expand");
  const int m = f.input_dim();
  const int n = f.output_dim();
  VectorExpansion e;
  e.value = f(z);
  if (request.order <= 0) return e;
  const bool contract = request.order >= 2 && request.lambda.has_value();
  if (!contract) {
    e.jacobian = jacobian(f, z);
    return e;
  }
  const Vector& lambda = *request.lambda;
  if (lambda.size() != n) throw ShapeError("lambda_hessian: contraction vector has wrong size");
  e.jacobian.resize(n, m);
  e.lambda_hessian.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const HdVector out = f(seed(z, i, j));
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += lambda(k) * out(k).d12;
      e.lambda_hessian(i, j) = acc;
      e.lambda_hessian(j, i) = acc;
      if (i == j) {
        for (int k = 0; k < n; ++k) e.jacobian(k, i) = out(k).d1;
      }
    }
  }
  return e;
}

}  // namespace trajopt

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <type_traits>
#include <utility>

#include <Eigen/Dense>

#include "trajopt/hyperdual.hpp"

namespace trajopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
template <class T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
using HdVector = VecX<HyperDual>;

/// Map R^m -> R^n usable both on doubles and on hyper-dual numbers.
class VectorFunction {
 public:
  VectorFunction() = default;

  /// `f` must be callable as f(VecX<T>) -> VecX<T> for T in {double, HyperDual}.
  template <class F>
  VectorFunction(int input_dim, int output_dim, F f)
      : impl_(std::make_shared<Impl>(Impl{
            input_dim, output_dim,
            [f](const Vector& z) -> Vector { return f(z); },
            [f](const HdVector& z) -> HdVector { return f(z); }})) {}

  int input_dim() const { return impl_->in; }
  int output_dim() const { return impl_->out; }
  bool valid() const { return static_cast<bool>(impl_); }

  Vector operator()(const Vector& z) const;
  HdVector operator()(const HdVector& z) const;

 private:
  struct Impl {
    int in;
    int out;
    std::function<Vector(const Vector&)> eval;
    std::function<HdVector(const HdVector&)> eval_hd;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Map R^m -> R usable both on doubles and on hyper-dual numbers.
class ScalarFunction {
 public:
  ScalarFunction() = default;

  /// `f` must be callable as f(VecX<T>) -> T for T in {double, HyperDual}.
  template <class F>
  ScalarFunction(int input_dim, F f)
      : impl_(std::make_shared<Impl>(Impl{
            input_dim,
            [f](const Vector& z) -> double { return f(z); },
            [f](const HdVector& z) -> HyperDual { return f(z); }})) {}

  int input_dim() const { return impl_->in; }
  bool valid() const { return static_cast<bool>(impl_); }

  double operator()(const Vector& z) const;
  HyperDual operator()(const HdVector& z) const;

 private:
  struct Impl {
    int in;
    std::function<double(const Vector&)> eval;
    std::function<HyperDual(const HdVector&)> eval_hd;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Order of derivative information to collect, plus the contraction vector for dynamics.
struct DerivativeRequest {
  int order = 0;
  std::optional<Vector> lambda;
};

struct ScalarExpansion {
  double value = 0.0;
  Vector gradient;  ///< empty when order < 1
  Matrix hessian;   ///< empty when order < 2
};

struct VectorExpansion {
  Vector value;
  Matrix jacobian;        ///< n x m, empty when order < 1
  Matrix lambda_hessian;  ///< m x m, empty unless order 2 with a contraction vector
};

Matrix jacobian(const VectorFunction& g, const Vector& z);
Vector gradient(const ScalarFunction& g, const Vector& z);
Matrix hessian(const ScalarFunction& g, const Vector& z);
/// Hessian of z -> f(z)^T lambda.
Matrix lambda_hessian(const VectorFunction& f, const Vector& z, const Vector& lambda);

ScalarExpansion expand(const ScalarFunction& g, const Vector& z, int order);
VectorExpansion expand(const VectorFunction& f, const Vector& z, const DerivativeRequest& request);

/// A x for a constant matrix and a vector of either scalar type.
template <class T>
VecX<T> apply(const Matrix& A, const VecX<T>& x) {
  VecX<T> out(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    T acc(0.0);
    for (Eigen::Index j = 0; j < A.cols(); ++j) acc += A(i, j) * x(j);
    out(i) = acc;
  }
  return out;
}

/// Seeds z as hyper-dual numbers with d1 = e_i, d2 = e_j (pass -1 to leave a direction unseeded).
HdVector seed(const Vector& z, int i, int j);

}  // namespace trajopt

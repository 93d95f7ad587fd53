#pragma once

#include <cmath>
#include <ostream>

#include <Eigen/Core>

#include "trajopt/errors.hpp"

namespace trajopt {

/// Hyper-dual scalar: value + eps1 d1 + eps2 d2 + eps1 eps2 d12, with eps1^2 = eps2^2 = 0.
struct HyperDual {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d12 = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double v) : value(v) {}  // NOLINT(google-explicit-constructor)
  constexpr HyperDual(double v, double a, double b, double ab) : value(v), d1(a), d2(b), d12(ab) {}

  HyperDual& operator+=(const HyperDual& o) {
    value += o.value;
    d1 += o.d1;
    d2 += o.d2;
    d12 += o.d12;
    return *this;
  }
  HyperDual& operator-=(const HyperDual& o) {
    value -= o.value;
    d1 -= o.d1;
    d2 -= o.d2;
    d12 -= o.d12;
    return *this;
  }
  HyperDual& operator*=(const HyperDual& o) {
    *this = HyperDual(value * o.value, value * o.d1 + d1 * o.value, value * o.d2 + d2 * o.value,
                      value * o.d12 + d1 * o.d2 + d2 * o.d1 + d12 * o.value);
    return *this;
  }
  HyperDual& operator/=(const HyperDual& o);
};

namespace hd_detail {
// Applies a scalar function with value g, first derivative g1 and second derivative g2.
inline HyperDual chain(const HyperDual& a, double g, double g1, double g2) {
  return {g, g1 * a.d1, g1 * a.d2, g1 * a.d12 + g2 * a.d1 * a.d2};
}
}  // namespace hd_detail

inline HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
inline HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
inline HyperDual operator*(HyperDual a, const HyperDual& b) { return a *= b; }
inline HyperDual operator-(const HyperDual& a) { return {-a.value, -a.d1, -a.d2, -a.d12}; }
inline HyperDual operator+(const HyperDual& a) { return a; }

inline HyperDual reciprocal(const HyperDual& a) {
  const double inv = 1.0 / a.value;
  return hd_detail::chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline HyperDual& HyperDual::operator/=(const HyperDual& o) { return *this *= reciprocal(o); }
inline HyperDual operator/(HyperDual a, const HyperDual& b) { return a /= b; }

inline bool operator<(const HyperDual& a, const HyperDual& b) { return a.value < b.value; }
inline bool operator>(const HyperDual& a, const HyperDual& b) { return a.value > b.value; }
inline bool operator<=(const HyperDual& a, const HyperDual& b) { return a.value <= b.value; }
inline bool operator>=(const HyperDual& a, const HyperDual& b) { return a.value >= b.value; }
inline bool operator==(const HyperDual& a, const HyperDual& b) { return a.value == b.value; }
inline bool operator!=(const HyperDual& a, const HyperDual& b) { return a.value != b.value; }

inline std::ostream& operator<<(std::ostream& os, const HyperDual& a) {
  return os << "(" << a.value << ", " << a.d1 << ", " << a.d2 << ", " << a.d12 << ")";
}

inline HyperDual sin(const HyperDual& a) {
  const double s = std::sin(a.value);
  return hd_detail::chain(a, s, std::cos(a.value), -s);
}
inline HyperDual cos(const HyperDual& a) {
  const double c = std::cos(a.value);
  return hd_detail::chain(a, c, -std::sin(a.value), -c);
}
inline HyperDual tan(const HyperDual& a) {
  const double t = std::tan(a.value);
  const double sec2 = 1.0 + t * t;
  return hd_detail::chain(a, t, sec2, 2.0 * t * sec2);
}
inline HyperDual atan(const HyperDual& a) {
  const double den = 1.0 + a.value * a.value;
  return hd_detail::chain(a, std::atan(a.value), 1.0 / den, -2.0 * a.value / (den * den));
}
inline HyperDual exp(const HyperDual& a) {
  const double e = std::exp(a.value);
  return hd_detail::chain(a, e, e, e);
}
inline HyperDual log(const HyperDual& a) {
  if (!(a.value > 0.0)) throw DomainError("log: argument must be positive");
  const double inv = 1.0 / a.value;
  return hd_detail::chain(a, std::log(a.value), inv, -inv * inv);
}
inline HyperDual log1p(const HyperDual& a) {
  if (!(a.value > -1.0)) throw DomainError("log1p: argument must exceed -1");
  const double inv = 1.0 / (1.0 + a.value);
  return hd_detail::chain(a, std::log1p(a.value), inv, -inv * inv);
}
inline HyperDual sqrt(const HyperDual& a) {
  if (!(a.value > 0.0)) throw DomainError("sqrt: argument must be positive");
  const double r = std::sqrt(a.value);
  return hd_detail::chain(a, r, 0.5 / r, -0.25 / (r * a.value));
}
inline HyperDual pow(const HyperDual& a, double p) {
  if (p == 0.0) return HyperDual(1.0);
  if (a.value == 0.0 && p < 2.0 && p != 1.0) throw DomainError("pow: non-differentiable at zero");
  const double v = std::pow(a.value, p);
  const double v1 = p * std::pow(a.value, p - 1.0);
  const double v2 = p * (p - 1.0) * std::pow(a.value, p - 2.0);
  return hd_detail::chain(a, v, v1, v2);
}
inline HyperDual pow(const HyperDual& a, const HyperDual& b) { return exp(b * log(a)); }
inline HyperDual tanh(const HyperDual& a) {
  const double t = std::tanh(a.value);
  const double g1 = 1.0 - t * t;
  return hd_detail::chain(a, t, g1, -2.0 * t * g1);
}
inline HyperDual abs(const HyperDual& a) { return a.value < 0.0 ? -a : a; }

inline HyperDual atan2(const HyperDual& y, const HyperDual& x) {
  const double r2 = x.value * x.value + y.value * y.value;
  if (r2 == 0.0) throw DomainError("atan2: undefined at the origin");
  // First derivative along direction k: (x y_k - y x_k) / r2.
  const double n1 = x.value * y.d1 - y.value * x.d1;
  const double n2 = x.value * y.d2 - y.value * x.d2;
  const double n12 = x.d2 * y.d1 + x.value * y.d12 - y.d2 * x.d1 - y.value * x.d12;
  const double r2_2 = 2.0 * (x.value * x.d2 + y.value * y.d2);
  return {std::atan2(y.value, x.value), n1 / r2, n2 / r2, (n12 * r2 - n1 * r2_2) / (r2 * r2)};
}

inline double sigmoid(double a) {
  return a >= 0.0 ? 1.0 / (1.0 + std::exp(-a)) : std::exp(a) / (1.0 + std::exp(a));
}
inline HyperDual sigmoid(const HyperDual& a) {
  const double s = sigmoid(a.value);
  const double g1 = s * (1.0 - s);
  return hd_detail::chain(a, s, g1, g1 * (1.0 - 2.0 * s));
}

inline constexpr double kSmoothMaxSharpness = 0.01;

/// Softplus approximation of max(m, 0): s log(1 + exp(m / s)).
template <class T>
T smooth_max(const T& m, double s = kSmoothMaxSharpness) {
  using std::exp;
  using std::log1p;
  const T z = m / s;
  if (z > T(0.0)) return s * (z + log1p(exp(-z)));
  return s * log1p(exp(z));
}

inline double value_of(double a) { return a; }
inline double value_of(const HyperDual& a) { return a.value; }

}  // namespace trajopt

namespace Eigen {
template <>
struct NumTraits<trajopt::HyperDual> : NumTraits<double> {
  using Real = trajopt::HyperDual;
  using NonInteger = trajopt::HyperDual;
  using Nested = trajopt::HyperDual;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 4,
    AddCost = 4,
    MulCost = 8
  };
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<trajopt::HyperDual, double, BinaryOp> {
  using ReturnType = trajopt::HyperDual;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, trajopt::HyperDual, BinaryOp> {
  using ReturnType = trajopt::HyperDual;
};
}  // namespace Eigen

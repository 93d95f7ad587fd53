#pragma once

#include <stdexcept>
#include <string>

namespace trajopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value or primitive evaluated outside its domain.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, int t = -1) : Error(what), t_(t) {}
  int time_index() const { return t_; }

 private:
  int t_;
};

class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Raised by forward passes and rollouts when a state becomes non-finite.
class DivergenceError : public NumericError {
 public:
  explicit DivergenceError(int t)
      : NumericError("trajectory diverged at step " + std::to_string(t), t) {}
};

class InfeasibleStageError : public Error {
 public:
  explicit InfeasibleStageError(int t)
      : Error("stage " + std::to_string(t) + " is not positive definite"), t_(t) {}
  int time_index() const { return t_; }

 private:
  int t_;
};

class StallError : public Error {
 public:
  using Error::Error;
};

}  // namespace trajopt

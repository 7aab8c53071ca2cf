#pragma once

#include <stdexcept>
#include <string>

namespace fou {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or time value lies outside the domain of the formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The caller misused an API (off-grid time, wrong process tag, too few samples).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A configuration cannot be realized (e.g. unreachable truncation tolerance).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Linear-algebra failure: a Gram matrix is not positive semidefinite.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double estimate, double error)
      : Error(what), estimate_(estimate), error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

/// A Monte Carlo experiment would exceed its simulation budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace fou

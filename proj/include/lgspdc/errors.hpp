#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace lgspdc {

/// Input outside the declared validity range of a model (wavelength, temperature, radicand...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke an operation precondition (index ranges, mismatched inputs).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No Delta k = 0 solution exists at the requested temperature.
class NoPhaseMatching : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature ran out of refinements. Carries the best estimate it had.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::complex<double> best, double residual)
      : std::runtime_error(what), best_(best), residual_(residual) {}
  std::complex<double> best_estimate() const { return best_; }
  double residual() const { return residual_; }

 private:
  std::complex<double> best_;
  double residual_;
};

/// Optimum landed on a search bound even after widening.
class BoundaryHit : public std::runtime_error {
 public:
  BoundaryHit(const std::string& what, std::string bound_name, double bound_value)
      : std::runtime_error(what), bound_(std::move(bound_name)), value_(bound_value) {}
  const std::string& bound() const { return bound_; }
  double value() const { return value_; }

 private:
  std::string bound_;
  double value_;
};

/// Request exceeds the documented cost guard of the brute-force oracle.
class CostGuardExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid configuration (maps to CLI exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lgspdc

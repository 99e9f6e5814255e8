#pragma once

#include <stdexcept>
#include <string>

namespace vortex {

/// Precondition or input violation (bad quantum numbers, malformed config).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Result not representable in the requested (unscaled) form.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Numerical failure: non-convergence, missing sign change, quadrature budget.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when adaptive quadrature runs out of subdivisions. Carries the
/// best estimate reached so callers can decide whether it is usable.
class QuadratureError : public NumericError {
 public:
  QuadratureError(const std::string& what, double estimate, double error_bound)
      : NumericError(what), estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

}  // namespace vortex

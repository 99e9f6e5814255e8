#pragma once

#include <cmath>
#include <string>

#include "vortex/errors.hpp"
#include "vortex/specfun/factorial.hpp"

namespace vortex::specfun {

/// Associated Laguerre polynomial L_p^alpha(x) from its explicit finite sum.
inline double assoc_laguerre(int p, int alpha, double x) {
  if (p < 0 || alpha < 0) throw DomainError("assoc_laguerre: p and alpha must be >= 0");
  // (-1)^j (alpha+p)! / ((p-j)! (alpha+j)! j!) x^j, coefficients by ratio
  double coeff = 1.0;
  for (int i = 1; i <= p; ++i) coeff *= static_cast<double>(alpha + i) / i;  // C(alpha+p, p)
  double sum = 0.0;
  double xj = 1.0;
  for (int j = 0; j <= p; ++j) {
    sum += (j % 2 == 0 ? coeff : -coeff) * xj;
    coeff *= static_cast<double>(p - j) / ((alpha + j + 1.0) * (j + 1.0));
    xj *= x;
  }
  return sum;
}

/// Roman factorial: n! for n >= 0, (-1)^(-n-1) / (-n-1)! for n < 0.
inline double roman_factorial(int n) {
  if (n >= 0) return factorial(n);
  const int m = -n - 1;
  return (m % 2 == 0 ? 1.0 : -1.0) / factorial(m);
}

namespace detail {
inline bool near_integer(double x, long& rounded) {
  rounded = std::lround(x);
  return std::abs(x - static_cast<double>(rounded)) < 1e-12;
}
}  // namespace detail

/// Real-argument extension: integer arguments use the integer definition,
/// everything else Gamma(1 + x).
inline double roman_factorial(double x) {
  long n = 0;
  if (detail::near_integer(x, n)) return roman_factorial(static_cast<int>(n));
  return std::tgamma(1.0 + x);
}

/// Kummer confluent hypergeometric 1F1(a; c; x) by its power series.
/// Terminates exactly when a is a non-positive integer.
inline double hyp1f1(double a, double c, double x, double rel_tol = 1e-14, int max_terms = 100000) {
  long ci = 0;
  if (detail::near_integer(c, ci) && ci <= 0) throw DomainError("hyp1f1: c must not be a non-positive integer");
  long ai = 0;
  const bool terminating = detail::near_integer(a, ai) && ai <= 0;

  double term = 1.0;
  double sum = 1.0;
  double max_term = 1.0;
  for (int k = 0; k < max_terms; ++k) {
    if (terminating && k >= -ai) return sum;
    term *= (a + k) / (c + k) * x / (k + 1.0);
    sum += term;
    max_term = std::max(max_term, std::abs(term));
    // ratio -> x/k, so once k > |x| and the term is negligible the tail is too
    if (k + 1 > std::abs(x) + std::abs(a) && std::abs(term) <= rel_tol * std::abs(sum)) return sum;
  }
  if (terminating) return sum;
  throw NumericError("hyp1f1: series did not converge in " + std::to_string(max_terms) + " terms");
}

/// Extended Laguerre function
///   L~_n^{|nu|}(x) = [n+|nu|]! / ([n]! [|nu|]!) 1F1(-n; |nu|+1; x)
/// with Roman factorials; n may be half-integer or negative.
inline double extended_laguerre(double n, int nu_abs, double x) {
  if (nu_abs < 0) throw DomainError("extended_laguerre: |nu| must be >= 0");
  const double prefactor = roman_factorial(n + nu_abs) / (roman_factorial(n) * roman_factorial(nu_abs));
  return prefactor * hyp1f1(-n, nu_abs + 1.0, x, 1e-15);
}

}  // namespace vortex::specfun

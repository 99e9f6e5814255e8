#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "vortex/errors.hpp"

namespace vortex::specfun {

/// Integer-order Bessel function of the first kind, any sign of order and x.
inline double bessel_j(int order, double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j: non-finite argument");
  double sign = 1.0;
  if (order < 0) {
    order = -order;
    if (order % 2 != 0) sign = -sign;
  }
  if (x < 0.0) {
    x = -x;
    if (order % 2 != 0) sign = -sign;
  }
  if (x == 0.0) return order == 0 ? sign : 0.0;
  return sign * std::cyl_bessel_j(static_cast<double>(order), x);
}

namespace detail {

// Hankel expansion of e^{-x} I_n(x); accurate once x is well past n^2/2.
inline double bessel_i_scaled_asymptotic(int order, double x) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) > std::abs(term)) break;  // series started to diverge
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

inline bool use_asymptotic_i(int order, double x) {
  return x > 30.0 && x > 2.0 * order * order;
}

inline void check_i_args(int order, double x, const char* name) {
  if (order < 0) throw DomainError(std::string(name) + ": negative order");
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError(std::string(name) + ": argument must be finite and >= 0");
}

}  // namespace detail

/// Exponentially scaled modified Bessel function e^{-x} I_n(x).
inline double bessel_i_scaled(int order, double x) {
  detail::check_i_args(order, x, "bessel_i_scaled");
  if (x == 0.0) return order == 0 ? 1.0 : 0.0;
  if (detail::use_asymptotic_i(order, x)) return detail::bessel_i_scaled_asymptotic(order, x);
  return std::exp(-x) * std::cyl_bessel_i(static_cast<double>(order), x);
}

/// Modified Bessel function I_n(x), x >= 0. Throws RangeError instead of
/// returning inf; use bessel_i_scaled for large arguments.
inline double bessel_i(int order, double x) {
  detail::check_i_args(order, x, "bessel_i");
  if (x == 0.0) return order == 0 ? 1.0 : 0.0;
  constexpr double kMaxExp = 700.0;
  if (x > kMaxExp) {
    throw RangeError("bessel_i: I_" + std::to_string(order) + "(" + std::to_string(x) +
                     ") overflows double; use bessel_i_scaled");
  }
  if (detail::use_asymptotic_i(order, x)) return std::exp(x) * detail::bessel_i_scaled_asymptotic(order, x);
  return std::cyl_bessel_i(static_cast<double>(order), x);
}

/// k-th positive zero (k >= 1) of J_n, n >= 0. McMahon starting point,
/// then safeguarded Newton on a bracket.
inline double bessel_j_zero(int order, int k) {
  if (order < 0) order = -order;
  if (k < 1) throw DomainError("bessel_j_zero: k must be >= 1");
  const double mu = 4.0 * order * order;
  const double beta = (k + 0.5 * order - 0.25) * std::numbers::pi;
  double guess = beta - (mu - 1.0) / (8.0 * beta) - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * std::pow(8.0 * beta, 3));
  if (order > 0 && k == 1) guess = std::max(guess, order + 1.8557 * std::cbrt(static_cast<double>(order)));

  // Zeros are separated by roughly pi; bracket within half a spacing.
  double lo = std::max(guess - 1.2, 1e-6);
  double hi = guess + 1.2;
  auto f = [order](double x) { return bessel_j(order, x); };
  double flo = f(lo);
  double fhi = f(hi);
  for (int expand = 0; flo * fhi > 0.0 && expand < 8; ++expand) {
    lo = std::max(lo - 0.3, 1e-6);
    hi += 0.3;
    flo = f(lo);
    fhi = f(hi);
  }
  if (flo * fhi > 0.0) throw NumericError("bessel_j_zero: failed to bracket zero");

  double x = std::clamp(guess, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    // J_n' = (J_{n-1} - J_{n+1}) / 2
    const double slope = 0.5 * (bessel_j(order - 1, x) - bessel_j(order + 1, x));
    double next = x - fx / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x) return next;
    x = next;
  }
  return x;
}

}  // namespace vortex::specfun

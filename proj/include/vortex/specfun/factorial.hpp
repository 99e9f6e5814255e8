#pragma once

#include <array>
#include <cmath>

#include "vortex/errors.hpp"

namespace vortex::specfun {

namespace detail {
inline constexpr int kFactorialTableSize = 171;  // 170! is the largest finite double

inline const std::array<double, kFactorialTableSize>& factorial_table() {
  static const auto table = [] {
    std::array<double, kFactorialTableSize> t{};
    t[0] = 1.0;
    for (int i = 1; i < kFactorialTableSize; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table;
}
}  // namespace detail

inline double factorial(int n) {
  if (n < 0) throw DomainError("factorial of negative integer");
  if (n >= detail::kFactorialTableSize) throw RangeError("factorial overflows double");
  return detail::factorial_table()[n];
}

/// x^n for integer n >= 0 with 0^0 = 1.
inline double ipow(double x, int n) {
  double r = 1.0;
  for (; n > 0; --n) r *= x;
  return r;
}

}  // namespace vortex::specfun

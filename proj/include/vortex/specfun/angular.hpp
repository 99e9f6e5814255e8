#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "vortex/errors.hpp"
#include "vortex/halfint.hpp"
#include "vortex/specfun/factorial.hpp"

namespace vortex::specfun {

/// Wigner small-d element d^j_{m1,m2}(theta) = <j m1| exp(-i theta J_y) |j m2>,
/// Condon-Shortley phases (d^1_{1,0} = -sin(theta)/sqrt 2). Explicit factorial sum.
inline double wigner_d(HalfInt j, HalfInt m1, HalfInt m2, double theta) {
  if (!valid_projection(j, m1) || !valid_projection(j, m2)) {
    throw DomainError("wigner_d: incompatible quantum numbers j=" + j.str() + " m1=" + m1.str() +
                      " m2=" + m2.str());
  }
  const int jp = (j + m1).as_int();  // j + m'
  const int jm = (j - m1).as_int();  // j - m'
  const int kp = (j + m2).as_int();  // j + m
  const int km = (j - m2).as_int();  // j - m
  const int dm = (m1 - m2).as_int();  // m' - m

  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const double norm = std::sqrt(factorial(jp) * factorial(jm) * factorial(kp) * factorial(km));

  const int kmin = std::max(0, -dm);
  const int kmax = std::min(kp, jm);
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double denom = factorial(kp - k) * factorial(k) * factorial(jm - k) * factorial(k + dm);
    const double term = ipow(c, kp + jm - 2 * k) * ipow(s, 2 * k + dm) / denom;
    sum += ((k + dm) % 2 == 0) ? term : -term;
  }
  return norm * sum;
}

/// Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>.
/// Racah's closed form evaluated in exact rational arithmetic; the square
/// root is taken once at the end. Returns exactly 0 for any selection-rule
/// violation (triangle, M != m1+m2, bad projections).
inline double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;

  if (!valid_projection(j1, m1) || !valid_projection(j2, m2) || !valid_projection(J, M)) return 0.0;
  if (M != m1 + m2) return 0.0;
  if (!(j1 + j2 + J).is_integer()) return 0.0;
  if (J < abs(j1 - j2) || J > j1 + j2) return 0.0;

  auto fact = [](int n) {
    cpp_int r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
  };

  const int a = (j1 + j2 - J).as_int();
  const int b = (j1 - m1).as_int();
  const int c = (j2 + m2).as_int();
  const int d = (J - j2 + m1).as_int();
  const int e = (J - j1 - m2).as_int();

  cpp_rational sum = 0;
  const int kmin = std::max({0, -d, -e});
  const int kmax = std::min({a, b, c});
  for (int k = kmin; k <= kmax; ++k) {
    cpp_rational term(cpp_int(1), fact(k) * fact(a - k) * fact(b - k) * fact(c - k) * fact(d + k) * fact(e + k));
    if (k % 2 != 0) term = -term;
    sum += term;
  }
  if (sum == 0) return 0.0;

  const cpp_int num = cpp_int(J.twice() + 1) * fact((J + j1 - j2).as_int()) * fact((J - j1 + j2).as_int()) * fact(a) *
                      fact((J + M).as_int()) * fact((J - M).as_int()) * fact(b) * fact((j1 + m1).as_int()) *
                      fact((j2 - m2).as_int()) * fact(c);
  const cpp_int den = fact((j1 + j2 + J).as_int() + 1);
  const cpp_rational squared = sum * sum * cpp_rational(num, den);
  const double magnitude = std::sqrt(squared.convert_to<double>());
  return sum > 0 ? magnitude : -magnitude;
}

}  // namespace vortex::specfun

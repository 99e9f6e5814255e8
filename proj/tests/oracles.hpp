#pragma once

// Reference implementations that share no code with the library.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// J_n(x) by Miller's downward recurrence normalised with
/// J_0 + 2 sum J_{2k} = 1, in long double.
inline double bessel_j(int n, double xd) {
  const long double x = xd;
  const int an = std::abs(n);
  if (x == 0.0L) return an == 0 ? 1.0 : 0.0;
  const int start = 2 * ((std::max(an, static_cast<int>(std::fabs(xd))) + 60) / 2);
  long double jp1 = 0.0L, j = 1e-300L, norm = 0.0L, result = 0.0L;
  for (int k = start; k >= 0; --k) {
    const long double jm1 = 2.0L * (k + 1) / x * j - jp1;  // J_k from J_{k+1}, J_{k+2}
    jp1 = j;
    j = jm1;
    if (k == an) result = j;
    if (k == 0) norm += j;
    else if (k % 2 == 0) norm += 2.0L * j;
    if (std::fabs(j) > 1e280L) {
      j *= 1e-280L;
      jp1 *= 1e-280L;
      result *= 1e-280L;
      norm *= 1e-280L;
    }
  }
  long double v = result / norm;
  if (n < 0 && an % 2 != 0) v = -v;
  return static_cast<double>(v);
}

/// I_n(x) by its power series in long double.
inline double bessel_i_series(int n, double xd) {
  const long double h = 0.5L * xd;
  long double term = 1.0L;
  for (int k = 1; k <= n; ++k) term *= h / k;
  long double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= h * h / (k * static_cast<long double>(k + n));
    sum += term;
    if (term < 1e-22L * sum) break;
  }
  return static_cast<double>(sum);
}

/// d^j(theta) = exp(-i theta J_y) for 2j = twice_j, rows/cols m = j ... -j.
inline Eigen::MatrixXd wigner_matrix(int twice_j, double theta) {
  const int dim = twice_j + 1;
  const double j = 0.5 * twice_j;
  Eigen::MatrixXcd jy = Eigen::MatrixXcd::Zero(dim, dim);
  for (int a = 0; a + 1 < dim; ++a) {
    const double m = j - a - 1;  // J+ |m> = c |m+1>
    const double c = std::sqrt(j * (j + 1) - m * (m + 1));
    jy(a, a + 1) = std::complex<double>(0.0, -0.5 * c);
    jy(a + 1, a) = std::complex<double>(0.0, 0.5 * c);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(jy);
  Eigen::VectorXcd phase(dim);
  for (int i = 0; i < dim; ++i) phase[i] = std::exp(std::complex<double>(0.0, -theta * es.eigenvalues()[i]));
  const Eigen::MatrixXcd u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  return u.real();
}

inline double wigner_d(int twice_j, int twice_m1, int twice_m2, double theta) {
  const Eigen::MatrixXd d = wigner_matrix(twice_j, theta);
  return d((twice_j - twice_m1) / 2, (twice_j - twice_m2) / 2);
}

inline long double fact(int n) {
  long double f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Racah formula in long double, arguments doubled.
inline double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  if (tm1 + tm2 != tM) return 0.0;
  if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2) return 0.0;
  auto h = [](int t) { return t / 2; };
  const int a = h(tj1 + tj2 - tJ), b = h(tj1 - tj2 + tJ), c = h(-tj1 + tj2 + tJ), d = h(tj1 + tj2 + tJ) + 1;
  const long double pre = std::sqrt((tJ + 1) * fact(a) * fact(b) * fact(c) / fact(d) * fact(h(tj1 + tm1)) * fact(h(tj1 - tm1)) *
                                    fact(h(tj2 + tm2)) * fact(h(tj2 - tm2)) * fact(h(tJ + tM)) * fact(h(tJ - tM)));
  long double sum = 0.0L;
  for (int k = 0; k <= 40; ++k) {
    const int e1 = a - k, e2 = h(tj1 - tm1) - k, e3 = h(tj2 + tm2) - k, e4 = h(tJ - tj2 + tm1) + k,
              e5 = h(tJ - tj1 - tm2) + k;
    if (e1 < 0 || e2 < 0 || e3 < 0 || e4 < 0 || e5 < 0) continue;
    sum += ((k % 2) ? -1.0L : 1.0L) / (fact(k) * fact(e1) * fact(e2) * fact(e3) * fact(e4) * fact(e5));
  }
  return static_cast<double>(pre * sum);
}

/// sum_m (-1)^m C(p+a, p-m) x^m / m!
inline double assoc_laguerre(int p, int a, double x) {
  long double s = 0.0L;
  for (int m = 0; m <= p; ++m) {
    s += ((m % 2) ? -1.0L : 1.0L) * fact(p + a) / (fact(p - m) * fact(a + m)) * std::pow(static_cast<long double>(x), m) / fact(m);
  }
  return static_cast<double>(s);
}

/// P(X >= x) for X ~ Binomial(n, q).
inline double binom_upper_tail(int x, int n, double q) {
  long double s = 0.0L;
  for (int k = x; k <= n; ++k) {
    s += fact(n) / (fact(k) * fact(n - k)) * std::pow(static_cast<long double>(q), k) *
         std::pow(1.0L - static_cast<long double>(q), n - k);
  }
  return static_cast<double>(s);
}

/// Clopper-Pearson bounds by bisection on the binomial tails.
inline std::pair<double, double> clopper_pearson(int x, int n, double conf) {
  const double a = 0.5 * (1.0 - conf);
  auto solve = [](auto f) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double lower = x == 0 ? 0.0 : solve([&](double q) { return binom_upper_tail(x, n, q) >= a; });
  const double upper = x == n ? 1.0 : solve([&](double q) { return 1.0 - binom_upper_tail(x + 1, n, q) <= a; });
  return {lower, upper};
}

}  // namespace oracle

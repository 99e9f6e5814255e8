#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "vortex/errors.hpp"

namespace vortex::specfun {

enum class QuadratureRule {
  adaptive_gauss_legendre,  ///< globally adaptive 7-point Gauss / 15-point Kronrod pairs
  fixed_panel,              ///< composite 15-point rule on equal panels, no refinement
};

struct QuadratureSpec {
  QuadratureRule rule = QuadratureRule::adaptive_gauss_legendre;
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_subdivisions = 4000;
  /// Upper bound on initial panel width (0 = none). Oscillatory Bessel
  /// integrands J_n(k b) use pi / (2 b).
  double max_panel_width = 0.0;
  /// Convergence is also accepted once the error is below this fraction of
  /// the integral of |f|, so fully cancelling integrands terminate.
  double noise_floor = 1e-15;

  void validate() const {
    if (!(rel_tol > 0.0)) throw DomainError("QuadratureSpec: rel_tol must be > 0");
    if (!(abs_tol >= 0.0)) throw DomainError("QuadratureSpec: abs_tol must be >= 0");
    if (max_subdivisions < 1) throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
    if (max_panel_width < 0.0) throw DomainError("QuadratureSpec: max_panel_width must be >= 0");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  double abs_integral = 0.0;
  int panels = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error, abs_value;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  double abs_sum = std::abs(fc) * kWgk[7];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[i];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kWgk[i] * (f1 + f2);
    abs_sum += kWgk[i] * (std::abs(f1) + std::abs(f2));
    if (i % 2 == 1) gauss += kWg[i / 2] * (f1 + f2);
  }
  if (!std::isfinite(kronrod)) throw NumericError("integrate: integrand is not finite on the interval");
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half), abs_sum * std::abs(half)};
}

}  // namespace detail

/// Integrates f over [a, b]. err <= max(abs_tol, rel_tol |I|) on return;
/// throws QuadratureError with the best estimate when the subdivision budget
/// is spent first.
template <class F>
QuadratureResult integrate_detailed(const F& f, double a, double b, const QuadratureSpec& spec = {}) {
  spec.validate();
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("integrate: need finite a < b");
  }
  int initial = 1;
  if (spec.max_panel_width > 0.0) {
    initial = static_cast<int>(std::ceil((b - a) / spec.max_panel_width));
    initial = std::max(initial, 1);
  }
  if (spec.rule == QuadratureRule::fixed_panel) initial = std::max(initial, spec.max_subdivisions);

  std::priority_queue<detail::Panel> heap;
  const double width = (b - a) / initial;
  for (int i = 0; i < initial; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == initial) ? b : a + (i + 1) * width;
    heap.push(detail::gauss_kronrod15(f, lo, hi));
  }

  auto totals = [&heap] {
    auto copy = heap;
    QuadratureResult r;
    r.panels = static_cast<int>(copy.size());
    while (!copy.empty()) {
      r.value += copy.top().value;
      r.error += copy.top().error;
      r.abs_integral += copy.top().abs_value;
      copy.pop();
    }
    return r;
  };

  QuadratureResult total = totals();
  if (spec.rule == QuadratureRule::fixed_panel) return total;

  auto converged = [&spec](const QuadratureResult& r) {
    const double target = std::max({spec.abs_tol, spec.rel_tol * std::abs(r.value), spec.noise_floor * r.abs_integral});
    return r.error <= target;
  };

  int splits = 0;
  while (!converged(total)) {
    if (splits >= spec.max_subdivisions) {
      throw QuadratureError("integrate: max_subdivisions (" + std::to_string(spec.max_subdivisions) +
                                ") exceeded, estimate " + std::to_string(total.value) + " +- " +
                                std::to_string(total.error),
                            total.value, total.error);
    }
    const detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Panel left = detail::gauss_kronrod15(f, worst.a, mid);
    const detail::Panel right = detail::gauss_kronrod15(f, mid, worst.b);
    heap.push(left);
    heap.push(right);
    total.value += left.value + right.value - worst.value;
    total.error += left.error + right.error - worst.error;
    total.abs_integral += left.abs_value + right.abs_value - worst.abs_value;
    ++splits;
    if (splits % 64 == 0) total = totals();  // resynchronise the running sums
  }
  return totals();
}

template <class F>
double integrate(const F& f, double a, double b, const QuadratureSpec& spec = {}) {
  return integrate_detailed(f, a, b, spec).value;
}

}  // namespace vortex::specfun

#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vortex/amplitudes.hpp"
#include "vortex/beams.hpp"
#include "vortex/halfint.hpp"
#include "vortex/selection.hpp"
#include "vortex/specfun.hpp"

namespace vortex::selftest {

struct CheckResult {
  std::string name;
  bool passed;
  double worst;      ///< largest observed deviation
  double tolerance;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::vector<HalfInt> projections(HalfInt j) {
  std::vector<HalfInt> out;
  for (HalfInt m = -j; m <= j; m = m + HalfInt(1)) out.push_back(m);
  return out;
}

}  // namespace detail

inline CheckResult wigner_orthogonality() {
  std::mt19937_64 rng(20170725);
  std::uniform_real_distribution<double> theta(0.0, std::numbers::pi);
  double worst = 0.0;
  for (int twice_j = 1; twice_j <= 5; ++twice_j) {
    const HalfInt j = HalfInt::from_twice(twice_j);
    const auto ms = detail::projections(j);
    for (int s = 0; s < 20; ++s) {
      const double th = theta(rng);
      for (HalfInt m1 : ms) {
        for (HalfInt m2 : ms) {
          double sum = 0.0;
          for (HalfInt mp : ms) sum += specfun::wigner_d(j, m1, mp, th) * specfun::wigner_d(j, m2, mp, th);
          worst = std::max(worst, std::abs(sum - (m1 == m2 ? 1.0 : 0.0)));
        }
      }
    }
  }
  return {"wigner_d orthogonality", worst <= 1e-12, worst, 1e-12};
}

inline CheckResult wigner_symmetry() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> theta(0.0, std::numbers::pi);
  double worst = 0.0;
  for (int twice_j = 1; twice_j <= 5; ++twice_j) {
    const HalfInt j = HalfInt::from_twice(twice_j);
    const auto ms = detail::projections(j);
    for (int s = 0; s < 20; ++s) {
      const double th = theta(rng);
      for (HalfInt m1 : ms) {
        for (HalfInt m2 : ms) {
          const double d = specfun::wigner_d(j, m1, m2, th);
          const double sign = ((m1 - m2).as_int() % 2 == 0) ? 1.0 : -1.0;
          worst = std::max(worst, std::abs(d - sign * specfun::wigner_d(j, m2, m1, th)));
          worst = std::max(worst, std::abs(d - specfun::wigner_d(j, -m2, -m1, th)));
        }
      }
    }
  }
  return {"wigner_d symmetry", worst <= 1e-12, worst, 1e-12};
}

inline CheckResult clebsch_orthonormality() {
  const HalfInt j1(2), j2 = kHalf;
  double worst = 0.0;
  for (HalfInt J : {HalfInt::from_twice(3), HalfInt::from_twice(5)}) {
    for (HalfInt Jp : {HalfInt::from_twice(3), HalfInt::from_twice(5)}) {
      for (HalfInt M : detail::projections(J)) {
        for (HalfInt Mp : detail::projections(Jp)) {
          double sum = 0.0;
          for (HalfInt m1 : detail::projections(j1)) {
            for (HalfInt m2 : detail::projections(j2)) {
              sum += specfun::clebsch_gordan(j1, m1, j2, m2, J, M) * specfun::clebsch_gordan(j1, m1, j2, m2, Jp, Mp);
            }
          }
          worst = std::max(worst, std::abs(sum - ((J == Jp && M == Mp) ? 1.0 : 0.0)));
        }
      }
    }
  }
  return {"clebsch_gordan orthonormality", worst <= 1e-12, worst, 1e-12};
}

inline CheckResult bessel_recurrence() {
  double worst = 0.0;
  for (int n = 0; n <= 6; ++n) {
    for (int i = 1; i <= 500; ++i) {
      const double x = 0.1 * i;
      const double r = specfun::bessel_j(n - 1, x) + specfun::bessel_j(n + 1, x) - 2.0 * n / x * specfun::bessel_j(n, x);
      worst = std::max(worst, std::abs(r));
    }
  }
  return {"bessel_j recurrence", worst < 1e-10, worst, 1e-10};
}

inline CheckResult extended_laguerre_reduces() {
  double worst = 0.0;
  for (int n = 0; n <= 8; ++n) {
    for (int a = 0; a <= 4; ++a) {
      for (double x : {0.0, 0.3, 1.0, 2.5, 6.0}) {
        const double c = specfun::assoc_laguerre(n, a, x);
        const double e = specfun::extended_laguerre(n, a, x);
        worst = std::max(worst, std::abs(e - c) / std::max(1.0, std::abs(c)));
      }
    }
  }
  return {"extended Laguerre == classical Laguerre", worst < 1e-10, worst, 1e-10};
}

inline CheckResult bg_to_bb_limit() {
  beams::BeamConfig bb;
  bb.family = beams::Family::BB;
  double worst = 0.0;
  for (int m = -2; m <= 2; ++m) {
    bb.m_gamma = m;
    beams::BeamConfig bg = bb;
    bg.family = beams::Family::BG;
    bg.w0_um = 1e4;
    for (int i = 0; i <= 50; ++i) {
      const double rho = 0.1 * i;
      const auto a = beams::bb_scalar_mode(bb, rho, 0.3, 0.0, 0.0);
      const auto b = beams::bg_scalar_mode(bg, rho, 0.3, 0.0, 0.0);
      if (std::abs(a) > 0.0) worst = std::max(worst, std::abs(a - b) / std::abs(a));
    }
  }
  return {"BG -> BB for large waist", worst < 1e-6, worst, 1e-6};
}

inline CheckResult flux_nonnegative() {
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(0.05 * i);
  double worst = 0.0;
  for (beams::Family f : {beams::Family::BB, beams::Family::BG, beams::Family::LG, beams::Family::LG_MIX}) {
    for (int m = -3; m <= 3; ++m) {
      for (int lam : {-1, 1}) {
        beams::BeamConfig c;
        c.family = f;
        c.m_gamma = m;
        c.helicity = lam;
        c.w0_um = f == beams::Family::BG ? 10.0 : 4.0;
        c.p = 1;
        const auto prof = beams::flux_profile(c, grid, true);
        for (double v : prof.flux) worst = std::max(worst, -v);
      }
    }
  }
  return {"flux non-negative", worst <= 0.0, worst, 0.0};
}

inline CheckResult linear_polarization_period() {
  beams::BeamConfig c;
  c.family = beams::Family::BB;
  const double scale = c.bessel_norm();
  double worst = 0.0;
  for (HalfInt sz : {-kHalf, kHalf}) {
    const auto tr = amplitudes::reference_transition(sz, 0);
    for (int i = 0; i <= 40; ++i) {
      const double b = 0.25 * i;
      for (double phi : {0.0, 0.4, std::numbers::pi / 4, 1.1, std::numbers::pi / 3, std::numbers::pi / 2}) {
        const double a = amplitudes::linear_polarization_amplitude(tr, 0, c, b, phi, {}).magnitude;
        const double p = amplitudes::linear_polarization_amplitude(tr, 0, c, b, phi + std::numbers::pi, {}).magnitude;
        worst = std::max(worst, std::abs(a - p) / std::max(a, scale));
      }
    }
  }
  return {"linear polarization delta_m=0 pi-periodic in phi_b", worst < 1e-12, worst, 1e-12};
}

/// On-axis amplitude nonzero exactly when m_f = m_i + m_gamma, for every
/// family over the 60 standard channels.
inline CheckResult on_axis_selection_rule() {
  double worst = 0.0;
  bool ok = true;
  const auto cfgs = selection::default_table_configs();
  for (const beams::BeamConfig& base : {cfgs.bb, cfgs.bg, cfgs.lg}) {
    const double scale = amplitudes::bb_amplitude(amplitudes::reference_transition(-kHalf, -1),
                                                   [&] { auto b = cfgs.bb; b.m_gamma = -1; b.helicity = -1; return b; }(),
                                                   0.0, 0.0, {})
                             .magnitude;
    for (const auto& ch : selection::figure_channels()) {
      beams::BeamConfig c = base;
      c.m_gamma = ch.beam.m_gamma;
      c.helicity = ch.beam.helicity;
      const auto tr = amplitudes::reference_transition(ch.s_z, ch.delta_m);
      const double mag = amplitudes::amplitude(tr, c, 0.0, 0.0, {}).magnitude;
      const bool allowed = selection::classify_channel(tr, c.m_gamma, c.helicity) == selection::ChannelClass::on_axis_allowed;
      if (allowed) {
        ok = ok && mag > 1e-14 * scale;
      } else {
        worst = std::max(worst, mag / scale);
      }
    }
  }
  return {"on-axis selection rule (60 channels x 3 families)", ok && worst <= 1e-14, worst, 1e-14};
}

inline std::vector<std::function<CheckResult()>> all_checks() {
  return {wigner_orthogonality, wigner_symmetry, clebsch_orthonormality, bessel_recurrence, extended_laguerre_reduces,
          bg_to_bb_limit,       flux_nonnegative, linear_polarization_period, on_axis_selection_rule};
}

inline std::string describe(const CheckResult& r) {
  return std::string(r.passed ? "PASS" : "FAIL") + "  " + r.name + "  (worst " + detail::fmt(r.worst) + ", tol " +
         detail::fmt(r.tolerance) + ")";
}

}  // namespace vortex::selftest

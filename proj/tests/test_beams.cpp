#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "vortex/beams.hpp"

using namespace vortex;
using namespace vortex::beams;

namespace {

BeamConfig make(Family f, int m_gamma = 0, int helicity = 1) {
  BeamConfig c;
  c.family = f;
  c.m_gamma = m_gamma;
  c.helicity = helicity;
  return c;
}

}  // namespace

TEST(BeamConfig, DerivedWavenumbers) {
  BeamConfig c;
  const double k = c.k();
  EXPECT_NEAR((c.kappa() * c.kappa() + c.kz() * c.kz()) / (k * k), 1.0, 1e-12);
  EXPECT_NEAR(c.kappa(), 2.0 * std::numbers::pi / 0.729 * std::sin(0.095), 1e-14);
  c.m_gamma = 2;
  c.helicity = -1;
  EXPECT_EQ(c.topological_charge(), 3);
}

TEST(BeamConfig, Validation) {
  BeamConfig c;
  c.wavelength_um = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.pitch_rad = std::numbers::pi / 2;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.helicity = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.admixture_eps = 1.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = make(Family::LG);
  c.p = -1;
  EXPECT_THROW(c.validate(), DomainError);
  c = make(Family::BG);
  c.w0_um = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(BesselMode, OnAxisAndZero) {
  auto c = make(Family::BB, 0);
  const cplx v = bb_scalar_mode(c, 0.0, 0.0, 0.0, 0.0);
  EXPECT_NEAR(v.real(), c.bessel_norm(), 1e-15);
  EXPECT_EQ(v.imag(), 0.0);
  c.m_gamma = 1;
  EXPECT_EQ(std::abs(bb_scalar_mode(c, 0.0, 0.3, 0.0, 0.0)), 0.0);
  c.m_gamma = 2;
  EXPECT_LT(std::abs(bb_scalar_mode(c, 5.1356223018406826 / c.kappa(), 0.0, 0.0, 0.0)), 1e-10);
}

TEST(BesselMode, WrongFamily) { EXPECT_THROW(bb_scalar_mode(make(Family::BG), 0, 0, 0, 0), DomainError); }

TEST(BesselGaussMode, GaussianFactor) {
  auto bg = make(Family::BG, 1);
  auto bb = make(Family::BB, 1);
  EXPECT_EQ(bg_scalar_mode(make(Family::BG), 0, 0, 0, 0), bb_scalar_mode(make(Family::BB), 0, 0, 0, 0));
  EXPECT_NEAR(std::abs(bg_scalar_mode(bg, 10.0, 0.2, 0, 0)) / std::abs(bb_scalar_mode(bb, 10.0, 0.2, 0, 0)), std::exp(-1.0), 1e-14);
  EXPECT_NEAR(std::abs(bg_scalar_mode(bg, 5.0, 0.2, 0, 0)) / std::abs(bb_scalar_mode(bb, 5.0, 0.2, 0, 0)), std::exp(-0.25), 1e-14);
}

TEST(BesselGaussMode, LargeWaistLimit) {
  auto bg = make(Family::BG, 2);
  bg.w0_um = 1e4;
  auto bb = make(Family::BB, 2);
  for (double rho = 0.1; rho <= 5.0; rho += 0.1) {
    const cplx a = bb_scalar_mode(bb, rho, 1.0, 0.0, 0.0);
    EXPECT_LT(std::abs(bg_scalar_mode(bg, rho, 1.0, 0.0, 0.0) - a), 1e-6 * std::abs(a));
  }
}

TEST(ScalarModes, AzimuthalPeriodicity) {
  auto bb = make(Family::BB, 3);
  auto lg = make(Family::LG, 3, -1);
  for (double phi : {0.1, 1.7, 4.0}) {
    EXPECT_NEAR(std::abs(bb_scalar_mode(bb, 1.2, phi, 0.3, 0.1) - bb_scalar_mode(bb, 1.2, phi + 2 * std::numbers::pi, 0.3, 0.1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(lg_scalar_mode(lg, 1.2, phi) - lg_scalar_mode(lg, 1.2, phi + 2 * std::numbers::pi)), 0.0, 1e-14);
  }
}

TEST(LaguerreGaussMode, Structure) {
  auto c = make(Family::LG, 2, 1);  // l = 1
  EXPECT_EQ(std::abs(lg_scalar_mode(c, 0.0, 0.0)), 0.0);
  c = make(Family::LG, 1, 1);  // l = 0
  for (double rho : {0.0, 1.0, 3.0}) {
    EXPECT_NEAR(lg_scalar_mode(c, rho, 0.4).real(), std::exp(-rho * rho / 100.0), 1e-15);
  }
  c = make(Family::LG, 2, 1);
  c.p = 1;
  c.w0_um = 4.0;
  EXPECT_GT(lg_scalar_mode(c, 3.9, 0.0).real() * lg_scalar_mode(c, 4.1, 0.0).real(), -1.0);
  EXPECT_LT(lg_scalar_mode(c, 3.9, 0.0).real() * lg_scalar_mode(c, 4.1, 0.0).real(), 0.0);
  EXPECT_NEAR(lg_scalar_mode(c, 4.0, 0.0).real(), 0.0, 1e-15);
}

TEST(LgSpectrum, Coefficients) {
  auto c = make(Family::LG, 2, 1);  // |l| = 1
  c.w0_um = 4.0;
  EXPECT_NEAR(lg_bessel_spectrum(c, 0).coefficient, std::pow(4.0 / std::numbers::sqrt2, 3), 1e-12);
  c = make(Family::LG, 1, 1);  // l = 0
  c.p = 1;
  c.w0_um = 4.0;
  EXPECT_NEAR(lg_bessel_spectrum(c, 1).coefficient, -std::pow(4.0 / std::numbers::sqrt2, 4), 1e-12);
  const auto t = lg_bessel_spectrum(c, 1);
  EXPECT_NEAR(t.radial_weight(0.3), std::pow(0.3, 2.5) * std::exp(-0.09 * 4.0), 1e-15);
  EXPECT_THROW(lg_bessel_spectrum(c, 2), DomainError);
  EXPECT_THROW(lg_bessel_spectrum(c, -1), DomainError);
}

// Superposition integral of Bessel modes with the spectrum weights
// recovers the LG mode, with an overall (-1)^p.
TEST(LgSpectrum, SuperpositionRoundTrip) {
  for (int p = 0; p <= 2; ++p) {
    for (int l = 0; l <= 3; ++l) {
      auto c = make(Family::LG, l + 1, 1);
      c.p = p;
      c.w0_um = 4.0;
      for (double rho = 0.0; rho <= 3.0 * c.w0_um; rho += 0.37) {
        double sum = 0.0;
        for (int j = 0; j <= p; ++j) {
          const auto term = lg_bessel_spectrum(c, j);
          specfun::QuadratureSpec spec;
          spec.rel_tol = 1e-12;
          if (rho > 0) spec.max_panel_width = std::numbers::pi / (2 * rho);
          sum += term.coefficient *
                 specfun::integrate([&](double k) { return term.radial_weight(k) * std::sqrt(k) * oracle::bessel_j(l, k * rho); }, 0.0,
                                    c.k(), spec);
        }
        const double mode = lg_scalar_mode(c, rho, 0.0).real();
        const double sign = p % 2 ? -1.0 : 1.0;
        EXPECT_NEAR(sum, sign * mode, 1e-6 * std::max(std::abs(mode), 1e-3)) << p << " " << l << " " << rho;
      }
    }
  }
}

TEST(LgRadial, OnAxisOnlyForZeroOrder) {
  for (int order = -3; order <= 3; ++order) {
    const double v = lg_bessel_radial(1, 2, order, 4.0, 0.0);
    if (order == 0) EXPECT_NE(v, 0.0);
    else EXPECT_EQ(v, 0.0);
  }
}

TEST(Polarization, Limits) {
  const auto e = polarization_vector(0.0, 0.8, 1);
  const auto eta = polarization_basis(1, 1);
  const cplx ph = std::polar(1.0, -0.8);
  for (int mu = 0; mu < 4; ++mu) EXPECT_NEAR(std::abs(e[mu] - ph * eta[mu]), 0.0, 1e-15);
  const auto side = polarization_vector(std::numbers::pi / 2, 0.3, -1);
  EXPECT_NEAR(side[3].real(), -1.0 / std::numbers::sqrt2, 1e-15);
  EXPECT_THROW(polarization_vector(0.1, 0.0, 2), DomainError);
}

TEST(Polarization, UnitNorm) {
  for (int lam : {-1, 1}) {
    for (double phi : {0.0, 0.9, 2.5, 5.1}) {
      double n = 0.0;
      for (const cplx& z : polarization_vector(0.095, phi, lam)) n += std::norm(z);
      EXPECT_NEAR(n, 1.0, 1e-14);
    }
  }
}

TEST(Flux, BesselOnAxis) {
  auto c = make(Family::BB, 2, 1);
  EXPECT_EQ(flux_profile(c, {0.0, 1.0}, true).flux[0], 0.0);
  c = make(Family::BB, 0, 1);
  const double th = c.pitch_rad;
  const double a2w2 = c.bessel_norm() * c.bessel_norm() * c.omega() * c.omega();
  const double expected = std::cos(th) * a2w2 / 2.0 * 0.5 * std::sin(th) * std::sin(th);
  EXPECT_NEAR(flux_profile(c, {0.0}, true).flux[0], expected, 1e-15 * expected + 1e-300);
}

TEST(Flux, NormalizedAndNonNegative) {
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(0.05 * i);
  for (Family f : {Family::BB, Family::BG, Family::LG, Family::LG_MIX}) {
    auto c = make(f, 2, 1);
    c.w0_um = f == Family::BG ? 10.0 : 4.0;
    const auto prof = flux_profile(c, grid);
    double mx = 0.0;
    for (double v : prof.flux) {
      EXPECT_GE(v, 0.0);
      mx = std::max(mx, v);
    }
    EXPECT_DOUBLE_EQ(mx, 1.0);
  }
}

TEST(Flux, BesselGaussEnvelope) {
  auto bb = make(Family::BB, 1, 1);
  auto bg = make(Family::BG, 1, 1);
  const auto a = flux_profile(bb, {0.5, 3.0, 7.0}, true);
  const auto b = flux_profile(bg, {0.5, 3.0, 7.0}, true);
  for (int i = 0; i < 3; ++i) {
    const double r = a.rho_um[i];
    EXPECT_NEAR(b.flux[i], a.flux[i] * std::exp(-2 * r * r / 100.0), 1e-14 * a.flux[i]);
  }
}

// Bessel and Bessel-Gauss m_gamma = 2 profiles share the inner ring and
// separate further out.
TEST(Flux, FamiliesAgreeNearAxis) {
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(0.05 * i);
  const auto bb = flux_profile(make(Family::BB, 2, 1), grid);
  auto bgc = make(Family::BG, 2, 1);
  const auto bg = flux_profile(bgc, grid);
  double inner = 0.0, outer = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = std::abs(bb.flux[i] - bg.flux[i]);
    if (grid[i] <= 4.0) inner = std::max(inner, d);
    else outer = std::max(outer, d);
  }
  EXPECT_LT(inner, 0.15);
  EXPECT_GT(outer, inner);
}

TEST(Flux, GridValidation) {
  EXPECT_THROW(flux_profile(make(Family::BB), {}), DomainError);
  EXPECT_THROW(flux_profile(make(Family::BB), {1.0, 0.5}), DomainError);
  EXPECT_THROW(flux_profile(make(Family::BB), {-1.0}), DomainError);
}

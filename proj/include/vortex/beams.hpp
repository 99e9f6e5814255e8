#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "vortex/errors.hpp"
#include "vortex/specfun.hpp"

namespace vortex::beams {

using cplx = std::complex<double>;

enum class Family { BB, BG, LG, LG_MIX };

/// How BG amplitudes are evaluated when dispatched through a profile.
enum class BgModel { factorized, full };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::BB: return "BB";
    case Family::BG: return "BG";
    case Family::LG: return "LG";
    case Family::LG_MIX: return "LG_MIX";
  }
  return "?";
}

/// Twisted-light mode parameters. Lengths in micrometres, angles in radians,
/// c = 1 so omega = k.
struct BeamConfig {
  Family family = Family::BB;
  double wavelength_um = 0.729;
  double pitch_rad = 0.095;
  double w0_um = 10.0;
  double w1_um = 6.5;
  int p = 0;
  double mix_ratio = 0.43;
  int m_gamma = 0;
  int helicity = 1;
  double admixture_eps = 0.0;
  BgModel bg_model = BgModel::factorized;

  double k() const { return 2.0 * std::numbers::pi / wavelength_um; }
  double kappa() const { return k() * std::sin(pitch_rad); }
  double kz() const { return k() * std::cos(pitch_rad); }
  double omega() const { return k(); }
  /// Bessel-mode normalisation sqrt(kappa / 2 pi).
  double bessel_norm() const { return std::sqrt(kappa() / (2.0 * std::numbers::pi)); }
  /// m_gamma - Lambda; the OAM in the paraxial limit and the LG vorticity.
  int topological_charge() const { return m_gamma - helicity; }

  void validate() const {
    if (!(wavelength_um > 0.0) || !std::isfinite(wavelength_um)) throw DomainError("BeamConfig: wavelength_um must be > 0");
    if (!(pitch_rad > 0.0 && pitch_rad < std::numbers::pi / 2)) throw DomainError("BeamConfig: pitch_rad must lie in (0, pi/2)");
    if (helicity != 1 && helicity != -1) throw DomainError("BeamConfig: helicity must be +1 or -1");
    if (!(admixture_eps >= 0.0 && admixture_eps < 1.0)) throw DomainError("BeamConfig: admixture_eps must lie in [0, 1)");
    if (family != Family::BB && !(w0_um > 0.0)) throw DomainError("BeamConfig: w0_um must be > 0");
    if (family == Family::LG_MIX && !(w1_um > 0.0)) throw DomainError("BeamConfig: w1_um must be > 0");
    if (family == Family::LG && p < 0) throw DomainError("BeamConfig: p must be >= 0");
  }
};

inline void require_family(const BeamConfig& cfg, Family f, const char* op) {
  if (cfg.family != f) throw DomainError(std::string(op) + ": expected family " + to_string(f) + ", got " + to_string(cfg.family));
}

/// Scalar Bessel mode A e^{i m phi} J_m(kappa rho) e^{i(k_z z - omega t)}.
inline cplx bb_scalar_mode(const BeamConfig& cfg, double rho, double phi, double z, double t) {
  require_family(cfg, Family::BB, "bb_scalar_mode");
  const double radial = cfg.bessel_norm() * specfun::bessel_j(cfg.m_gamma, cfg.kappa() * rho);
  return radial * std::polar(1.0, cfg.m_gamma * phi + cfg.kz() * z - cfg.omega() * t);
}

inline cplx bg_scalar_mode(const BeamConfig& cfg, double rho, double phi, double z, double t) {
  require_family(cfg, Family::BG, "bg_scalar_mode");
  BeamConfig bb = cfg;
  bb.family = Family::BB;
  return bb_scalar_mode(bb, rho, phi, z, t) * std::exp(-rho * rho / (cfg.w0_um * cfg.w0_um));
}

/// LG mode at focus (z = 0) without the overall constant:
/// (rho sqrt2 / w0)^|l| L_p^|l|(2 rho^2/w0^2) e^{-rho^2/w0^2} e^{i |l| phi}, l = m_gamma - Lambda.
inline cplx lg_scalar_mode(const BeamConfig& cfg, double rho, double phi) {
  require_family(cfg, Family::LG, "lg_scalar_mode");
  const int l = std::abs(cfg.topological_charge());
  const double s = rho / cfg.w0_um;
  const double radial = specfun::ipow(std::numbers::sqrt2 * s, l) * specfun::assoc_laguerre(cfg.p, l, 2.0 * s * s) *
                        std::exp(-s * s);
  return radial * std::polar(1.0, l * phi);
}

/// Expansion coefficient of the LG mode in Bessel modes,
///   B_pj = (-1)^j (|l|+p)! / ((p-j)! (|l|+j)! j!) (w0/sqrt2)^{2j+|l|+2}.
inline double lg_expansion_coefficient(int p, int l_abs, int j, double w0) {
  if (j < 0 || j > p) throw DomainError("lg_expansion_coefficient: need 0 <= j <= p");
  const double c = specfun::factorial(l_abs + p) /
                   (specfun::factorial(p - j) * specfun::factorial(l_abs + j) * specfun::factorial(j));
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  return sign * c * std::pow(w0 / std::numbers::sqrt2, 2 * j + l_abs + 2);
}

struct LgSpectralTerm {
  double coefficient;
  /// k_perp^{2j+|l|+1/2} e^{-k_perp^2 w0^2/4}; the remaining sqrt(k_perp)
  /// comes with the Bessel-mode normalisation (its 1/sqrt(2 pi) is left to
  /// the overall LG constant).
  std::function<double(double)> radial_weight;
};

inline LgSpectralTerm lg_bessel_spectrum(const BeamConfig& cfg, int j) {
  require_family(cfg, Family::LG, "lg_bessel_spectrum");
  const int l = std::abs(cfg.topological_charge());
  const double w0 = cfg.w0_um;
  const double power = 2.0 * j + l + 0.5;
  return {lg_expansion_coefficient(cfg.p, l, j, w0),
          [power, w0](double kp) { return std::pow(kp, power) * std::exp(-kp * kp * w0 * w0 / 4.0); }};
}

/// Closed form of
///   sum_j B_pj int_0^inf k^{2j+|l|+1} e^{-k^2 w^2/4} J_order(k b) dk
/// in terms of extended Laguerre functions of b^2/w^2. With order = eta this
/// is the radial factor of the LG photoexcitation amplitude; with
/// order = |l| it is (-1)^p times the LG mode itself.
inline double lg_bessel_radial(int p, int l_abs, int order, double w, double b) {
  if (p < 0 || l_abs < 0) throw DomainError("lg_bessel_radial: p and |l| must be >= 0");
  if (!(w > 0.0) || !(b >= 0.0)) throw DomainError("lg_bessel_radial: need w > 0 and b >= 0");
  const int eta_abs = std::abs(order);
  const double s = b / w;
  const double power = specfun::ipow(s, eta_abs);  // before the polynomial: b = 0 stays exact
  if (power == 0.0) return 0.0;
  const double x = s * s;
  const double sign_eta = (order < 0 && eta_abs % 2 != 0) ? -1.0 : 1.0;  // sgn(eta)^eta, 0^0 = 1
  const double xi = 0.5 * (l_abs - eta_abs);
  const double gauss = std::exp(-x);

  double sum = 0.0;
  for (int j = 0; j <= p; ++j) {
    const double n = j + xi;
    const double c = specfun::factorial(l_abs + p) /
                     (specfun::factorial(p - j) * specfun::factorial(l_abs + j) * specfun::factorial(j));
    const double sign_j = (j % 2 == 0) ? 1.0 : -1.0;
    const double coeff = sign_eta * sign_j * c * specfun::roman_factorial(n) * std::pow(2.0, j + 0.5 * l_abs);
    sum += coeff * specfun::extended_laguerre(n, eta_abs, x);
  }
  return sum * power * gauss;
}

using FourVector = std::array<cplx, 4>;

/// Basis eta_{+-Lambda} = (0, -+Lambda, -i, 0)/sqrt2, eta_0 = (0,0,0,1).
inline FourVector polarization_basis(int sign_times_helicity, int helicity) {
  const double r = 1.0 / std::numbers::sqrt2;
  const int s = sign_times_helicity == helicity ? 1 : -1;  // +Lambda or -Lambda
  return {cplx{0.0}, cplx{-s * helicity * r}, cplx{0.0, -r}, cplx{0.0}};
}

/// Plane-wave polarization 4-vector for helicity Lambda along (theta_k, phi_k).
inline FourVector polarization_vector(double theta_k, double phi_k, int helicity) {
  if (helicity != 1 && helicity != -1) throw DomainError("polarization_vector: helicity must be +1 or -1");
  const FourVector plus = polarization_basis(helicity, helicity);
  const FourVector minus = polarization_basis(-helicity, helicity);
  const double c2 = std::pow(std::cos(0.5 * theta_k), 2);
  const double s2 = std::pow(std::sin(0.5 * theta_k), 2);
  const cplx a = std::polar(c2, -helicity * phi_k);
  const cplx b = std::polar(s2, helicity * phi_k);
  FourVector eps{};
  for (int mu = 0; mu < 4; ++mu) eps[mu] = a * plus[mu] + b * minus[mu];
  eps[3] += helicity / std::numbers::sqrt2 * std::sin(theta_k);
  return eps;
}

struct FluxProfile {
  std::vector<double> rho_um;
  std::vector<double> flux;
};

namespace detail {
// Radial factor that replaces J_n(kappa rho) for each family.
inline double radial_factor(const BeamConfig& cfg, int order, double rho) {
  switch (cfg.family) {
    case Family::BB: return specfun::bessel_j(order, cfg.kappa() * rho);
    case Family::BG:
      return specfun::bessel_j(order, cfg.kappa() * rho) * std::exp(-rho * rho / (cfg.w0_um * cfg.w0_um));
    case Family::LG: return lg_bessel_radial(cfg.p, std::abs(cfg.topological_charge()), order, cfg.w0_um, rho);
    case Family::LG_MIX: {
      const int l = std::abs(cfg.topological_charge());
      return lg_bessel_radial(0, l, order, cfg.w0_um, rho) + cfg.mix_ratio * lg_bessel_radial(1, l, order, cfg.w1_um, rho);
    }
  }
  return 0.0;
}
}  // namespace detail

/// Local energy flux cos(theta)(|E|^2+|B|^2)/4 on a radial grid: the three
/// helicity-weighted Bessel terms, each Bessel factor replaced by the
/// family's radial profile. Normalised to a maximum of 1 unless raw.
inline FluxProfile flux_profile(const BeamConfig& cfg, const std::vector<double>& rho_grid, bool raw = false) {
  cfg.validate();
  if (rho_grid.empty()) throw DomainError("flux_profile: empty rho grid");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] >= 0.0) || (i > 0 && !(rho_grid[i] > rho_grid[i - 1]))) {
      throw DomainError("flux_profile: rho grid must be non-negative and strictly increasing");
    }
  }
  const double th = cfg.pitch_rad;
  const double w_minus = std::pow(std::cos(0.5 * th), 4);
  const double w_plus = std::pow(std::sin(0.5 * th), 4);
  const double w_zero = 0.5 * std::pow(std::sin(th), 2);
  const double a2w2 = cfg.bessel_norm() * cfg.bessel_norm() * cfg.omega() * cfg.omega();
  const double prefactor = std::cos(th) * a2w2 / 2.0;
  const int m = cfg.m_gamma;
  const int lam = cfg.helicity;

  FluxProfile out{rho_grid, std::vector<double>(rho_grid.size())};
  double peak = 0.0;
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    const double rho = rho_grid[i];
    const double rm = detail::radial_factor(cfg, m - lam, rho);
    const double rp = detail::radial_factor(cfg, m + lam, rho);
    const double r0 = detail::radial_factor(cfg, m, rho);
    out.flux[i] = prefactor * (w_minus * rm * rm + w_plus * rp * rp + w_zero * r0 * r0);
    peak = std::max(peak, out.flux[i]);
  }
  if (!raw && peak > 0.0) {
    for (double& f : out.flux) f /= peak;
  }
  return out;
}

}  // namespace vortex::beams

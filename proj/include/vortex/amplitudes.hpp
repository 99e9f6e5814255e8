#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <string>
#include <vector>

#include "vortex/beams.hpp"
#include "vortex/errors.hpp"
#include "vortex/halfint.hpp"
#include "vortex/specfun.hpp"

namespace vortex::amplitudes {

using beams::BeamConfig;
using beams::BgModel;
using beams::cplx;
using beams::Family;

struct AtomicLevel {
  int n = 1;
  int l = 0;
  HalfInt j = kHalf;
  HalfInt m = kHalf;

  void validate() const {
    if (l < 0) throw DomainError("AtomicLevel: l must be >= 0");
    if (j != HalfInt(l) - kHalf && j != HalfInt(l) + kHalf) throw DomainError("AtomicLevel: j must be l +- 1/2");
    if (j.twice() < 0) throw DomainError("AtomicLevel: j must be >= 0");
    if (!valid_projection(j, m)) throw DomainError("AtomicLevel: invalid projection m = " + m.str() + " for j = " + j.str());
  }
};

struct Transition {
  AtomicLevel initial;
  AtomicLevel final;

  void validate() const {
    initial.validate();
    final.validate();
    if (initial.l != 0) throw DomainError("Transition: initial state must be an orbital S state");
  }
  /// m_f - m_i; with the electron spin untouched this is the orbital projection m_lf.
  int delta_m() const { return (final.m - initial.m).as_int(); }
};

/// 4S_{1/2}(m_i = s_z) -> 3D_{5/2}(m_f = s_z + delta_m).
inline Transition reference_transition(HalfInt s_z, int delta_m) {
  if (s_z != kHalf && s_z != -kHalf) throw DomainError("reference_transition: s_z must be +-1/2");
  Transition tr{{4, 0, kHalf, s_z}, {3, 2, HalfInt::from_twice(5), s_z + HalfInt(delta_m)}};
  tr.validate();
  return tr;
}

struct AmplitudeSample {
  double b = 0.0;
  double phi_b = 0.0;
  cplx value{};
  double magnitude = 0.0;
};

struct NormalizationContext {
  double pw_element = 1.0;
  double global_scale = 1.0;

  void validate() const {
    if (!(pw_element > 0.0) || !std::isfinite(pw_element)) throw DomainError("NormalizationContext: pw_element must be > 0");
    if (!std::isfinite(global_scale)) throw DomainError("NormalizationContext: global_scale must be finite");
  }
  double scale() const { return pw_element * global_scale; }
};

struct AmplitudeProfile {
  Transition transition;
  BeamConfig config;
  std::vector<AmplitudeSample> samples;
};

/// theta(k_perp) inside the BG integral.
enum class PitchModel {
  spectral,  ///< arcsin(k_perp / k), monochromatic cone
  nominal,   ///< the configured pitch angle for every k_perp
};

struct AdmixtureMode {
  enum class Kind { quadrature, coherent };
  Kind kind = Kind::quadrature;
  double rel_phase = 0.0;

  static AdmixtureMode quadrature() { return {}; }
  static AdmixtureMode coherent(double delta) { return {Kind::coherent, delta}; }
};

/// Quadrature settings with VORTEX_QUAD_TOL applied to rel_tol when set.
inline specfun::QuadratureSpec default_quadrature_spec() {
  specfun::QuadratureSpec spec;
  if (const char* env = std::getenv("VORTEX_QUAD_TOL"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const double tol = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(tol > 0.0) || !std::isfinite(tol)) {
      throw DomainError(std::string("VORTEX_QUAD_TOL: expected a positive number, got '") + env + "'");
    }
    spec.rel_tol = tol;
  }
  return spec;
}

struct EvalOptions {
  AdmixtureMode admixture = AdmixtureMode::quadrature();
  PitchModel pitch = PitchModel::spectral;
  specfun::QuadratureSpec quadrature = default_quadrature_spec();
};

namespace detail {

inline cplx i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

inline void check_inputs(const Transition& tr, const BeamConfig& cfg, double b, const NormalizationContext& ctx) {
  tr.validate();
  cfg.validate();
  ctx.validate();
  if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("amplitude: impact parameter b must be finite and >= 0");
}

/// i^{m_i - m_f} e^{i(m_gamma + m_i - m_f) phi_b}
inline cplx channel_phase(const Transition& tr, int m_gamma, double phi_b) {
  const int dm = tr.delta_m();
  return i_power(-dm) * std::polar(1.0, (m_gamma - dm) * phi_b);
}

inline double clebsch(const Transition& tr) {
  const HalfInt m_lf(tr.delta_m());
  return specfun::clebsch_gordan(tr.final.l, m_lf, kHalf, tr.initial.m, tr.final.j, tr.final.m);
}

inline double wigner(const Transition& tr, int helicity, double theta) {
  return specfun::wigner_d(tr.final.l, tr.delta_m(), helicity, theta);
}

inline AmplitudeSample make(double b, double phi_b, cplx value) { return {b, phi_b, value, std::abs(value)}; }

inline bool projection_allowed(const Transition& tr) { return std::abs(tr.delta_m()) <= tr.final.l; }

}  // namespace detail

inline AmplitudeSample bb_amplitude(const Transition& tr, const BeamConfig& cfg, double b, double phi_b,
                                    const NormalizationContext& ctx) {
  beams::require_family(cfg, Family::BB, "bb_amplitude");
  detail::check_inputs(tr, cfg, b, ctx);
  if (!detail::projection_allowed(tr)) return detail::make(b, phi_b, 0.0);
  const int order = tr.delta_m() - cfg.m_gamma;
  const double real_part = ctx.scale() * cfg.bessel_norm() * specfun::bessel_j(order, cfg.kappa() * b) *
                           detail::clebsch(tr) * detail::wigner(tr, cfg.helicity, cfg.pitch_rad);
  return detail::make(b, phi_b, real_part * detail::channel_phase(tr, cfg.m_gamma, phi_b));
}

/// Large-waist condition under which the Gaussian-times-Bessel form holds.
inline bool bg_factorization_valid(const BeamConfig& cfg) { return cfg.w0_um >= 5.0 * cfg.wavelength_um; }

inline AmplitudeSample bg_amplitude_factorized(const Transition& tr, const BeamConfig& cfg, double b, double phi_b,
                                               const NormalizationContext& ctx) {
  beams::require_family(cfg, Family::BG, "bg_amplitude_factorized");
  cfg.validate();
  BeamConfig bb = cfg;
  bb.family = Family::BB;
  AmplitudeSample s = bb_amplitude(tr, bb, b, phi_b, ctx);
  const double g = std::exp(-b * b / (cfg.w0_um * cfg.w0_um));
  return detail::make(b, phi_b, s.value * g);
}

/// Radial k_perp integral of the BG amplitude, normalised so that it tends
/// to J_n(kappa b) d(theta_k) for w0 -> infinity.
inline double bg_radial_integral(const Transition& tr, const BeamConfig& cfg, double b, PitchModel pitch,
                                 const specfun::QuadratureSpec& quad) {
  const int order = tr.delta_m() - cfg.m_gamma;
  if (b == 0.0 && order != 0) return 0.0;
  const double k = cfg.k();
  const double kappa = cfg.kappa();
  const double w = cfg.w0_um;
  const int i_order = std::abs(cfg.m_gamma);
  const int lf = tr.final.l;
  const int m_lf = tr.delta_m();
  const int lam = cfg.helicity;
  const double nominal_d = specfun::wigner_d(lf, m_lf, lam, cfg.pitch_rad);

  auto envelope = [=](double kp) {
    const double z = 0.5 * w * w * kappa * kp;
    return kp * specfun::bessel_i_scaled(i_order, z) * std::exp(-0.25 * w * w * (kp - kappa) * (kp - kappa));
  };
  auto integrand = [=](double kp) {
    const double theta = pitch == PitchModel::spectral ? std::asin(std::min(kp / k, 1.0)) : cfg.pitch_rad;
    const double d = pitch == PitchModel::spectral ? specfun::wigner_d(lf, m_lf, lam, theta) : nominal_d;
    return envelope(kp) * d * specfun::bessel_j(order, kp * b);
  };

  constexpr double kGaussReach = 14.2;  // exp(-reach^2/4) < e^{-50}
  const double lo = std::max(0.0, kappa - kGaussReach / w);
  const double hi = std::min(k, kappa + kGaussReach / w);
  specfun::QuadratureSpec spec = quad;
  if (b > 0.0) {
    const double width = std::numbers::pi / (2.0 * b);
    spec.max_panel_width = spec.max_panel_width > 0.0 ? std::min(spec.max_panel_width, width) : width;
  }
  const specfun::QuadratureResult r = specfun::integrate_detailed(integrand, lo, hi, spec);

  if (hi == k) {
    // evanescent side: |d| <= 1 and |J| <= 1 bound the missing piece
    const double width = spec.max_panel_width > 0.0 ? spec.max_panel_width : (hi - lo);
    const double tail = specfun::integrate(envelope, k, k + width, quad);
    if (tail > quad.rel_tol * std::abs(r.value) + quad.abs_tol) {
      throw QuadratureError("bg_amplitude_full: evanescent tail beyond k_perp = k is not negligible", r.value, tail);
    }
  }
  return 0.5 * w * w * r.value;
}

inline AmplitudeSample bg_amplitude_full(const Transition& tr, const BeamConfig& cfg, double b,
                                         const NormalizationContext& ctx, double phi_b = 0.0,
                                         PitchModel pitch = PitchModel::spectral,
                                         const specfun::QuadratureSpec& quad = default_quadrature_spec()) {
  beams::require_family(cfg, Family::BG, "bg_amplitude_full");
  detail::check_inputs(tr, cfg, b, ctx);
  if (!detail::projection_allowed(tr)) return detail::make(b, phi_b, 0.0);
  const double radial = bg_radial_integral(tr, cfg, b, pitch, quad);
  const double real_part = ctx.scale() * cfg.bessel_norm() * radial * detail::clebsch(tr);
  return detail::make(b, phi_b, real_part * detail::channel_phase(tr, cfg.m_gamma, phi_b));
}

inline double lg_radial(const Transition& tr, const BeamConfig& cfg, double b) {
  const int order = tr.delta_m() - cfg.m_gamma;
  const int l = std::abs(cfg.topological_charge());
  if (cfg.family == Family::LG) return beams::lg_bessel_radial(cfg.p, l, order, cfg.w0_um, b);
  return beams::lg_bessel_radial(0, l, order, cfg.w0_um, b) +
         cfg.mix_ratio * beams::lg_bessel_radial(1, l, order, cfg.w1_um, b);
}

inline AmplitudeSample lg_amplitude(const Transition& tr, const BeamConfig& cfg, double b, const NormalizationContext& ctx,
                                    double phi_b = 0.0) {
  if (cfg.family != Family::LG && cfg.family != Family::LG_MIX) {
    throw DomainError("lg_amplitude: expected family LG or LG_MIX, got " + beams::to_string(cfg.family));
  }
  detail::check_inputs(tr, cfg, b, ctx);
  if (!detail::projection_allowed(tr)) return detail::make(b, phi_b, 0.0);
  const double real_part = ctx.scale() * cfg.bessel_norm() * lg_radial(tr, cfg, b) * detail::clebsch(tr) *
                           detail::wigner(tr, cfg.helicity, cfg.pitch_rad);
  return detail::make(b, phi_b, real_part * detail::channel_phase(tr, cfg.m_gamma, phi_b));
}

/// LG amplitude with the k_perp integral of the Bessel superposition done
/// numerically on [0, k]; reference for the closed form.
inline AmplitudeSample lg_amplitude_quadrature(const Transition& tr, const BeamConfig& cfg, double b,
                                               const NormalizationContext& ctx, double phi_b = 0.0,
                                               const specfun::QuadratureSpec& quad = default_quadrature_spec()) {
  if (cfg.family != Family::LG && cfg.family != Family::LG_MIX) {
    throw DomainError("lg_amplitude_quadrature: expected family LG or LG_MIX");
  }
  detail::check_inputs(tr, cfg, b, ctx);
  if (!detail::projection_allowed(tr)) return detail::make(b, phi_b, 0.0);
  const int order = tr.delta_m() - cfg.m_gamma;
  const int l = std::abs(cfg.topological_charge());
  specfun::QuadratureSpec spec = quad;
  if (b > 0.0) spec.max_panel_width = std::numbers::pi / (2.0 * b);

  auto mode = [&](int p, double w) {
    double sum = 0.0;
    for (int j = 0; j <= p; ++j) {
      const double coeff = beams::lg_expansion_coefficient(p, l, j, w);
      auto f = [=](double kp) {
        return std::pow(kp, 2 * j + l + 1) * std::exp(-0.25 * kp * kp * w * w) * specfun::bessel_j(order, kp * b);
      };
      sum += coeff * specfun::integrate(f, 0.0, cfg.k(), spec);
    }
    return sum;
  };
  const double radial = cfg.family == Family::LG ? mode(cfg.p, cfg.w0_um)
                                                 : mode(0, cfg.w0_um) + cfg.mix_ratio * mode(1, cfg.w1_um);
  const double real_part = ctx.scale() * cfg.bessel_norm() * radial * detail::clebsch(tr) *
                           detail::wigner(tr, cfg.helicity, cfg.pitch_rad);
  return detail::make(b, phi_b, real_part * detail::channel_phase(tr, cfg.m_gamma, phi_b));
}

/// Pure-helicity amplitude for any family; BG follows cfg.bg_model.
inline AmplitudeSample single_helicity_amplitude(const Transition& tr, const BeamConfig& cfg, double b, double phi_b,
                                                 const NormalizationContext& ctx, const EvalOptions& opt = {}) {
  switch (cfg.family) {
    case Family::BB: return bb_amplitude(tr, cfg, b, phi_b, ctx);
    case Family::BG:
      return cfg.bg_model == BgModel::full ? bg_amplitude_full(tr, cfg, b, ctx, phi_b, opt.pitch, opt.quadrature)
                                           : bg_amplitude_factorized(tr, cfg, b, phi_b, ctx);
    case Family::LG:
    case Family::LG_MIX: return lg_amplitude(tr, cfg, b, ctx, phi_b);
  }
  throw DomainError("amplitude: unknown beam family");
}

/// Same topological charge, opposite helicity.
inline BeamConfig opposite_helicity_companion(const BeamConfig& cfg) {
  BeamConfig other = cfg;
  other.helicity = -cfg.helicity;
  other.m_gamma = cfg.m_gamma - 2 * cfg.helicity;
  other.admixture_eps = 0.0;
  return other;
}

/// In quadrature mode the returned value keeps the phase of the main
/// helicity component (or is real when that component vanishes).
inline AmplitudeSample mixed_helicity_amplitude(const Transition& tr, const BeamConfig& cfg, double b, double phi_b,
                                                const NormalizationContext& ctx,
                                                AdmixtureMode mode = AdmixtureMode::quadrature(),
                                                const EvalOptions& opt = {}) {
  cfg.validate();
  const double eps = cfg.admixture_eps;
  BeamConfig main = cfg;
  main.admixture_eps = 0.0;
  const AmplitudeSample m = single_helicity_amplitude(tr, main, b, phi_b, ctx, opt);
  if (eps == 0.0) return m;
  const AmplitudeSample c = single_helicity_amplitude(tr, opposite_helicity_companion(cfg), b, phi_b, ctx, opt);
  const double keep = std::sqrt(1.0 - eps * eps);
  if (mode.kind == AdmixtureMode::Kind::coherent) {
    return detail::make(b, phi_b, keep * m.value + eps * std::polar(1.0, mode.rel_phase) * c.value);
  }
  const double mag = std::hypot(keep * m.magnitude, eps * c.magnitude);
  const cplx phase = m.magnitude > 0.0 ? m.value / m.magnitude : cplx{1.0, 0.0};
  return detail::make(b, phi_b, mag * phase);
}

/// Equal-weight coherent sum of the Lambda = +1 (m_gamma = m_bar + 1) and
/// Lambda = -1 (m_gamma = m_bar - 1) components.
inline AmplitudeSample linear_polarization_amplitude(const Transition& tr, int m_bar, const BeamConfig& cfg, double b,
                                                     double phi_b, const NormalizationContext& ctx,
                                                     const EvalOptions& opt = {}) {
  BeamConfig plus = cfg;
  plus.helicity = 1;
  plus.m_gamma = m_bar + 1;
  plus.admixture_eps = 0.0;
  BeamConfig minus = plus;
  minus.helicity = -1;
  minus.m_gamma = m_bar - 1;
  const AmplitudeSample a = single_helicity_amplitude(tr, plus, b, phi_b, ctx, opt);
  const AmplitudeSample c = single_helicity_amplitude(tr, minus, b, phi_b, ctx, opt);
  return detail::make(b, phi_b, (a.value + c.value) / std::numbers::sqrt2);
}

inline AmplitudeSample amplitude(const Transition& tr, const BeamConfig& cfg, double b, double phi_b,
                                 const NormalizationContext& ctx, const EvalOptions& opt = {}) {
  return mixed_helicity_amplitude(tr, cfg, b, phi_b, ctx, opt.admixture, opt);
}

inline void validate_grid(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw DomainError(std::string(what) + ": empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) throw DomainError(std::string(what) + ": grid values must be finite and >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError(std::string(what) + ": grid must be strictly increasing");
  }
}

inline AmplitudeProfile profile(const Transition& tr, const BeamConfig& cfg, const std::vector<double>& b_grid,
                                double phi_b, const NormalizationContext& ctx, const EvalOptions& opt = {}) {
  validate_grid(b_grid, "profile");
  AmplitudeProfile out{tr, cfg, {}};
  out.samples.reserve(b_grid.size());
  for (double b : b_grid) out.samples.push_back(amplitude(tr, cfg, b, phi_b, ctx, opt));
  return out;
}

}  // namespace vortex::amplitudes

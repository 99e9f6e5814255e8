#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vortex/amplitudes.hpp"
#include "vortex/beams.hpp"
#include "vortex/errors.hpp"
#include "vortex/halfint.hpp"
#include "vortex/specfun.hpp"

namespace vortex::selection {

using amplitudes::NormalizationContext;
using amplitudes::Transition;
using beams::BeamConfig;
using beams::Family;

struct PrenumbraQuery {
  HalfInt spin_sz = -kHalf;
  double wavelength_um = 0.729;
  double theta_k = 0.095;
  Family family = Family::BB;
};

namespace detail {

struct PrenumbraWeights {
  double c1, c2;
};

inline PrenumbraWeights prenumbra_weights(HalfInt s_z) {
  if (s_z == -kHalf) return {1.0, std::sqrt(4.0 / 5.0)};
  if (s_z == kHalf) return {std::sqrt(1.0 / 5.0), std::sqrt(2.0 / 5.0)};
  throw DomainError("prenumbra: s_z must be +-1/2");
}

}  // namespace detail

/// Smallest b where the m_gamma = -2 beam drives Delta m = -2 and Delta m = -1
/// equally strongly.
inline double prenumbra_radius(const PrenumbraQuery& q) {
  if (q.family != Family::BB) throw DomainError("prenumbra_radius: only BB modes are supported");
  if (!(q.wavelength_um > 0.0)) throw DomainError("prenumbra_radius: wavelength must be > 0");
  if (!(q.theta_k > 0.0 && q.theta_k < std::numbers::pi / 2)) throw DomainError("prenumbra_radius: theta_k must lie in (0, pi/2)");
  const auto [c1, c2] = detail::prenumbra_weights(q.spin_sz);
  const double kappa = 2.0 * std::numbers::pi / q.wavelength_um * std::sin(q.theta_k);
  const double d21 = std::abs(specfun::wigner_d(2, 2, 1, q.theta_k));
  const double d11 = std::abs(specfun::wigner_d(2, 1, 1, q.theta_k));
  auto f = [&](double b) {
    return std::abs(specfun::bessel_j(0, kappa * b)) * d21 * c1 - std::abs(specfun::bessel_j(1, kappa * b)) * d11 * c2;
  };
  double lo = 0.0;
  double hi = specfun::bessel_j_zero(0, 1) / kappa;
  double flo = f(lo);
  const double fhi = f(hi);
  if (!(flo > 0.0 && fhi < 0.0)) throw NumericError("prenumbra_radius: no sign change on (0, j01/kappa)");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm > 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// theta_k -> 0 limit, 2 c1 / (c2 k).
inline double prenumbra_small_angle(HalfInt s_z, double wavelength_um) {
  if (!(wavelength_um > 0.0)) throw DomainError("prenumbra_small_angle: wavelength must be > 0");
  const auto [c1, c2] = detail::prenumbra_weights(s_z);
  return wavelength_um * c1 / (std::numbers::pi * c2);
}

enum class ChannelClass { on_axis_allowed, off_axis_only, forbidden };

inline std::string to_string(ChannelClass c) {
  switch (c) {
    case ChannelClass::on_axis_allowed: return "on_axis_allowed";
    case ChannelClass::off_axis_only: return "off_axis_only";
    case ChannelClass::forbidden: return "forbidden";
  }
  return "?";
}

inline ChannelClass classify_channel(const Transition& tr, int m_gamma, int helicity) {
  if (helicity != 1 && helicity != -1) throw DomainError("classify_channel: helicity must be +-1");
  const int dm = tr.delta_m();
  if (std::abs(dm) > tr.final.l) return ChannelClass::forbidden;
  if (dm == m_gamma) return ChannelClass::on_axis_allowed;
  return ChannelClass::off_axis_only;
}

/// Beam setting of one table row: m_gamma = delta_m at b = 0.
struct BeamSetting {
  int m_gamma;
  int helicity;
};

inline const std::vector<BeamSetting>& table_beam_settings() {
  static const std::vector<BeamSetting> s = {{-2, -1}, {-1, -1}, {0, -1}, {0, 1}, {1, 1}, {2, 1}};
  return s;
}

struct Channel {
  HalfInt s_z;
  BeamSetting beam;
  int delta_m;
};

/// Two spins x six beam settings x five Delta m.
inline std::vector<Channel> figure_channels() {
  std::vector<Channel> out;
  for (HalfInt sz : {-kHalf, kHalf}) {
    for (const BeamSetting& bs : table_beam_settings()) {
      for (int dm = -2; dm <= 2; ++dm) out.push_back({sz, bs, dm});
    }
  }
  return out;
}

struct Measurement {
  double value;
  double err;
};

/// Zero-impact-parameter Rabi frequencies (kHz/sqrt(uW)) in table row order.
inline const std::vector<Measurement>& measured_peaks(HalfInt s_z) {
  static const std::vector<Measurement> minus = {{2.92, 0.08}, {31.21, 0.87}, {2.78, 0.08},
                                                 {2.78, 0.07}, {19.22, 0.62}, {1.26, 0.04}};
  static const std::vector<Measurement> plus = {{1.33, 0.04}, {23.89, 0.66}, {2.87, 0.08},
                                                {2.61, 0.08}, {34.08, 0.92}, {2.77, 0.08}};
  if (s_z == -kHalf) return minus;
  if (s_z == kHalf) return plus;
  throw DomainError("measured_peaks: s_z must be +-1/2");
}

struct PeakRow {
  int delta_m;
  int m_gamma;
  int helicity;
  double bb;
  double bg;
  double lg;
  std::optional<Measurement> measured;

  double predicted(Family f) const {
    switch (f) {
      case Family::BB: return bb;
      case Family::BG: return bg;
      default: return lg;
    }
  }
};

struct PeakTable {
  HalfInt s_z;
  int normalization_delta_m;
  std::vector<PeakRow> rows;
};

struct TableConfigs {
  BeamConfig bb;
  BeamConfig bg;
  BeamConfig lg;
};

/// BB at theta_k = 0.095; BG with w0 = 10 um through the full integral;
/// LG as the p = 0 / p = 1 mixture (4.0 um, 6.5 um, 0.43).
inline TableConfigs default_table_configs() {
  TableConfigs c;
  c.bb.family = Family::BB;
  c.bg.family = Family::BG;
  c.bg.w0_um = 10.0;
  c.bg.bg_model = beams::BgModel::full;
  c.lg.family = Family::LG_MIX;
  c.lg.w0_um = 4.0;
  c.lg.w1_um = 6.5;
  c.lg.mix_ratio = 0.43;
  return c;
}

/// Row list defaults to the six standard settings with measured values.
inline PeakTable peak_table(HalfInt s_z, const NormalizationContext& ctx, const TableConfigs& cfgs = default_table_configs(),
                            std::vector<BeamSetting> settings = table_beam_settings(),
                            const amplitudes::EvalOptions& opt = {}) {
  ctx.validate();
  const int norm_dm = s_z == -kHalf ? -2 : (s_z == kHalf ? 2 : 0);
  if (norm_dm == 0) throw DomainError("peak_table: s_z must be +-1/2");
  const bool standard = settings.size() == table_beam_settings().size() &&
                        std::equal(settings.begin(), settings.end(), table_beam_settings().begin(),
                                   [](const BeamSetting& a, const BeamSetting& b) {
                                     return a.m_gamma == b.m_gamma && a.helicity == b.helicity;
                                   });

  PeakTable table{s_z, norm_dm, {}};
  std::optional<std::size_t> norm_row;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const BeamSetting& bs = settings[i];
    const Transition tr = amplitudes::reference_transition(s_z, bs.m_gamma);
    auto eval = [&](BeamConfig cfg) {
      cfg.m_gamma = bs.m_gamma;
      cfg.helicity = bs.helicity;
      return amplitudes::amplitude(tr, cfg, 0.0, 0.0, ctx, opt).magnitude;
    };
    PeakRow row{bs.m_gamma, bs.m_gamma, bs.helicity, eval(cfgs.bb), eval(cfgs.bg), eval(cfgs.lg), std::nullopt};
    if (standard) row.measured = measured_peaks(s_z)[i];
    if (bs.m_gamma == norm_dm && !norm_row) norm_row = i;
    table.rows.push_back(row);
  }
  if (!norm_row) throw DomainError("peak_table: normalization row Delta m = " + std::to_string(norm_dm) + " missing");

  const PeakRow ref = table.rows[*norm_row];
  const double target = measured_peaks(s_z)[s_z == -kHalf ? 0 : 5].value;
  if (!(ref.bb > 0.0 && ref.bg > 0.0 && ref.lg > 0.0)) throw NumericError("peak_table: normalization row evaluates to zero");
  for (PeakRow& r : table.rows) {
    r.bb *= target / ref.bb;
    r.bg *= target / ref.bg;
    r.lg *= target / ref.lg;
  }
  return table;
}

}  // namespace vortex::selection

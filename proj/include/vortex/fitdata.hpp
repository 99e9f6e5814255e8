#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "vortex/amplitudes.hpp"
#include "vortex/beams.hpp"
#include "vortex/errors.hpp"
#include "vortex/halfint.hpp"
#include "vortex/specfun.hpp"

namespace vortex::fitdata {

using amplitudes::NormalizationContext;
using beams::BeamConfig;
using beams::Family;

/// Calibration or fit could not be carried out on the given data.
class FitError : public NumericError {
 public:
  using NumericError::NumericError;
};

enum class ValueKind { prob, rabi };

/// One measured sample. value holds an excitation probability or a Rabi
/// frequency depending on kind; err_lo/err_hi are in the same units.
struct ScanPoint {
  double b_um = 0.0;
  double value = 0.0;
  double err_lo = 0.0;
  double err_hi = 0.0;
  ValueKind kind = ValueKind::rabi;
  std::optional<double> power_uW;
  int n_trials = 100;
  double t_ms = 0.0;
  int channel_dm = 0;
  int m_gamma = 0;
  int helicity = 1;
  HalfInt s_z = -kHalf;

  void validate() const {
    if (!std::isfinite(b_um) || b_um < 0.0) throw DomainError("ScanPoint: b_um must be finite and >= 0");
    if (!std::isfinite(value)) throw DomainError("ScanPoint: value must be finite");
    if (kind == ValueKind::prob && !(value >= 0.0 && value <= 1.0)) throw DomainError("ScanPoint: probability outside [0, 1]");
    if (!(err_lo >= 0.0) || !(err_hi >= 0.0)) throw DomainError("ScanPoint: errors must be >= 0");
    if (n_trials < 1) throw DomainError("ScanPoint: n_trials must be >= 1");
    if (power_uW && !(*power_uW > 0.0)) throw DomainError("ScanPoint: power_uW must be > 0");
    if (helicity != 1 && helicity != -1) throw DomainError("ScanPoint: helicity must be +-1");
    if (s_z != kHalf && s_z != -kHalf) throw DomainError("ScanPoint: s_z must be +-1/2");
  }
  double sigma() const { return 0.5 * (err_lo + err_hi); }
};

struct ScanDataset {
  std::vector<ScanPoint> points;
};

struct Interval {
  double lo;
  double hi;
};

/// One-sigma two-sided coverage.
inline constexpr double kOneSigma = 0.682689492137085897;

/// Exact binomial (Clopper-Pearson) interval for the proportion p observed
/// in n trials.
inline Interval clopper_pearson(double p, int n, double confidence = kOneSigma) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("clopper_pearson: p must lie in [0, 1]");
  if (n < 1) throw DomainError("clopper_pearson: n must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("clopper_pearson: confidence must lie in (0, 1)");
  const double x = std::round(p * n);
  const double alpha = 1.0 - confidence;
  const double lo = x <= 0.0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1.0, alpha / 2.0);
  const double hi = x >= n ? 1.0 : boost::math::ibeta_inv(x + 1.0, n - x, 1.0 - alpha / 2.0);
  return {std::min(lo, p), std::max(hi, p)};
}

struct RabiEstimate {
  double rabi;
  double err_lo;
  double err_hi;
};

/// Inverts P = (1 - cos(Omega t)) / 2 on Omega t in [0, pi]. Omega is an
/// angular frequency in rad per unit of t.
inline RabiEstimate probability_to_rabi(double p, double t, int n_trials) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability_to_rabi: p must lie in [0, 1]");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("probability_to_rabi: t must be > 0");
  auto invert = [t](double q) { return std::acos(std::clamp(1.0 - 2.0 * q, -1.0, 1.0)) / t; };
  const Interval ci = clopper_pearson(p, n_trials);
  const double omega = invert(p);
  return {omega, omega - invert(ci.lo), invert(ci.hi) - omega};
}

/// Converts probability points to Rabi frequencies; rabi points pass through.
inline ScanPoint as_rabi(const ScanPoint& pt) {
  pt.validate();
  if (pt.kind == ValueKind::rabi) return pt;
  const RabiEstimate r = probability_to_rabi(pt.value, pt.t_ms, pt.n_trials);
  ScanPoint out = pt;
  out.kind = ValueKind::rabi;
  out.value = r.rabi;
  out.err_lo = r.err_lo;
  out.err_hi = r.err_hi;
  return out;
}

/// Rabi frequencies divided by sqrt(power); units become (rabi units)/sqrt(uW).
inline std::vector<ScanPoint> power_rescale(const std::vector<ScanPoint>& points) {
  std::vector<ScanPoint> out;
  out.reserve(points.size());
  for (const ScanPoint& pt : points) {
    if (!pt.power_uW) throw DomainError("power_rescale: point at b = " + std::to_string(pt.b_um) + " has no power_uW");
    ScanPoint r = as_rabi(pt);
    const double s = 1.0 / std::sqrt(*pt.power_uW);
    r.value *= s;
    r.err_lo *= s;
    r.err_hi *= s;
    r.power_uW = 1.0;
    out.push_back(r);
  }
  return out;
}

/// Rabi points ready for fitting: probabilities inverted, power rescaling
/// applied where a power is given.
inline std::vector<ScanPoint> prepare(const ScanDataset& ds) {
  std::vector<ScanPoint> out;
  out.reserve(ds.points.size());
  for (const ScanPoint& pt : ds.points) {
    out.push_back(pt.power_uW ? power_rescale({pt}).front() : as_rabi(pt));
  }
  return out;
}

struct ChannelKey {
  HalfInt s_z;
  int delta_m;
  int m_gamma;
  int helicity;
  auto operator<=>(const ChannelKey&) const = default;
};

inline ChannelKey key_of(const ScanPoint& p) { return {p.s_z, p.channel_dm, p.m_gamma, p.helicity}; }

inline std::map<ChannelKey, std::vector<ScanPoint>> group_by_channel(const std::vector<ScanPoint>& points) {
  std::map<ChannelKey, std::vector<ScanPoint>> out;
  for (const ScanPoint& p : points) out[key_of(p)].push_back(p);
  for (auto& [k, v] : out) {
    std::stable_sort(v.begin(), v.end(), [](const ScanPoint& a, const ScanPoint& b) { return a.b_um < b.b_um; });
  }
  return out;
}

/// Location of the first local minimum after the global maximum, refined by
/// a parabola through the squared values of the three samples around it.
inline std::optional<double> first_minimum_after_peak(const std::vector<ScanPoint>& pts) {
  if (pts.size() < 3) return std::nullopt;
  std::size_t peak = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].value > pts[peak].value) peak = i;
  }
  for (std::size_t i = std::max<std::size_t>(peak, 1); i + 1 < pts.size(); ++i) {
    const double y0 = pts[i - 1].value, y1 = pts[i].value, y2 = pts[i + 1].value;
    if (!(y1 < y0 && y1 <= y2)) continue;
    const double x0 = pts[i - 1].b_um, x1 = pts[i].b_um, x2 = pts[i + 1].b_um;
    const double f0 = y0 * y0, f1 = y1 * y1, f2 = y2 * y2;
    const double d01 = (f1 - f0) / (x1 - x0);
    const double d12 = (f2 - f1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (!(curv > 0.0)) return x1;
    const double vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    return std::clamp(vertex, x0, x2);
  }
  return std::nullopt;
}

struct Calibration {
  double norm;
  double theta_k;
  std::vector<std::pair<ChannelKey, double>> minima;
};

/// Pitch angle from the first minima of each BB channel (zeros of
/// J_{dm - m_gamma}(kappa b)), then the normalization from the on-axis
/// samples of the channel with dm = m_gamma.
inline Calibration calibrate_bb(const ScanDataset& ds, double wavelength_um) {
  if (!(wavelength_um > 0.0)) throw DomainError("calibrate_bb: wavelength must be > 0");
  const std::vector<ScanPoint> pts = prepare(ds);
  if (pts.empty()) throw DomainError("calibrate_bb: empty dataset");
  const auto groups = group_by_channel(pts);

  Calibration cal{0.0, 0.0, {}};
  double num = 0.0, den = 0.0;
  for (const auto& [key, v] : groups) {
    const auto bmin = first_minimum_after_peak(v);
    if (!bmin) {
      throw FitError("calibrate_bb: no minimum detectable in channel dm=" + std::to_string(key.delta_m) +
                     " m_gamma=" + std::to_string(key.m_gamma) + " (" + std::to_string(v.size()) + " points)");
    }
    const double j = specfun::bessel_j_zero(std::abs(key.delta_m - key.m_gamma), 1);
    num += *bmin * j;
    den += j * j;
    cal.minima.emplace_back(key, *bmin);
  }
  const double kappa = den / num;
  const double s = kappa * wavelength_um / (2.0 * std::numbers::pi);
  if (!(s > 0.0 && s < 1.0)) throw FitError("calibrate_bb: minima imply sin(theta_k) outside (0, 1)");
  cal.theta_k = std::asin(s);

  BeamConfig cfg;
  cfg.family = Family::BB;
  cfg.wavelength_um = wavelength_um;
  cfg.pitch_rad = cal.theta_k;
  double yn = 0.0, nn = 0.0;
  for (const auto& [key, v] : groups) {
    if (key.delta_m != key.m_gamma) continue;
    cfg.m_gamma = key.m_gamma;
    cfg.helicity = key.helicity;
    const auto tr = amplitudes::reference_transition(key.s_z, key.delta_m);
    for (const ScanPoint& p : v) {
      if (kappa * p.b_um >= 0.5) continue;
      const double m = amplitudes::bb_amplitude(tr, cfg, p.b_um, 0.0, {}).magnitude;
      const double w = p.sigma() > 0.0 ? 1.0 / (p.sigma() * p.sigma()) : 1.0;
      yn += w * p.value * m;
      nn += w * m * m;
    }
  }
  if (!(nn > 0.0)) throw FitError("calibrate_bb: no on-axis samples (kappa b < 0.5) in a dm = m_gamma channel");
  cal.norm = yn / nn;
  return cal;
}

enum class Param { norm, theta_k, w0, w1, mix_ratio, eps };

inline std::string to_string(Param p) {
  switch (p) {
    case Param::norm: return "norm";
    case Param::theta_k: return "theta_k";
    case Param::w0: return "w0";
    case Param::w1: return "w1";
    case Param::mix_ratio: return "mix_ratio";
    case Param::eps: return "eps";
  }
  return "?";
}

inline Param param_from_string(const std::string& s) {
  for (Param p : {Param::norm, Param::theta_k, Param::w0, Param::w1, Param::mix_ratio, Param::eps}) {
    if (to_string(p) == s) return p;
  }
  throw DomainError("unknown fit parameter '" + s + "'");
}

struct Bounds {
  double lo;
  double hi;
};

inline Bounds default_bounds(Param p) {
  switch (p) {
    case Param::norm: return {1e-12, 1e12};
    case Param::theta_k: return {1e-4, 0.5};
    case Param::w0:
    case Param::w1: return {0.5, 200.0};
    case Param::mix_ratio: return {-5.0, 5.0};
    case Param::eps: return {0.0, 0.99};
  }
  return {0.0, 1.0};
}

struct FitConfig {
  std::vector<Param> free_params;
  std::map<Param, Bounds> bounds;
  /// Family, wavelength and starting values; per-channel m_gamma/helicity
  /// come from the data.
  BeamConfig beam;
  std::vector<ChannelKey> channels;
  amplitudes::EvalOptions eval;
  int max_iterations = 200;
  double param_tol = 1e-8;
  double chi2_tol = 1e-10;

  Bounds bounds_of(Param p) const {
    auto it = bounds.find(p);
    return it == bounds.end() ? default_bounds(p) : it->second;
  }
};

struct ParamEstimate {
  Param param;
  double value;
  double sigma;
};

struct FitResult {
  std::vector<ParamEstimate> params;
  double norm = 1.0;
  BeamConfig beam;
  double chi2 = 0.0;
  int dof = 0;
  bool converged = false;
  int iterations = 0;
  std::string message;
  std::vector<double> residuals;

  double value(Param p) const {
    for (const auto& e : params) {
      if (e.param == p) return e.value;
    }
    throw DomainError("FitResult: parameter " + to_string(p) + " was not fitted");
  }
};

namespace detail {

inline double get(Param p, const BeamConfig& c, double norm) {
  switch (p) {
    case Param::norm: return norm;
    case Param::theta_k: return c.pitch_rad;
    case Param::w0: return c.w0_um;
    case Param::w1: return c.w1_um;
    case Param::mix_ratio: return c.mix_ratio;
    case Param::eps: return c.admixture_eps;
  }
  return 0.0;
}

inline void set(Param p, BeamConfig& c, double& norm, double v) {
  switch (p) {
    case Param::norm: norm = v; break;
    case Param::theta_k: c.pitch_rad = v; break;
    case Param::w0: c.w0_um = v; break;
    case Param::w1: c.w1_um = v; break;
    case Param::mix_ratio: c.mix_ratio = v; break;
    case Param::eps: c.admixture_eps = v; break;
  }
}

class Problem {
 public:
  Problem(std::vector<ScanPoint> pts, const FitConfig& cfg) : pts_(std::move(pts)), cfg_(cfg) {
    for (const ScanPoint& p : pts_) {
      if (!(p.sigma() > 0.0)) throw DomainError("fit: every point needs a positive error (err_lo + err_hi > 0)");
      trs_.push_back(amplitudes::reference_transition(p.s_z, p.channel_dm));
    }
  }

  std::size_t size() const { return pts_.size(); }
  const ScanPoint& point(std::size_t i) const { return pts_[i]; }

  /// Model magnitudes at norm = 1.
  Eigen::VectorXd unit_model(const BeamConfig& beam) const {
    Eigen::VectorXd m(pts_.size());
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      BeamConfig c = beam;
      c.m_gamma = pts_[i].m_gamma;
      c.helicity = pts_[i].helicity;
      m[i] = amplitudes::amplitude(trs_[i], c, pts_[i].b_um, 0.0, {}, cfg_.eval).magnitude;
    }
    return m;
  }

  Eigen::VectorXd residuals(const BeamConfig& beam, double norm) const {
    const Eigen::VectorXd m = unit_model(beam);
    Eigen::VectorXd r(pts_.size());
    for (std::size_t i = 0; i < pts_.size(); ++i) r[i] = (norm * m[i] - pts_[i].value) / pts_[i].sigma();
    return r;
  }

  /// Weighted linear least-squares norm for fixed shape parameters.
  double best_norm(const BeamConfig& beam) const {
    const Eigen::VectorXd m = unit_model(beam);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const double w = 1.0 / (pts_[i].sigma() * pts_[i].sigma());
      num += w * m[i] * pts_[i].value;
      den += w * m[i] * m[i];
    }
    if (!(den > 0.0)) throw FitError("fit: model vanishes at every data point");
    return num / den;
  }

 private:
  std::vector<ScanPoint> pts_;
  std::vector<amplitudes::Transition> trs_;
  FitConfig cfg_;
};

}  // namespace detail

/// Bounded Levenberg-Marquardt on the weighted residuals
/// (model - value) / sigma with a central-difference Jacobian.
inline FitResult fit(const ScanDataset& ds, const FitConfig& cfg, const NormalizationContext& ctx) {
  ctx.validate();
  if (cfg.free_params.empty()) throw DomainError("fit: at least one free parameter is required");
  for (std::size_t i = 0; i < cfg.free_params.size(); ++i) {
    const Param p = cfg.free_params[i];
    if (std::count(cfg.free_params.begin(), cfg.free_params.end(), p) > 1) throw DomainError("fit: duplicate parameter " + to_string(p));
    const Bounds b = cfg.bounds_of(p);
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) throw DomainError("fit: bounds for " + to_string(p) + " must be finite with lo < hi");
  }
  std::vector<ScanPoint> pts = prepare(ds);
  if (!cfg.channels.empty()) {
    for (const ScanPoint& p : pts) {
      if (std::find(cfg.channels.begin(), cfg.channels.end(), key_of(p)) == cfg.channels.end()) {
        throw DomainError("fit: data point at b = " + std::to_string(p.b_um) + " belongs to a channel not in the fit config");
      }
    }
  }
  const int n_free = static_cast<int>(cfg.free_params.size());
  const int dof = static_cast<int>(pts.size()) - n_free;
  if (dof < 1) throw DomainError("fit: need more data points than free parameters (dof >= 1)");

  BeamConfig beam = cfg.beam;
  beam.validate();
  double norm = ctx.scale();
  const detail::Problem prob(std::move(pts), cfg);

  const bool norm_free = std::find(cfg.free_params.begin(), cfg.free_params.end(), Param::norm) != cfg.free_params.end();
  if (norm_free) {
    const Bounds nb = cfg.bounds_of(Param::norm);
    norm = std::clamp(prob.best_norm(beam), nb.lo, nb.hi);
  }

  Eigen::VectorXd x(n_free), lo(n_free), hi(n_free);
  for (int i = 0; i < n_free; ++i) {
    const Param p = cfg.free_params[i];
    x[i] = detail::get(p, beam, norm);
    lo[i] = cfg.bounds_of(p).lo;
    hi[i] = cfg.bounds_of(p).hi;
    if (!(x[i] >= lo[i] && x[i] <= hi[i])) throw DomainError("fit: initial " + to_string(p) + " lies outside its bounds");
  }

  auto apply = [&](const Eigen::VectorXd& v, BeamConfig& b, double& n) {
    for (int i = 0; i < n_free; ++i) detail::set(cfg.free_params[i], b, n, v[i]);
  };
  auto resid = [&](const Eigen::VectorXd& v) {
    BeamConfig b = beam;
    double n = norm;
    apply(v, b, n);
    b.validate();
    return prob.residuals(b, n);
  };
  auto jacobian = [&](const Eigen::VectorXd& v) {
    Eigen::MatrixXd J(prob.size(), n_free);
    for (int i = 0; i < n_free; ++i) {
      const double h = 1e-6 * std::max(std::abs(v[i]), 1e-3);
      Eigen::VectorXd up = v, dn = v;
      up[i] = std::min(v[i] + h, hi[i]);
      dn[i] = std::max(v[i] - h, lo[i]);
      J.col(i) = (resid(up) - resid(dn)) / (up[i] - dn[i]);
    }
    return J;
  };

  Eigen::VectorXd r = resid(x);
  double chi2 = r.squaredNorm();
  double data_scale = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) data_scale += std::pow(prob.point(i).value / prob.point(i).sigma(), 2);
  const double chi2_floor = 1e-24 * std::max(data_scale, 1.0);

  FitResult res;
  res.dof = dof;
  double lambda = 1e-3;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    if (chi2 <= chi2_floor) {
      res.converged = true;
      res.message = "chi2 at numerical noise floor";
      break;
    }
    const Eigen::MatrixXd J = jacobian(x);
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    Eigen::VectorXd diag = A.diagonal().cwiseMax(1e-30);

    bool accepted = false;
    Eigen::VectorXd x_new;
    Eigen::VectorXd r_new;
    double chi2_new = chi2;
    while (lambda < 1e16) {
      Eigen::MatrixXd M = A;
      M.diagonal() += lambda * diag;
      const Eigen::VectorXd step = -M.ldlt().solve(g);
      x_new = (x + step).cwiseMax(lo).cwiseMin(hi);
      r_new = resid(x_new);
      chi2_new = r_new.squaredNorm();
      if (std::isfinite(chi2_new) && chi2_new < chi2) {
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      res.converged = true;
      res.message = "no further decrease of chi2 possible";
      break;
    }
    double rel_step = 0.0;
    for (int i = 0; i < n_free; ++i) {
      rel_step = std::max(rel_step, std::abs(x_new[i] - x[i]) / std::max(std::abs(x[i]), 1e-12));
    }
    const double rel_chi2 = (chi2 - chi2_new) / std::max(chi2, std::numeric_limits<double>::min());
    x = x_new;
    r = r_new;
    chi2 = chi2_new;
    lambda = std::max(lambda / 10.0, 1e-12);
    if (rel_step < cfg.param_tol && rel_chi2 < cfg.chi2_tol) {
      res.converged = true;
      res.message = "relative parameter and chi2 steps below tolerance";
      ++it;
      break;
    }
  }
  if (!res.converged) res.message = "maximum iterations reached";

  // Gauss-Newton polish so the reported optimum does not depend on where the loop stopped
  for (int k = 0; res.converged && k < 20 && chi2 > chi2_floor; ++k) {
    const Eigen::MatrixXd J = jacobian(x);
    const Eigen::VectorXd step = -(J.transpose() * J).ldlt().solve(J.transpose() * r);
    const Eigen::VectorXd x_new = (x + step).cwiseMax(lo).cwiseMin(hi);
    const Eigen::VectorXd r_new = resid(x_new);
    const double chi2_new = r_new.squaredNorm();
    if (!std::isfinite(chi2_new) || chi2_new > chi2 * (1.0 + 1e-12)) break;
    double rel_step = 0.0;
    for (int i = 0; i < n_free; ++i) rel_step = std::max(rel_step, std::abs(x_new[i] - x[i]) / std::max(std::abs(x[i]), 1e-12));
    x = x_new;
    r = r_new;
    chi2 = chi2_new;
    if (rel_step < 1e-14) break;
  }

  const Eigen::MatrixXd J = jacobian(x);
  const Eigen::MatrixXd cov = (J.transpose() * J).completeOrthogonalDecomposition().pseudoInverse();
  apply(x, beam, norm);
  res.beam = beam;
  res.norm = norm;
  res.chi2 = chi2;
  res.iterations = it;
  for (int i = 0; i < n_free; ++i) res.params.push_back({cfg.free_params[i], x[i], std::sqrt(std::max(cov(i, i), 0.0))});
  res.residuals.assign(r.data(), r.data() + r.size());
  return res;
}

}  // namespace vortex::fitdata

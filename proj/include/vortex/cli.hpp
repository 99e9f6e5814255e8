#pragma once

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vortex/amplitudes.hpp"
#include "vortex/beams.hpp"
#include "vortex/errors.hpp"
#include "vortex/fitdata.hpp"
#include "vortex/io.hpp"
#include "vortex/selection.hpp"
#include "vortex/selftest.hpp"

namespace vortex::cli {

enum ExitCode { kOk = 0, kDomain = 1, kNumeric = 2 };

struct Options {
  std::string config_path;
  std::string output = "-";
  std::string format = "csv";
  std::optional<double> sz;
  std::optional<double> lambda_um;
  std::optional<std::string> family;
  std::optional<double> theta_rad;
  std::optional<double> w0_um;
  std::optional<double> w1_um;
  std::optional<double> mix;
  std::optional<double> eps;
  std::optional<int> mgamma;
  std::optional<int> helicity;
  std::optional<int> p;
  std::optional<std::string> bg_model;

  // grids
  double b_min = 0.0;
  double b_max = 10.0;
  double b_step = 0.05;
  std::optional<std::string> b_grid;
  double phi_b = 0.0;
  std::optional<int> delta_m;
  std::string admixture = "quadrature";
  double rel_phase = 0.0;

  bool raw = false;                    // flux
  std::optional<double> bg_w0_um;      // table
  int mbar = 0;                        // azimuthal
  std::string phi_list = "0,0.7853981633974483,1.0471975511965976,1.5707963267948966";
  std::string data_path;               // fit
  std::string fit_config_path;
  std::string free_params = "norm,theta_k";
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (*end != '\0' && std::string(end).find_first_not_of(" \t") != std::string::npos) {
      throw DomainError(std::string(what) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

inline std::vector<double> b_grid(const Options& o) {
  if (o.b_grid) {
    auto g = parse_list(*o.b_grid, "--b-grid");
    amplitudes::validate_grid(g, "--b-grid");
    return g;
  }
  if (!(o.b_step > 0.0)) throw DomainError("--b-step must be > 0");
  if (o.b_max < o.b_min) throw DomainError("b grid is empty (--b-max < --b-min)");
  std::vector<double> g;
  const long n = std::lround(std::floor((o.b_max - o.b_min) / o.b_step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(o.b_min + i * o.b_step);
  amplitudes::validate_grid(g, "b grid");
  return g;
}

inline HalfInt parse_sz(double v) {
  const HalfInt h = HalfInt::from_double(v);
  if (h != kHalf && h != -kHalf) throw DomainError("--sz must be +0.5 or -0.5");
  return h;
}

inline beams::BeamConfig beam_config(const Options& o) {
  beams::BeamConfig c = o.config_path.empty() ? beams::BeamConfig{} : io::load_beam_config(o.config_path);
  if (o.family) c.family = io::family_from_string(*o.family);
  if (o.lambda_um) c.wavelength_um = *o.lambda_um;
  if (o.theta_rad) c.pitch_rad = *o.theta_rad;
  if (o.w0_um) c.w0_um = *o.w0_um;
  if (o.w1_um) c.w1_um = *o.w1_um;
  if (o.mix) c.mix_ratio = *o.mix;
  if (o.eps) c.admixture_eps = *o.eps;
  if (o.mgamma) c.m_gamma = *o.mgamma;
  if (o.helicity) c.helicity = *o.helicity;
  if (o.p) c.p = *o.p;
  if (o.bg_model) {
    if (*o.bg_model == "full") c.bg_model = beams::BgModel::full;
    else if (*o.bg_model == "factorized") c.bg_model = beams::BgModel::factorized;
    else throw DomainError("--bg-model must be full or factorized");
  }
  c.validate();
  return c;
}

inline amplitudes::EvalOptions eval_options(const Options& o) {
  amplitudes::EvalOptions e;
  if (o.admixture == "coherent") e.admixture = amplitudes::AdmixtureMode::coherent(o.rel_phase);
  else if (o.admixture != "quadrature") throw DomainError("--admixture must be quadrature or coherent");
  return e;
}

inline void require_format(const Options& o, std::initializer_list<const char*> allowed) {
  for (const char* f : allowed) {
    if (o.format == f) return;
  }
  throw DomainError("--format '" + o.format + "' is not supported by this subcommand");
}

inline std::vector<HalfInt> spins(const Options& o) {
  if (o.sz) return {parse_sz(*o.sz)};
  return {-kHalf, kHalf};
}

inline std::vector<int> delta_ms(const Options& o) {
  if (o.delta_m) return {*o.delta_m};
  return {-2, -1, 0, 1, 2};
}

}  // namespace detail

inline int cmd_profile(const Options& o) {
  detail::require_format(o, {"csv", "json"});
  const auto cfg = detail::beam_config(o);
  const auto grid = detail::b_grid(o);
  const auto opt = detail::eval_options(o);
  std::vector<selection::BeamSetting> settings;
  if (!o.config_path.empty() || o.mgamma || o.helicity) settings = {{cfg.m_gamma, cfg.helicity}};
  else settings = selection::table_beam_settings();
  if (cfg.family == beams::Family::BG && cfg.bg_model == beams::BgModel::factorized && !amplitudes::bg_factorization_valid(cfg)) {
    std::cerr << "warning: w0 < 5 wavelengths, the factorized BG amplitude is unreliable\n";
  }

  std::string csv = io::provenance_header(cfg) + io::kProfileHeader;
  io::json arr = io::json::array();
  for (HalfInt sz : detail::spins(o)) {
    for (const auto& bs : settings) {
      for (int dm : detail::delta_ms(o)) {
        beams::BeamConfig c = cfg;
        c.m_gamma = bs.m_gamma;
        c.helicity = bs.helicity;
        const auto tr = amplitudes::reference_transition(sz, dm);
        const auto prof = amplitudes::profile(tr, c, grid, o.phi_b, {}, opt);
        if (o.format == "csv") csv += io::profile_rows(prof);
        else arr.push_back(io::to_json(prof));
      }
    }
  }
  if (o.format == "csv") io::write_output(o.output, csv);
  else io::write_output(o.output, io::json{{"beam_config", io::to_json(cfg)}, {"profiles", arr}}.dump(2) + "\n");
  return kOk;
}

inline int cmd_flux(const Options& o) {
  detail::require_format(o, {"csv", "json"});
  const auto cfg = detail::beam_config(o);
  const auto prof = beams::flux_profile(cfg, detail::b_grid(o), o.raw);
  if (o.format == "csv") io::write_output(o.output, io::flux_csv(prof, cfg));
  else io::write_output(o.output, io::json{{"beam_config", io::to_json(cfg)}, {"rho_um", prof.rho_um}, {"flux", prof.flux}}.dump(2) + "\n");
  return kOk;
}

inline int cmd_table(const Options& o) {
  detail::require_format(o, {"csv", "json", "text"});
  auto cfgs = selection::default_table_configs();
  for (beams::BeamConfig* c : {&cfgs.bb, &cfgs.bg, &cfgs.lg}) {
    if (o.lambda_um) c->wavelength_um = *o.lambda_um;
    if (o.theta_rad) c->pitch_rad = *o.theta_rad;
    if (o.eps) c->admixture_eps = *o.eps;
  }
  if (o.w0_um) cfgs.lg.w0_um = *o.w0_um;
  if (o.w1_um) cfgs.lg.w1_um = *o.w1_um;
  if (o.mix) cfgs.lg.mix_ratio = *o.mix;
  if (o.bg_w0_um) cfgs.bg.w0_um = *o.bg_w0_um;
  if (o.bg_model) cfgs.bg.bg_model = *o.bg_model == "factorized" ? beams::BgModel::factorized : beams::BgModel::full;
  for (const beams::BeamConfig* c : {&cfgs.bb, &cfgs.bg, &cfgs.lg}) c->validate();
  const HalfInt sz = detail::parse_sz(o.sz.value_or(-0.5));
  const auto table = selection::peak_table(sz, {}, cfgs, selection::table_beam_settings(), detail::eval_options(o));
  if (o.format == "csv") io::write_output(o.output, io::table_csv(table));
  else if (o.format == "text") io::write_output(o.output, io::table_text(table));
  else io::write_output(o.output, io::to_json(table).dump(2) + "\n");
  return kOk;
}

inline int cmd_prenumbra(const Options& o) {
  detail::require_format(o, {"csv", "json"});
  const double lambda = o.lambda_um.value_or(0.729);
  const double theta = o.theta_rad.value_or(0.095);
  std::string csv = "s_z,lambda_um,theta_rad,radius_um,small_angle_um\n";
  io::json arr = io::json::array();
  for (HalfInt sz : detail::spins(o)) {
    const double r = selection::prenumbra_radius({sz, lambda, theta, beams::Family::BB});
    const double s = selection::prenumbra_small_angle(sz, lambda);
    csv += io::fmt_num(sz.value()) + "," + io::fmt_num(lambda) + "," + io::fmt_num(theta) + "," + io::fmt_num(r) + "," +
           io::fmt_num(s) + "\n";
    arr.push_back({{"s_z", sz.value()}, {"lambda_um", lambda}, {"theta_rad", theta}, {"radius_um", r}, {"small_angle_um", s}});
  }
  io::write_output(o.output, o.format == "csv" ? csv : arr.dump(2) + "\n");
  return kOk;
}

inline int cmd_azimuthal(const Options& o) {
  detail::require_format(o, {"csv", "json"});
  const auto cfg = detail::beam_config(o);
  const auto grid = detail::b_grid(o);
  const auto phis = detail::parse_list(o.phi_list, "--phi-list");
  if (phis.empty()) throw DomainError("--phi-list is empty");
  const auto opt = detail::eval_options(o);
  std::string csv = io::provenance_header(cfg) + "b_um,phi_b_rad,magnitude,re,im,s_z,delta_m,m_bar\n";
  io::json arr = io::json::array();
  for (HalfInt sz : detail::spins(o)) {
    for (int dm : detail::delta_ms(o)) {
      const auto tr = amplitudes::reference_transition(sz, dm);
      for (double phi : phis) {
        for (double b : grid) {
          const auto s = amplitudes::linear_polarization_amplitude(tr, o.mbar, cfg, b, phi, {}, opt);
          csv += io::fmt_num(b) + "," + io::fmt_num(phi) + "," + io::fmt_num(s.magnitude) + "," + io::fmt_num(s.value.real()) +
                 "," + io::fmt_num(s.value.imag()) + "," + io::fmt_num(sz.value()) + "," + std::to_string(dm) + "," +
                 std::to_string(o.mbar) + "\n";
          arr.push_back({{"b_um", b}, {"phi_b_rad", phi}, {"magnitude", s.magnitude}, {"s_z", sz.value()}, {"delta_m", dm}});
        }
      }
    }
  }
  io::write_output(o.output, o.format == "csv" ? csv : arr.dump(2) + "\n");
  return kOk;
}

inline int cmd_fit(const Options& o) {
  detail::require_format(o, {"json", "csv"});
  if (o.data_path.empty()) throw DomainError("fit: --data <scan.csv> is required");
  const auto cfg = detail::beam_config(o);
  const auto ds = io::load_scan_csv(o.data_path);
  fitdata::FitConfig fc;
  if (!o.fit_config_path.empty()) {
    fc = io::fit_config_from_json(io::parse_json(io::read_text(o.fit_config_path), o.fit_config_path), cfg);
  } else {
    fc.beam = cfg;
  }
  if (fc.free_params.empty()) {
    std::stringstream ss(o.free_params);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) fc.free_params.push_back(fitdata::param_from_string(item));
    }
  }
  fc.eval = detail::eval_options(o);
  const auto res = fitdata::fit(ds, fc, {});
  if (o.format == "json") {
    io::write_output(o.output, io::to_json(res).dump(2) + "\n");
  } else {
    std::string csv = "param,value,sigma\n";
    for (const auto& p : res.params) csv += fitdata::to_string(p.param) + "," + io::fmt_num(p.value) + "," + io::fmt_num(p.sigma) + "\n";
    io::write_output(o.output, csv);
  }
  return res.converged ? kOk : kNumeric;
}

inline int cmd_selftest(const Options& o) {
  detail::require_format(o, {"csv", "json", "text"});
  bool all = true;
  std::string text;
  std::string csv = "check,passed,worst,tolerance\n";
  io::json arr = io::json::array();
  for (const auto& check : selftest::all_checks()) {
    const auto r = check();
    all = all && r.passed;
    text += selftest::describe(r) + "\n";
    csv += "\"" + r.name + "\"," + (r.passed ? "1" : "0") + "," + io::fmt_num(r.worst) + "," + io::fmt_num(r.tolerance) + "\n";
    arr.push_back({{"check", r.name}, {"passed", r.passed}, {"worst", r.worst}, {"tolerance", r.tolerance}});
  }
  if (o.format == "json") io::write_output(o.output, arr.dump(2) + "\n");
  else if (o.format == "csv") io::write_output(o.output, csv);
  else io::write_output(o.output, text);
  return all ? kOk : kNumeric;
}

inline void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "BeamConfig JSON file")->check(CLI::ExistingFile);
  sub->add_option("--output", o.output, "output path, - for standard output");
  sub->add_option("--format", o.format, "csv | json");
  sub->add_option("--sz", o.sz, "initial electron spin projection, +0.5 or -0.5");
  sub->add_option("--lambda-um", o.lambda_um, "wavelength in um");
  sub->add_option("--family", o.family, "bb | bg | lg | lgmix");
  sub->add_option("--theta-rad", o.theta_rad, "pitch angle in rad");
  sub->add_option("--w0-um", o.w0_um, "waist w0 in um");
  sub->add_option("--w1-um", o.w1_um, "second LG waist in um");
  sub->add_option("--mix", o.mix, "p=1 to p=0 amplitude ratio");
  sub->add_option("--eps", o.eps, "opposite-helicity admixture (amplitude)");
  sub->add_option("--mgamma", o.mgamma, "TAM projection m_gamma");
  sub->add_option("--helicity", o.helicity, "+1 or -1");
  sub->add_option("--p", o.p, "LG radial order");
  sub->add_option("--bg-model", o.bg_model, "factorized | full");
  sub->add_option("--admixture", o.admixture, "quadrature | coherent");
  sub->add_option("--rel-phase", o.rel_phase, "relative phase of the admixture (coherent)");
}

inline void add_grid(CLI::App* sub, Options& o) {
  sub->add_option("--b-min", o.b_min, "grid start in um");
  sub->add_option("--b-max", o.b_max, "grid end in um");
  sub->add_option("--b-step", o.b_step, "grid step in um");
  sub->add_option("--b-grid", o.b_grid, "explicit comma-separated grid in um");
}

inline int run(int argc, const char* const* argv) {
  CLI::App app{"Twisted-light selection rules and transition amplitudes"};
  app.require_subcommand(1);
  Options o;

  auto* profile = app.add_subcommand("profile", "amplitude vs impact parameter per channel");
  add_common(profile, o);
  add_grid(profile, o);
  profile->add_option("--phi-b", o.phi_b, "azimuth of the ion in rad");
  profile->add_option("--delta-m", o.delta_m, "restrict to one delta_m channel");

  auto* flux = app.add_subcommand("flux", "radial energy flux profile");
  add_common(flux, o);
  add_grid(flux, o);
  flux->add_flag("--raw", o.raw, "skip normalization to max = 1");

  auto* table = app.add_subcommand("table", "b = 0 peak Rabi frequencies per family");
  add_common(table, o);
  table->add_option("--bg-w0-um", o.bg_w0_um, "BG column waist in um");

  auto* pren = app.add_subcommand("prenumbra", "prenumbra radii");
  add_common(pren, o);

  auto* azi = app.add_subcommand("azimuthal", "linear-polarization magnitude over (b, phi_b)");
  add_common(azi, o);
  add_grid(azi, o);
  azi->add_option("--mbar", o.mbar, "topological charge held fixed");
  azi->add_option("--phi-list", o.phi_list, "comma-separated azimuths in rad");
  azi->add_option("--delta-m", o.delta_m, "restrict to one delta_m channel");

  auto* fit = app.add_subcommand("fit", "weighted least-squares fit to a scan CSV");
  add_common(fit, o);
  fit->add_option("--data", o.data_path, "scan CSV")->check(CLI::ExistingFile);
  fit->add_option("--fit-config", o.fit_config_path, "fit settings JSON")->check(CLI::ExistingFile);
  fit->add_option("--free", o.free_params, "comma-separated free parameters");

  auto* self = app.add_subcommand("selftest", "run the invariant suite");
  add_common(self, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kDomain;
  }

  try {
    if (fit->parsed() && fit->count("--format") == 0) o.format = "json";
    if (self->parsed() && self->count("--format") == 0) o.format = "text";
    if (profile->parsed()) return cmd_profile(o);
    if (flux->parsed()) return cmd_flux(o);
    if (table->parsed()) return cmd_table(o);
    if (pren->parsed()) return cmd_prenumbra(o);
    if (azi->parsed()) return cmd_azimuthal(o);
    if (fit->parsed()) return cmd_fit(o);
    if (self->parsed()) return cmd_selftest(o);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomain;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumeric;
  } catch (const RangeError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumeric;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomain;
  }
  return kDomain;
}

}  // namespace vortex::cli

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "vortex/amplitudes.hpp"
#include "vortex/beams.hpp"
#include "vortex/errors.hpp"
#include "vortex/fitdata.hpp"
#include "vortex/selection.hpp"

namespace vortex::io {

using json = nlohmann::json;
using beams::BeamConfig;
using beams::Family;

inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline Family family_from_string(const std::string& s) {
  std::string u;
  for (char c : s) {
    if (c != '_' && c != '-') u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  if (u == "BB") return Family::BB;
  if (u == "BG") return Family::BG;
  if (u == "LG") return Family::LG;
  if (u == "LGMIX") return Family::LG_MIX;
  throw DomainError("unknown beam family '" + s + "' (expected BB, BG, LG or LG_MIX)");
}

inline json to_json(const BeamConfig& c) {
  return json{{"family", beams::to_string(c.family)},
              {"wavelength_um", c.wavelength_um},
              {"pitch_rad", c.pitch_rad},
              {"w0_um", c.w0_um},
              {"w1_um", c.w1_um},
              {"p", c.p},
              {"mix_ratio", c.mix_ratio},
              {"m_gamma", c.m_gamma},
              {"helicity", c.helicity},
              {"admixture_eps", c.admixture_eps},
              {"bg_model", c.bg_model == beams::BgModel::full ? "full" : "factorized"}};
}

namespace detail {

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  try {
    if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) throw DomainError("");
      out = v.get<int>();
    } else {
      if (!v.is_number()) throw DomainError("");
      out = v.get<double>();
    }
  } catch (const std::exception&) {
    throw DomainError(std::string("beam config field '") + key + "': expected " +
                      (std::is_same_v<T, int> ? "an integer" : "a number") + ", got " + v.dump());
  }
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace detail

inline BeamConfig beam_config_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("beam config: expected a JSON object");
  static const std::vector<std::string> known = {"family", "wavelength_um", "pitch_rad", "w0_um", "w1_um", "p",
                                                 "mix_ratio", "m_gamma", "helicity", "admixture_eps", "bg_model"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw DomainError("beam config: unknown field '" + k + "'");
  }
  BeamConfig c;
  if (j.contains("family")) {
    if (!j["family"].is_string()) throw DomainError("beam config field 'family': expected a string");
    c.family = family_from_string(j["family"].get<std::string>());
  }
  detail::read_field(j, "wavelength_um", c.wavelength_um);
  detail::read_field(j, "pitch_rad", c.pitch_rad);
  detail::read_field(j, "w0_um", c.w0_um);
  detail::read_field(j, "w1_um", c.w1_um);
  detail::read_field(j, "p", c.p);
  detail::read_field(j, "mix_ratio", c.mix_ratio);
  detail::read_field(j, "m_gamma", c.m_gamma);
  detail::read_field(j, "helicity", c.helicity);
  detail::read_field(j, "admixture_eps", c.admixture_eps);
  if (j.contains("bg_model")) {
    const json& v = j["bg_model"];
    if (v == "full") c.bg_model = beams::BgModel::full;
    else if (v == "factorized") c.bg_model = beams::BgModel::factorized;
    else throw DomainError("beam config field 'bg_model': expected \"full\" or \"factorized\", got " + v.dump());
  }
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw DomainError(std::string("beam config: ") + e.what());
  }
  return c;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(origin + ":" + std::to_string(detail::line_of(text, e.byte)) + ": malformed JSON: " + e.what());
  }
}

inline BeamConfig load_beam_config(const std::string& path) {
  return beam_config_from_json(parse_json(read_text(path), path));
}

/// FNV-1a 64-bit hash of the canonical JSON text, as 16 hex digits.
inline std::string fingerprint(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string provenance_header(const BeamConfig& c) {
  const std::string text = to_json(c).dump();
  return "# beam_config=" + text + " fingerprint=" + fingerprint(text) + "\n";
}

/// Writes to standard output for "-", otherwise through a temporary file
/// renamed into place.
inline void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content << std::flush;
    return;
  }
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw DomainError("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw DomainError("cannot move output into place at '" + path + "'");
  }
}

inline const char* kScanHeader = "b_um,value,err_lo,err_hi,kind,power_uW,n_trials,t_ms,channel_dm,m_gamma,helicity,s_z";

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    s = a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  }
  return out;
}

inline double to_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw DomainError(where + ": expected a number, got '" + s + "'");
  return v;
}

inline int to_int(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw DomainError(where + ": expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace detail

inline fitdata::ScanDataset parse_scan_csv(const std::string& text, const std::string& origin = "scan") {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<std::string> cols;
  fitdata::ScanDataset ds;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto fields = detail::split_csv(line);
    if (!header_seen) {
      cols = fields;
      const auto expected = detail::split_csv(kScanHeader);
      if (cols != expected) throw DomainError(origin + ":" + std::to_string(lineno) + ": expected header '" + kScanHeader + "'");
      header_seen = true;
      continue;
    }
    const std::string where = origin + ":" + std::to_string(lineno);
    if (fields.size() != cols.size()) {
      throw DomainError(where + ": expected " + std::to_string(cols.size()) + " fields, got " + std::to_string(fields.size()));
    }
    auto at = [&](std::size_t i) { return where + " field '" + cols[i] + "'"; };
    fitdata::ScanPoint p;
    p.b_um = detail::to_double(fields[0], at(0));
    p.value = detail::to_double(fields[1], at(1));
    p.err_lo = fields[2].empty() ? 0.0 : detail::to_double(fields[2], at(2));
    p.err_hi = fields[3].empty() ? 0.0 : detail::to_double(fields[3], at(3));
    if (fields[4] == "prob") p.kind = fitdata::ValueKind::prob;
    else if (fields[4] == "rabi") p.kind = fitdata::ValueKind::rabi;
    else throw DomainError(at(4) + ": expected 'prob' or 'rabi', got '" + fields[4] + "'");
    if (!fields[5].empty()) p.power_uW = detail::to_double(fields[5], at(5));
    p.n_trials = detail::to_int(fields[6], at(6));
    p.t_ms = fields[7].empty() ? 0.0 : detail::to_double(fields[7], at(7));
    p.channel_dm = detail::to_int(fields[8], at(8));
    p.m_gamma = detail::to_int(fields[9], at(9));
    p.helicity = detail::to_int(fields[10], at(10));
    try {
      p.s_z = HalfInt::from_double(detail::to_double(fields[11], at(11)));
      p.validate();
      if (p.kind == fitdata::ValueKind::prob && !(p.t_ms > 0.0)) throw DomainError("probability points need t_ms > 0");
    } catch (const DomainError& e) {
      throw DomainError(where + ": " + e.what());
    }
    ds.points.push_back(p);
  }
  if (!header_seen) throw DomainError(origin + ": missing header line");
  return ds;
}

inline fitdata::ScanDataset load_scan_csv(const std::string& path) { return parse_scan_csv(read_text(path), path); }

inline std::string scan_csv(const fitdata::ScanDataset& ds) {
  std::string out = std::string(kScanHeader) + "\n";
  for (const auto& p : ds.points) {
    out += fmt_num(p.b_um) + "," + fmt_num(p.value) + "," + fmt_num(p.err_lo) + "," + fmt_num(p.err_hi) + "," +
           (p.kind == fitdata::ValueKind::prob ? "prob" : "rabi") + "," + (p.power_uW ? fmt_num(*p.power_uW) : "") + "," +
           std::to_string(p.n_trials) + "," + fmt_num(p.t_ms) + "," + std::to_string(p.channel_dm) + "," +
           std::to_string(p.m_gamma) + "," + std::to_string(p.helicity) + "," + fmt_num(p.s_z.value()) + "\n";
  }
  return out;
}

inline const char* kProfileHeader = "b_um,phi_b_rad,magnitude,re,im,s_z,delta_m,m_gamma,helicity\n";

inline std::string profile_rows(const amplitudes::AmplitudeProfile& prof) {
  std::string out;
  const std::string tail = "," + fmt_num(prof.transition.initial.m.value()) + "," +
                           std::to_string(prof.transition.delta_m()) + "," + std::to_string(prof.config.m_gamma) + "," +
                           std::to_string(prof.config.helicity) + "\n";
  for (const auto& s : prof.samples) {
    out += fmt_num(s.b) + "," + fmt_num(s.phi_b) + "," + fmt_num(s.magnitude) + "," + fmt_num(s.value.real()) + "," +
           fmt_num(s.value.imag()) + tail;
  }
  return out;
}

inline json to_json(const amplitudes::AmplitudeProfile& prof) {
  json samples = json::array();
  for (const auto& s : prof.samples) {
    samples.push_back({{"b_um", s.b}, {"phi_b_rad", s.phi_b}, {"magnitude", s.magnitude}, {"re", s.value.real()}, {"im", s.value.imag()}});
  }
  return json{{"s_z", prof.transition.initial.m.value()},
              {"delta_m", prof.transition.delta_m()},
              {"m_gamma", prof.config.m_gamma},
              {"helicity", prof.config.helicity},
              {"samples", samples}};
}

inline std::string flux_csv(const beams::FluxProfile& f, const BeamConfig& c) {
  std::string out = provenance_header(c) + "rho_um,flux\n";
  for (std::size_t i = 0; i < f.rho_um.size(); ++i) out += fmt_num(f.rho_um[i]) + "," + fmt_num(f.flux[i]) + "\n";
  return out;
}

inline std::string table_csv(const selection::PeakTable& t) {
  std::string out = "delta_m,bb,bg,lg,measured,err,helicity\n";
  for (const auto& r : t.rows) {
    out += std::to_string(r.delta_m) + "," + fmt_num(r.bb) + "," + fmt_num(r.bg) + "," + fmt_num(r.lg) + "," +
           (r.measured ? fmt_num(r.measured->value) : "") + "," + (r.measured ? fmt_num(r.measured->err) : "") + "," +
           std::to_string(r.helicity) + "\n";
  }
  return out;
}

inline std::string table_text(const selection::PeakTable& t) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "s_z = %+.1f, normalized to delta_m = %+d\n", t.s_z.value(), t.normalization_delta_m);
  out += buf;
  std::snprintf(buf, sizeof buf, "%8s %9s %9s %9s %9s %9s %9s\n", "delta_m", "helicity", "BB", "BG", "LG", "measured", "err");
  out += buf;
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%8d %9d %9.4g %9.4g %9.4g %9.4g %9.2g\n", r.delta_m, r.helicity, r.bb, r.bg, r.lg,
                  r.measured ? r.measured->value : 0.0, r.measured ? r.measured->err : 0.0);
    out += buf;
  }
  return out;
}

inline json to_json(const selection::PeakTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row{{"delta_m", r.delta_m}, {"m_gamma", r.m_gamma}, {"helicity", r.helicity}, {"bb", r.bb}, {"bg", r.bg}, {"lg", r.lg}};
    if (r.measured) {
      row["measured"] = r.measured->value;
      row["err"] = r.measured->err;
    }
    rows.push_back(row);
  }
  return json{{"s_z", t.s_z.value()}, {"normalization_delta_m", t.normalization_delta_m}, {"rows", rows}};
}

inline json to_json(const fitdata::FitResult& r) {
  json params = json::object();
  for (const auto& p : r.params) params[fitdata::to_string(p.param)] = {{"value", p.value}, {"sigma", p.sigma}};
  return json{{"params", params},         {"chi2", r.chi2},           {"dof", r.dof},
              {"converged", r.converged}, {"iterations", r.iterations}, {"message", r.message},
              {"norm", r.norm},           {"beam", to_json(r.beam)},  {"residuals", r.residuals}};
}

/// Fit settings document:
/// {"free_params": [...], "bounds": {"w0": [lo, hi]}, "max_iterations": n,
///  "channels": [{"s_z": -0.5, "delta_m": -2, "m_gamma": -2, "helicity": -1}]}
inline fitdata::FitConfig fit_config_from_json(const json& j, const BeamConfig& beam) {
  if (!j.is_object()) throw DomainError("fit config: expected a JSON object");
  fitdata::FitConfig fc;
  fc.beam = beam;
  try {
    if (j.contains("free_params")) {
      for (const auto& p : j.at("free_params")) fc.free_params.push_back(fitdata::param_from_string(p.get<std::string>()));
    }
    if (j.contains("bounds")) {
      for (const auto& [k, v] : j.at("bounds").items()) {
        if (!v.is_array() || v.size() != 2) throw DomainError("fit config: bounds." + k + " must be [lo, hi]");
        fc.bounds[fitdata::param_from_string(k)] = {v[0].get<double>(), v[1].get<double>()};
      }
    }
    if (j.contains("max_iterations")) fc.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("channels")) {
      for (const auto& c : j.at("channels")) {
        fc.channels.push_back({HalfInt::from_double(c.at("s_z").get<double>()), c.at("delta_m").get<int>(),
                               c.at("m_gamma").get<int>(), c.at("helicity").get<int>()});
      }
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("fit config: ") + e.what());
  }
  return fc;
}

}  // namespace vortex::io

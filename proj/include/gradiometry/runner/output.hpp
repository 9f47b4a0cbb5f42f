#pragma once

// Curve serialization. CSV carries a '#' header block echoing the config and
// library version; floats are written with 17 significant digits so identical
// runs give byte-identical files.

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradiometry/errors.hpp"
#include "gradiometry/moment_curve.hpp"
#include "gradiometry/runner/config.hpp"
#include "gradiometry/version.hpp"

namespace gradiometry::runner {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const MomentCurve& curve, const RunConfig* cfg = nullptr) {
  os << "# gradiometry " << kVersion << '\n';
  if (cfg) {
    os << "# mode = " << mode_name(cfg->mode) << '\n';
    for (const auto& [section, key, value] : cfg->echo) {
      os << "# [" << section << "] " << key << " = " << value << '\n';
    }
  }
  os << "# white_noise_jx2 = " << format_double(curve.white_noise_jx2) << '\n';
  os << "theta,jx2,jx2_normalized,jx4,var_jx2,inv_precision,flags";
  if (curve.inv_precision_gaussian) os << ",inv_precision_gaussian";
  os << '\n';
  for (std::size_t i = 0; i < curve.size(); ++i) {
    os << format_double(curve.thetas[i]) << ',' << format_double(curve.jx2[i]) << ','
       << format_double(curve.normalized_jx2(i)) << ',' << format_double(curve.jx4[i]) << ','
       << format_double(curve.var_jx2[i]) << ',' << format_double(curve.inv_precision[i]) << ','
       << flag_string(curve.flags[i]);
    if (curve.inv_precision_gaussian) os << ',' << format_double((*curve.inv_precision_gaussian)[i]);
    os << '\n';
  }
}

inline nlohmann::ordered_json curve_to_json(const MomentCurve& curve, const RunConfig* cfg = nullptr) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  if (cfg) {
    j["mode"] = mode_name(cfg->mode);
    nlohmann::ordered_json conf = nlohmann::ordered_json::object();
    for (const auto& [section, key, value] : cfg->echo) conf[section][key] = value;
    j["config"] = conf;
  }
  j["white_noise_jx2"] = curve.white_noise_jx2;
  j["theta"] = curve.thetas;
  j["jx2"] = curve.jx2;
  std::vector<double> normalized(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) normalized[i] = curve.normalized_jx2(i);
  j["jx2_normalized"] = normalized;
  j["jx4"] = curve.jx4;
  j["var_jx2"] = curve.var_jx2;
  j["inv_precision"] = curve.inv_precision;
  std::vector<std::string> flags;
  for (std::uint8_t f : curve.flags) flags.push_back(flag_string(f));
  j["flags"] = flags;
  if (curve.inv_precision_gaussian) j["inv_precision_gaussian"] = *curve.inv_precision_gaussian;
  return j;
}

inline void write_curve(const std::string& path, Format format, const MomentCurve& curve,
                        const RunConfig* cfg = nullptr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  if (format == Format::csv) {
    write_csv(out, curve, cfg);
  } else {
    out << curve_to_json(curve, cfg).dump(1) << '\n';
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

inline std::uint8_t parse_flags(const std::string& s) {
  std::uint8_t f = kNone;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, '|')) {
    if (tok == "stationary") f |= kStationary;
    else if (tok == "clamped") f |= kClamped;
    else if (tok == "divergent") f |= kDivergent;
    else if (!tok.empty()) throw ConfigError("unknown flag '" + tok + "'");
  }
  return f;
}

inline MomentCurve read_csv_curve(std::istream& in, const std::string& name = "<csv>") {
  MomentCurve curve;
  std::string line;
  std::vector<std::string> header;
  int lineno = 0;
  auto fail = [&](const std::string& what) { throw ConfigError(name + ":" + std::to_string(lineno) + ": " + what); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# white_noise_jx2 = ";
      if (line.rfind(key, 0) == 0) curve.white_noise_jx2 = std::stod(line.substr(key.size()));
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (header.empty()) {
      header = cells;
      if (header.size() < 7 || header[0] != "theta") fail("unexpected CSV header");
      if (header.size() > 7) curve.inv_precision_gaussian.emplace();
      continue;
    }
    if (cells.size() != header.size()) fail("expected " + std::to_string(header.size()) + " cells");
    std::map<std::string, std::string> rec;
    for (std::size_t c = 0; c < cells.size(); ++c) rec[header[c]] = cells[c];
    try {
      MomentPoint p;
      p.jx2 = std::stod(rec.at("jx2"));
      p.jx4 = std::stod(rec.at("jx4"));
      p.var_jx2 = std::stod(rec.at("var_jx2"));
      p.inv_precision = std::stod(rec.at("inv_precision"));
      p.flags = parse_flags(rec.at("flags"));
      curve.push_back(std::stod(rec.at("theta")), p);
      if (curve.inv_precision_gaussian) {
        curve.inv_precision_gaussian->push_back(std::stod(rec.at("inv_precision_gaussian")));
      }
    } catch (const std::logic_error&) {
      fail("malformed row");
    }
  }
  if (header.empty()) throw ConfigError(name + ": no CSV header found");
  return curve;
}

inline MomentCurve read_json_curve(std::istream& in, const std::string& name = "<json>") {
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    MomentCurve curve;
    curve.white_noise_jx2 = j.at("white_noise_jx2").get<double>();
    const auto thetas = j.at("theta").get<std::vector<double>>();
    const auto jx2 = j.at("jx2").get<std::vector<double>>();
    const auto jx4 = j.at("jx4").get<std::vector<double>>();
    const auto var = j.at("var_jx2").get<std::vector<double>>();
    const auto inv = j.at("inv_precision").get<std::vector<double>>();
    const auto flags = j.at("flags").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      curve.push_back(thetas.at(i), MomentPoint{jx2.at(i), jx4.at(i), var.at(i), 0.0, inv.at(i), parse_flags(flags.at(i))});
    }
    if (j.contains("inv_precision_gaussian")) {
      curve.inv_precision_gaussian = j.at("inv_precision_gaussian").get<std::vector<double>>();
    }
    return curve;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const std::out_of_range&) {
    throw ConfigError(name + ": column lengths differ");
  }
}

/// Reads a curve written by write_curve; the format follows the extension.
inline MomentCurve read_curve(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open curve '" + path + "'");
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) return read_json_curve(in, path);
  return read_csv_curve(in, path);
}

}  // namespace gradiometry::runner

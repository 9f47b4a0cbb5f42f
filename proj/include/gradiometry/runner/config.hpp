#pragma once

// INI run configurations. Sections and keys:
//
//   [run]       mode = chain | profile | noise | spinj | oracle-validate | compare
//   [ensemble]  n, j
//   [geometry]  kind = equidistant | explicit, spacing, offset, positions, char_length
//   [profile]   kind = gaussian | tabulated | chain, center, width, file,
//               char_length, pair_covariance, normalize
//   [theta]     min, max, count
//   [noise]     q, p
//   [spinj]     oracle
//   [compare]   a, b, tolerance
//   [validate]  seed, random_thetas
//   [output]    path, format = csv | json

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gradiometry/ensemble.hpp"
#include "gradiometry/errors.hpp"
#include "gradiometry/moment_curve.hpp"
#include "gradiometry/noise.hpp"
#include "gradiometry/profile.hpp"

namespace gradiometry::runner {

enum class Mode { chain, profile, noise, spinj, oracle_validate, compare };

inline Mode parse_mode(const std::string& s) {
  if (s == "chain") return Mode::chain;
  if (s == "profile") return Mode::profile;
  if (s == "noise") return Mode::noise;
  if (s == "spinj") return Mode::spinj;
  if (s == "oracle-validate" || s == "validate") return Mode::oracle_validate;
  if (s == "compare") return Mode::compare;
  throw ConfigError("unknown mode '" + s + "'");
}

inline std::string mode_name(Mode m) {
  switch (m) {
    case Mode::chain: return "chain";
    case Mode::profile: return "profile";
    case Mode::noise: return "noise";
    case Mode::spinj: return "spinj";
    case Mode::oracle_validate: return "oracle-validate";
    case Mode::compare: return "compare";
  }
  return "?";
}

enum class Format { csv, json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError("unknown output format '" + s + "'");
}

struct ThetaGrid {
  double min = 0.0;
  double max = 0.0;
  int count = 1;

  [[nodiscard]] std::vector<double> points() const { return linear_grid(min, max, count); }
};

struct GeometrySpec {
  std::string kind = "equidistant";
  double spacing = 1.0;
  double offset = 0.0;
  std::vector<double> positions;
  std::optional<double> char_length;

  [[nodiscard]] ChainGeometry build(int n) const {
    if (kind == "equidistant") {
      const ChainGeometry eq = equidistant_positions(n, spacing, offset);
      if (!char_length) return eq;
      return {std::vector<double>(eq.positions().begin(), eq.positions().end()), *char_length};
    }
    return {positions, char_length.value_or(1.0)};
  }
};

struct ProfileSpec {
  std::string kind = "gaussian";
  double center = 0.0;
  double width = 1.0;
  std::string file;
  double char_length = 1.0;
  double pair_covariance = 0.0;
  bool normalize = true;
};

struct CompareSpec {
  std::string a;
  std::string b;
  double tolerance = 1e-10;
};

struct RunConfig {
  Mode mode = Mode::chain;
  EnsembleSpec ensemble;
  std::optional<GeometrySpec> geometry;
  std::optional<ProfileSpec> profile;
  ThetaGrid theta;
  std::optional<NoiseConfig> noise;
  bool spinj_oracle = false;
  std::optional<CompareSpec> compare;
  std::uint64_t seed = 20240601;
  int random_thetas = 20;
  std::string output_path;
  Format format = Format::csv;
  /// Raw (section, key, value) triples in file order, echoed into outputs.
  std::vector<std::array<std::string, 3>> echo;
  std::string source = "<string>";

  [[nodiscard]] DensityProfile build_profile() const {
    if (!profile) throw ConfigError("[profile] section required for mode " + mode_name(mode));
    const ProfileSpec& p = *profile;
    if (p.kind == "gaussian") {
      return DensityProfile::gaussian(p.center, p.width, p.char_length, p.pair_covariance);
    }
    if (p.kind == "tabulated") {
      return DensityProfile::tabulated(TabulatedProfile::load(p.file, p.normalize), p.char_length,
                                       p.pair_covariance);
    }
    if (p.kind == "chain") return DensityProfile::delta_chain(build_geometry());
    throw ConfigError("unknown profile kind '" + p.kind + "'");
  }

  [[nodiscard]] ChainGeometry build_geometry() const {
    if (!geometry) throw ConfigError("[geometry] section required for mode " + mode_name(mode));
    return geometry->build(ensemble.n_particles);
  }
};

namespace detail {

/// Locates "[section] key" in the source text so field errors carry a line.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == ';' || line[first] == '#') continue;
      if (line[first] == '[') {
        const auto close = line.find(']', first);
        section = line.substr(first + 1, close - first - 1);
        lines_[section] = lineno;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(first, eq - first);
      key.erase(key.find_last_not_of(" \t") + 1);
      lines_[section + "." + key] = lineno;
    }
  }

  [[nodiscard]] int line(const std::string& path) const {
    const auto it = lines_.find(path);
    return it == lines_.end() ? 0 : it->second;
  }

 private:
  std::map<std::string, int> lines_;
};

class Reader {
 public:
  Reader(const boost::property_tree::ptree& tree, const LineIndex& index, std::string source)
      : tree_(tree), index_(index), source_(std::move(source)) {}

  [[nodiscard]] bool has_section(const std::string& s) const { return tree_.get_child_optional(s).has_value(); }

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    const int line = index_.line(path);
    const auto dot = path.find('.');
    const std::string field =
        dot == std::string::npos ? "[" + path + "]" : "[" + path.substr(0, dot) + "] " + path.substr(dot + 1);
    throw ConfigError(source_ + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + field + ": " + what);
  }

  [[nodiscard]] std::optional<std::string> text(const std::string& path) const {
    const auto v = tree_.get_optional<std::string>(path);
    if (!v) return std::nullopt;
    return *v;
  }

  template <class T>
  [[nodiscard]] T get(const std::string& path, T fallback) const {
    const auto raw = text(path);
    if (!raw) return fallback;
    return parse<T>(path, *raw);
  }

  template <class T>
  [[nodiscard]] T require(const std::string& path) const {
    const auto raw = text(path);
    if (!raw) fail(path, "missing required key");
    return parse<T>(path, *raw);
  }

  template <class T>
  [[nodiscard]] T parse(const std::string& path, const std::string& raw) const {
    if constexpr (std::is_same_v<T, std::string>) {
      return raw;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
      if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
      fail(path, "expected a boolean, got '" + raw + "'");
    } else {
      std::istringstream in(raw);
      T v{};
      std::string rest;
      if (!(in >> v) || (in >> rest)) fail(path, "expected a number, got '" + raw + "'");
      return v;
    }
  }

  [[nodiscard]] std::vector<double> list(const std::string& path) const {
    const auto raw = text(path);
    if (!raw) return {};
    std::string cleaned = *raw;
    for (char& c : cleaned) {
      if (c == ',') c = ' ';
    }
    std::istringstream in(cleaned);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        fail(path, "bad list entry '" + tok + "'");
      }
    }
    return out;
  }

 private:
  const boost::property_tree::ptree& tree_;
  const LineIndex& index_;
  std::string source_;
};

}  // namespace detail

/// Parses and validates a configuration. Paths inside it resolve relative to `base_dir`.
inline RunConfig parse_config(const std::string& text, const std::string& source = "<string>",
                              const std::filesystem::path& base_dir = {}) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  const detail::LineIndex index(text);
  const detail::Reader rd(tree, index, source);
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? p : (base_dir / path).string();
  };

  RunConfig cfg;
  cfg.source = source;
  for (const auto& [section, body] : tree) {
    for (const auto& [key, value] : body) cfg.echo.push_back({section, key, value.data()});
  }

  static const std::map<std::string, std::vector<std::string>> known = {
      {"run", {"mode"}},
      {"ensemble", {"n", "j"}},
      {"geometry", {"kind", "spacing", "offset", "positions", "char_length"}},
      {"profile", {"kind", "center", "width", "file", "char_length", "pair_covariance", "normalize"}},
      {"theta", {"min", "max", "count"}},
      {"noise", {"q", "p"}},
      {"spinj", {"oracle"}},
      {"compare", {"a", "b", "tolerance"}},
      {"validate", {"seed", "random_thetas"}},
      {"output", {"path", "format"}},
  };
  for (const auto& [section, body] : tree) {
    const auto it = known.find(section);
    if (it == known.end()) rd.fail(section, "unknown section");
    for (const auto& [key, value] : body) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
        rd.fail(section + "." + key, "unknown key");
      }
    }
  }

  try {
    cfg.mode = parse_mode(rd.get<std::string>("run.mode", "chain"));
  } catch (const ConfigError& e) {
    rd.fail("run.mode", e.what());
  }

  cfg.ensemble.n_particles = rd.get<int>("ensemble.n", 2);
  try {
    cfg.ensemble.spin = SpinQuantum::parse(rd.get<std::string>("ensemble.j", "1/2"));
  } catch (const DomainError& e) {
    rd.fail("ensemble.j", e.what());
  }
  if (cfg.ensemble.n_particles < 2) rd.fail("ensemble.n", "need at least 2 particles");

  if (rd.has_section("geometry")) {
    GeometrySpec g;
    g.kind = rd.get<std::string>("geometry.kind", "equidistant");
    g.spacing = rd.get<double>("geometry.spacing", 1.0);
    g.offset = rd.get<double>("geometry.offset", 0.0);
    g.positions = rd.list("geometry.positions");
    if (rd.text("geometry.char_length")) g.char_length = rd.require<double>("geometry.char_length");
    if (g.kind == "equidistant") {
      if (!(g.spacing > 0.0)) rd.fail("geometry.spacing", "must be positive");
    } else if (g.kind == "explicit") {
      if (static_cast<int>(g.positions.size()) != cfg.ensemble.n_particles) {
        rd.fail("geometry.positions", "expected " + std::to_string(cfg.ensemble.n_particles) + " positions, got " +
                                          std::to_string(g.positions.size()));
      }
    } else {
      rd.fail("geometry.kind", "expected 'equidistant' or 'explicit'");
    }
    if (g.char_length && !(*g.char_length > 0.0)) rd.fail("geometry.char_length", "must be positive");
    cfg.geometry = g;
  }

  if (rd.has_section("profile")) {
    ProfileSpec p;
    p.kind = rd.get<std::string>("profile.kind", "gaussian");
    p.center = rd.get<double>("profile.center", 0.0);
    p.width = rd.get<double>("profile.width", 1.0);
    p.file = resolve(rd.get<std::string>("profile.file", ""));
    p.char_length = rd.get<double>("profile.char_length", 1.0);
    p.pair_covariance = rd.get<double>("profile.pair_covariance", 0.0);
    p.normalize = rd.get<bool>("profile.normalize", true);
    if (p.kind == "gaussian") {
      if (!(p.width > 0.0)) rd.fail("profile.width", "must be positive");
    } else if (p.kind == "tabulated") {
      if (p.file.empty()) rd.fail("profile.file", "required for a tabulated profile");
      if (!std::filesystem::exists(p.file)) rd.fail("profile.file", "no such file '" + p.file + "'");
    } else if (p.kind == "chain") {
      if (!cfg.geometry) rd.fail("profile.kind", "'chain' needs a [geometry] section");
    } else {
      rd.fail("profile.kind", "expected 'gaussian', 'tabulated' or 'chain'");
    }
    if (!(p.char_length > 0.0)) rd.fail("profile.char_length", "must be positive");
    cfg.profile = p;
  }

  cfg.theta.min = rd.get<double>("theta.min", 0.0);
  cfg.theta.max = rd.get<double>("theta.max", cfg.theta.min);
  cfg.theta.count = rd.get<int>("theta.count", 1);
  if (cfg.theta.count < 1) rd.fail("theta.count", "must be >= 1");
  if (cfg.theta.count > 1 && !(cfg.theta.max > cfg.theta.min)) rd.fail("theta.max", "must exceed theta.min");

  if (rd.has_section("noise")) {
    NoiseConfig n;
    n.q_local = rd.get<double>("noise.q", 0.0);
    n.p_global = rd.get<double>("noise.p", 0.0);
    if (!(n.q_local >= 0.0 && n.q_local < 1.0)) rd.fail("noise.q", "must lie in [0, 1)");
    if (!(n.p_global >= 0.0 && n.p_global <= 1.0)) rd.fail("noise.p", "must lie in [0, 1]");
    cfg.noise = n;
  }

  cfg.spinj_oracle = rd.get<bool>("spinj.oracle", false);

  if (rd.has_section("compare")) {
    CompareSpec c;
    c.a = resolve(rd.get<std::string>("compare.a", ""));
    c.b = resolve(rd.get<std::string>("compare.b", ""));
    c.tolerance = rd.get<double>("compare.tolerance", 1e-10);
    if (!(c.tolerance >= 0.0)) rd.fail("compare.tolerance", "must be non-negative");
    cfg.compare = c;
  }

  cfg.seed = rd.get<std::uint64_t>("validate.seed", cfg.seed);
  cfg.random_thetas = rd.get<int>("validate.random_thetas", cfg.random_thetas);
  if (cfg.random_thetas < 0) rd.fail("validate.random_thetas", "must be >= 0");

  cfg.output_path = resolve(rd.get<std::string>("output.path", ""));
  try {
    cfg.format = parse_format(rd.get<std::string>("output.format", "csv"));
  } catch (const ConfigError& e) {
    rd.fail("output.format", e.what());
  }

  switch (cfg.mode) {
    case Mode::chain:
      if (!cfg.geometry) rd.fail("geometry", "required for mode chain");
      break;
    case Mode::profile:
      if (!cfg.profile) rd.fail("profile", "required for mode profile");
      break;
    case Mode::noise:
      if (!cfg.noise) rd.fail("noise", "required for mode noise");
      if (!cfg.profile && !cfg.geometry) rd.fail("noise", "needs a [profile] or [geometry] section");
      break;
    case Mode::spinj:
      if (!cfg.profile && !cfg.geometry) rd.fail("spinj", "needs a [profile] or [geometry] section");
      if (cfg.spinj_oracle && !cfg.geometry) rd.fail("spinj.oracle", "the oracle needs a [geometry] section");
      break;
    case Mode::oracle_validate:
      break;
    case Mode::compare:
      if (!cfg.compare || cfg.compare->a.empty() || cfg.compare->b.empty()) {
        rd.fail("compare", "keys a and b are required for mode compare");
      }
      break;
  }
  if (cfg.geometry && cfg.mode != Mode::compare) {
    try {
      static_cast<void>(cfg.build_geometry());
    } catch (const InvalidGeometry& e) {
      rd.fail("geometry", e.what());
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path, std::filesystem::path(path).parent_path());
}

}  // namespace gradiometry::runner

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gradiometry/parallel.hpp"
#include "gradiometry/runner/run.hpp"
#include "gradiometry/version.hpp"

namespace {

using namespace gradiometry;
using namespace gradiometry::runner;

struct Options {
  std::string config;
  std::string out;
  std::string format;
  int threads = default_thread_count();
  std::optional<std::uint64_t> seed;
  std::string curve_a;
  std::string curve_b;
  double tolerance = 1e-10;
};

RunConfig prepare(const Options& opt, Mode mode) {
  RunConfig cfg;
  if (!opt.config.empty()) {
    cfg = load_config(opt.config);
    if (cfg.mode != mode) {
      throw ConfigError(opt.config + ": [run] mode = " + mode_name(cfg.mode) + " but subcommand is " + mode_name(mode));
    }
  } else if (mode == Mode::compare) {
    cfg.mode = mode;
  } else {
    throw ConfigError("--config is required");
  }
  if (mode == Mode::compare && !opt.curve_a.empty()) {
    cfg.compare = CompareSpec{opt.curve_a, opt.curve_b, opt.tolerance};
  }
  if (mode == Mode::compare && !cfg.compare) throw ConfigError("compare needs two curve files");
  if (!opt.out.empty()) cfg.output_path = opt.out;
  if (!opt.format.empty()) cfg.format = parse_format(opt.format);
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

int execute(const Options& opt, Mode mode) {
  const RunConfig cfg = prepare(opt, mode);
  const RunResult result = run(cfg, opt.threads);
  if (result.report) {
    result.report->print(std::cout);
    return result.report->passed() ? 0 : 1;
  }
  if (cfg.output_path.empty()) {
    if (cfg.format == Format::csv) write_csv(std::cout, *result.curve, &cfg);
    else std::cout << curve_to_json(*result.curve, &cfg).dump(1) << '\n';
  } else {
    write_curve(cfg.output_path, cfg.format, *result.curve, &cfg);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Singlet gradiometry: moment curves, precision sweeps and oracle validation"};
  app.set_version_flag("--version", std::string(gradiometry::kVersion));
  app.require_subcommand(1);

  Options opt;
  std::optional<Mode> chosen;
  auto add = [&](const std::string& name, Mode mode, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "INI run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output path (default: config [output] path, else stdout)");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "seed for randomized checks");
    sub->callback([&chosen, mode] { chosen = mode; });
    return sub;
  };
  add("chain", Mode::chain, "fixed chain sweep");
  add("profile", Mode::profile, "density-profile sweep");
  add("noise", Mode::noise, "sweep with white noise on the singlet");
  add("spinj", Mode::spinj, "spin-j sweep (Gaussian assumption, optional exact oracle)");
  add("validate", Mode::oracle_validate, "dense-oracle validation report");
  CLI::App* cmp = add("compare", Mode::compare, "compare two curve files column by column");
  cmp->add_option("a", opt.curve_a, "first curve")->check(CLI::ExistingFile);
  cmp->add_option("b", opt.curve_b, "second curve")->check(CLI::ExistingFile);
  cmp->add_option("--tolerance", opt.tolerance, "max absolute deviation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return execute(opt, *chosen);
  } catch (const gradiometry::NumericalInconsistency& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const gradiometry::Error& e) {
    // Configuration, geometry and domain errors all trace back to the inputs.
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gradiometry/chain_dynamics.hpp"
#include "gradiometry/noise.hpp"
#include "gradiometry/oracle.hpp"
#include "gradiometry/parallel.hpp"
#include "gradiometry/profile_dynamics.hpp"
#include "gradiometry/runner/config.hpp"
#include "gradiometry/runner/output.hpp"
#include "gradiometry/runner/report.hpp"
#include "gradiometry/spinj.hpp"

namespace gradiometry::runner {

struct RunResult {
  std::optional<MomentCurve> curve;
  std::optional<ValidationReport> report;
};

namespace detail {

inline void require_qubits(const RunConfig& cfg) {
  if (!cfg.ensemble.spin.is_half()) {
    throw ConfigError("mode " + mode_name(cfg.mode) + " is spin-1/2 only; use mode spinj for j = " +
                      std::to_string(cfg.ensemble.spin.value()));
  }
}

/// Moments of p * (fully mixed) + (1 - p) * rho from those of rho.
inline MomentPoint mix_with_white_noise(MomentPoint p, double weight, int n) {
  if (weight == 0.0) return p;
  const double nn = n;
  const double wn2 = 0.25 * nn;
  const double wn4 = (3.0 * nn * nn - 2.0 * nn) / 16.0;
  MomentPoint out;
  out.jx2 = weight * wn2 + (1.0 - weight) * p.jx2;
  out.jx4 = weight * wn4 + (1.0 - weight) * p.jx4;
  out.djx2 = (1.0 - weight) * p.djx2;
  out.var_jx2 = clamp_variance(out.jx4 - out.jx2 * out.jx2, out.flags);
  out.inv_precision = inverse_precision(out.djx2, out.var_jx2, out.flags);
  return out;
}

inline std::vector<double> gaussian_column(const std::vector<double>& grid, int threads, auto&& fn) {
  return parallel_map(grid.size(), threads, [&](std::size_t i) { return fn(grid[i]).inv_precision; });
}

}  // namespace detail

inline MomentCurve run_chain(const RunConfig& cfg, int threads) {
  detail::require_qubits(cfg);
  const ChainGeometry geom = cfg.build_geometry();
  const int n = cfg.ensemble.n_particles;
  return sweep_chain(geom, n, cfg.theta.points(), threads);
}

inline MomentCurve run_profile(const RunConfig& cfg, int threads) {
  detail::require_qubits(cfg);
  const DensityProfile profile = cfg.build_profile();
  const int n = cfg.ensemble.n_particles;
  const std::vector<double> grid = cfg.theta.points();
  MomentCurve curve = sweep_profile(profile, n, grid, 0.0, threads);
  curve.inv_precision_gaussian = detail::gaussian_column(grid, threads, [&](double th) {
    return precision_gaussian_assumption(profile, n, SpinQuantum{}, th);
  });
  return curve;
}

inline MomentCurve run_noise(const RunConfig& cfg, int threads) {
  detail::require_qubits(cfg);
  const NoiseConfig noise = cfg.noise.value_or(NoiseConfig{});
  noise.validate();
  const int n = cfg.ensemble.n_particles;
  const std::vector<double> grid = cfg.theta.points();
  std::vector<MomentPoint> points;
  if (cfg.profile) {
    const DensityProfile profile = cfg.build_profile();
    points = parallel_map(grid.size(), threads, [&](std::size_t i) {
      return detail::mix_with_white_noise(product_point(profile, n, grid[i], noise.q_local), noise.p_global, n);
    });
  } else {
    const ChainGeometry geom = cfg.build_geometry();
    points = parallel_map(grid.size(), threads, [&](std::size_t i) {
      return detail::mix_with_white_noise(chain_point(geom, grid[i], n, noise.q_local), noise.p_global, n);
    });
  }
  MomentCurve curve;
  curve.white_noise_jx2 = 0.25 * n;
  for (std::size_t i = 0; i < grid.size(); ++i) curve.push_back(grid[i], points[i]);
  return curve;
}

inline MomentCurve run_spinj(const RunConfig& cfg, int threads) {
  const int n = cfg.ensemble.n_particles;
  const SpinQuantum j = cfg.ensemble.spin;
  const std::vector<double> grid = cfg.theta.points();
  MomentCurve gaussian = cfg.geometry && !cfg.profile
                             ? sweep_spinj_chain(cfg.build_geometry(), n, j, grid, threads)
                             : sweep_spinj_profile(cfg.build_profile(), n, j, grid, threads);
  if (!cfg.spinj_oracle) {
    gaussian.inv_precision_gaussian = gaussian.inv_precision;
    return gaussian;
  }
  MomentCurve exact = oracle::sweep_oracle_chain(cfg.build_geometry(), n, j, grid, 0.0, threads);
  exact.inv_precision_gaussian = gaussian.inv_precision;
  return exact;
}

/// Dense-oracle self-consistency and analytic cross-checks for one ensemble.
inline ValidationReport validate_oracle(const RunConfig& cfg, int threads = 1) {
  const int n = cfg.ensemble.n_particles;
  const SpinQuantum j = cfg.ensemble.spin;
  const ChainGeometry geom = cfg.geometry ? cfg.build_geometry() : equidistant_positions(n, 1.0);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> normal;

  std::vector<double> thetas = cfg.theta.count > 1 ? cfg.theta.points() : std::vector<double>{};
  for (int k = 0; k < cfg.random_thetas; ++k) thetas.push_back(angle(rng));

  ValidationReport report;
  const oracle::SpinSystem system(n, j);
  const oracle::DensityOperator singlet = oracle::build_singlet(n, j);
  const oracle::CollectiveMoments moments(system);

  auto state_error = [](const oracle::DensityOperator& rho) {
    return std::max({rho.hermiticity_error(), rho.trace_error(), -std::min(0.0, rho.min_eigenvalue())});
  };
  report.add("state: singlet is a valid density operator", state_error(singlet), 1e-10);

  if (j.is_half() && n <= 10) {
    report.add("singlet: pair mixture vs J=0 projector",
               singlet.distance(oracle::build_singlet_j0(n, j)), 1e-12);
  }

  double zero_dev = 0.0;
  for (Axis a : {Axis::x, Axis::y, Axis::z}) {
    for (int m = 1; m <= 4; ++m) zero_dev = std::max(zero_dev, std::abs(moments.moment(singlet, a, m)));
  }
  report.add("singlet: <J_l^m> = 0 at theta = 0", zero_dev, 1e-12);

  double rot_dev = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Eigen::Vector3d axis(normal(rng), normal(rng), normal(rng));
    const oracle::Matrix u = system.collective_rotation(axis, angle(rng));
    rot_dev = std::max(rot_dev, oracle::conjugate(singlet, u).distance(singlet));
  }
  report.add("singlet: homogeneous-field invariance", rot_dev, 1e-12);

  struct Sample {
    double jz2, dxy, jx2, jx4, echo, state;
  };
  const auto samples = parallel_map(thetas.size(), threads, [&](std::size_t i) {
    const oracle::DensityOperator rho = oracle::evolve_gradient(singlet, geom, thetas[i]);
    const oracle::DensityOperator back = oracle::evolve_gradient(rho, geom, -thetas[i]);
    const double jx2 = moments.moment(rho, Axis::x, 2);
    return Sample{std::abs(moments.moment(rho, Axis::z, 2)),
                  std::abs(jx2 - moments.moment(rho, Axis::y, 2)),
                  jx2,
                  moments.moment(rho, Axis::x, 4),
                  back.distance(singlet),
                  std::max(rho.hermiticity_error(), rho.trace_error())};
  });
  double jz2 = 0.0, dxy = 0.0, echo = 0.0, state = 0.0, d2 = 0.0, d4 = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const Sample& s = samples[i];
    jz2 = std::max(jz2, s.jz2);
    dxy = std::max(dxy, s.dxy);
    echo = std::max(echo, s.echo);
    state = std::max(state, s.state);
    if (j.is_half()) {
      d2 = std::max(d2, std::abs(s.jx2 - jx2_chain(geom, thetas[i], n)));
      d4 = std::max(d4, std::abs(s.jx4 - jx4_chain(geom, thetas[i], n)));
    } else {
      d2 = std::max(d2, std::abs(s.jx2 - jx2_chain_spinj(geom, n, j, thetas[i])));
    }
  }
  report.add("dynamics: <J_z^2> = 0", jz2, 1e-12);
  report.add("dynamics: <J_x^2> = <J_y^2>", dxy, 1e-12);
  report.add("dynamics: gradient echo restores the singlet", echo, 1e-12);
  report.add("dynamics: evolution keeps trace and hermiticity", state, 1e-12);
  if (j.is_half()) {
    report.add("analytic <J_x^2> vs oracle", d2, 1e-10);
    report.add("analytic <J_x^4> vs oracle", d4, 1e-10);
  } else {
    report.add("kappa-scaled <J_x^2> vs oracle", d2, 1e-10);
  }

  if (j.is_half()) {
    std::vector<double> qs;
    if (cfg.noise && cfg.noise->q_local > 0.0) qs.push_back(cfg.noise->q_local);
    else qs = {0.2, 0.5};
    double n2 = 0.0, n4 = 0.0, nstate = 0.0;
    for (double q : qs) {
      const oracle::DensityOperator noisy = oracle::depolarize(singlet, q);
      nstate = std::max(nstate, state_error(noisy));
      for (double th : thetas) {
        const oracle::DensityOperator rho = oracle::evolve_gradient(noisy, geom, th);
        n2 = std::max(n2, std::abs(moments.moment(rho, Axis::x, 2) - jx2_noisy_chain(geom, n, th, q)));
        n4 = std::max(n4, std::abs(moments.moment(rho, Axis::x, 4) - jx4_noisy_chain(geom, n, th, q)));
      }
    }
    report.add("noise: depolarized state is valid", nstate, 1e-10);
    report.add("noise: analytic <J_x^2> vs depolarized oracle", n2, 1e-10);
    report.add("noise: analytic <J_x^4> vs depolarized oracle", n4, 1e-10);

    const oracle::JxSpectrum spectrum(system);
    const oracle::DensityOperator mixed = oracle::DensityOperator::fully_mixed(system);
    report.add("projector: fully mixed vs binomial",
               std::abs(spectrum.value(mixed, 0.0) - projector_mixed_expectation(n)), 1e-12);
    report.add("projector: singlet at theta = 0", std::abs(spectrum.value(singlet, 0.0) - 1.0), 1e-12);

    double prec = 0.0;
    for (double th : thetas) {
      if (th < 0.1) continue;
      const double exact = precision_chain(geom, th, n);
      const double numeric = oracle::oracle_precision(
          [&](double t) { return oracle::evolved_jx_moments(singlet, geom, t, moments); }, th);
      prec = std::max(prec, std::abs(numeric - exact) / std::max(exact, 1.0));
    }
    report.add("precision: oracle stencil vs analytic", prec, 1e-6);
  }
  return report;
}

inline ValidationReport run_compare(const RunConfig& cfg) {
  if (!cfg.compare) throw ConfigError("[compare] section required");
  return compare_curves(read_curve(cfg.compare->a), read_curve(cfg.compare->b), cfg.compare->tolerance);
}

inline RunResult run(const RunConfig& cfg, int threads = 1) {
  RunResult r;
  switch (cfg.mode) {
    case Mode::chain: r.curve = run_chain(cfg, threads); break;
    case Mode::profile: r.curve = run_profile(cfg, threads); break;
    case Mode::noise: r.curve = run_noise(cfg, threads); break;
    case Mode::spinj: r.curve = run_spinj(cfg, threads); break;
    case Mode::oracle_validate: r.report = validate_oracle(cfg, threads); break;
    case Mode::compare: r.report = run_compare(cfg); break;
  }
  return r;
}

}  // namespace gradiometry::runner

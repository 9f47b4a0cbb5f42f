#pragma once

// Spin-j ensembles. The second moment is the spin-1/2 curve scaled by
// kappa_j = 4 j (j+1) / 3; the fourth moment is only available under the
// Gaussian assumption <J_x^4> ~ 3 <J_x^2>^2 (exact values come from the oracle).

#include <cmath>
#include <span>
#include <string>

#include "gradiometry/chain_dynamics.hpp"
#include "gradiometry/ensemble.hpp"
#include "gradiometry/moment_curve.hpp"
#include "gradiometry/parallel.hpp"
#include "gradiometry/profile_dynamics.hpp"

namespace gradiometry {

inline double kappa(SpinQuantum j) {
  const double twice = j.twice();
  return twice * (twice + 2.0) / 3.0;
}

struct SpinScaling {
  double kappa = 1.0;
  double wn_variance = 0.0;  // N j(j+1)/3

  static SpinScaling of(int n, SpinQuantum j) {
    const double k = gradiometry::kappa(j);
    return {k, 0.25 * k * n};
  }
};

namespace detail {

inline void require_spinj_chain(const ChainGeometry& geom, int n, SpinQuantum j) {
  if (j.is_half()) {
    require_chain_singlet(geom, n);
  } else {
    if (n < 2) throw DomainError("need N >= 2");
    geom.require_size(n);
  }
}

}  // namespace detail

inline double jx2_chain_spinj(const ChainGeometry& geom, int n, SpinQuantum j, double theta) {
  detail::require_spinj_chain(geom, n, j);
  return kappa(j) * DephasingSums(geom, theta).total() / (4.0 * (n - 1.0));
}

inline double jx2_product_spinj(const DensityProfile& profile, int n, SpinQuantum j, double theta) {
  if (const ChainGeometry* g = profile.chain()) return jx2_chain_spinj(*g, n, j, theta);
  detail::require_smooth_dynamics(profile, theta);
  return kappa(j) * 0.25 * n * profile_phasor(profile, theta).dephasing;
}

inline double gaussian_assumption_jx4(double jx2) {
  if (jx2 < 0.0) throw DomainError("second moment must be non-negative");
  return 3.0 * jx2 * jx2;
}

/// Var(J_x^2) implied by the Gaussian assumption.
inline double gaussian_assumption_variance(double jx2) { return 2.0 * jx2 * jx2; }

struct GaussianPrecision {
  double inv_precision = 0.0;
  bool divergent = false;  // theta = 0: the bound diverges, value reported as 0
};

namespace detail {

inline GaussianPrecision gaussian_precision(double jx2, double djx2) {
  if (jx2 <= 0.0) return {0.0, true};
  return {std::abs(djx2) / (std::sqrt(2.0) * jx2), false};
}

/// <J_x^2> and its slope for spin j on a chain, kappa included.
inline std::pair<double, double> spinj_chain_moment(const ChainGeometry& geom, int n, SpinQuantum j,
                                                    double theta) {
  detail::require_spinj_chain(geom, n, j);
  const DephasingSums sums(geom, theta);
  const double scale = kappa(j) / (4.0 * (n - 1.0));
  double du = sums.total_derivative();
  if (std::abs(du) <= 1e-13 * sums.derivative_scale()) du = 0.0;
  return {scale * sums.total(), scale * du};
}

inline std::pair<double, double> spinj_profile_moment(const DensityProfile& profile, int n,
                                                      SpinQuantum j, double theta) {
  if (const ChainGeometry* g = profile.chain()) return spinj_chain_moment(*g, n, j, theta);
  detail::require_smooth_dynamics(profile, theta);
  const ProfilePhasor ph = profile_phasor(profile, theta);
  const double scale = kappa(j) * 0.25 * n;
  return {scale * ph.dephasing, scale * ph.dephasing_derivative};
}

inline MomentPoint gaussian_point(double jx2, double djx2) {
  MomentPoint p;
  p.jx2 = jx2;
  p.jx4 = gaussian_assumption_jx4(jx2);
  p.var_jx2 = gaussian_assumption_variance(jx2);
  p.djx2 = djx2;
  const GaussianPrecision g = gaussian_precision(jx2, djx2);
  p.inv_precision = g.inv_precision;
  if (g.divergent) p.flags |= kDivergent;
  else if (djx2 == 0.0) p.flags |= kStationary;
  return p;
}

}  // namespace detail

/// (Delta theta)^-1 = |d<J_x^2>/dtheta| / (sqrt(2) <J_x^2>); kappa_j cancels.
inline GaussianPrecision precision_gaussian_assumption(const ChainGeometry& geom, int n,
                                                       SpinQuantum j, double theta) {
  const auto [m, dm] = detail::spinj_chain_moment(geom, n, j, theta);
  return detail::gaussian_precision(m, dm);
}

inline GaussianPrecision precision_gaussian_assumption(const DensityProfile& profile, int n,
                                                       SpinQuantum j, double theta) {
  const auto [m, dm] = detail::spinj_profile_moment(profile, n, j, theta);
  return detail::gaussian_precision(m, dm);
}

/// Spin-j chain curve: exact kappa-scaled <J_x^2>, Gaussian-assumption fourth
/// moment, variance and precision.
inline MomentCurve sweep_spinj_chain(const ChainGeometry& geom, int n, SpinQuantum j,
                                     std::span<const double> grid, int threads = 1) {
  detail::require_spinj_chain(geom, n, j);
  const auto points = parallel_map(grid.size(), threads, [&](std::size_t i) {
    const auto [m, dm] = detail::spinj_chain_moment(geom, n, j, grid[i]);
    return detail::gaussian_point(m, dm);
  });
  MomentCurve curve;
  curve.white_noise_jx2 = SpinScaling::of(n, j).wn_variance;
  for (std::size_t i = 0; i < grid.size(); ++i) curve.push_back(grid[i], points[i]);
  return curve;
}

inline MomentCurve sweep_spinj_profile(const DensityProfile& profile, int n, SpinQuantum j,
                                       std::span<const double> grid, int threads = 1) {
  const auto points = parallel_map(grid.size(), threads, [&](std::size_t i) {
    const auto [m, dm] = detail::spinj_profile_moment(profile, n, j, grid[i]);
    return detail::gaussian_point(m, dm);
  });
  MomentCurve curve;
  curve.white_noise_jx2 = SpinScaling::of(n, j).wn_variance;
  for (std::size_t i = 0; i < grid.size(); ++i) curve.push_back(grid[i], points[i]);
  return curve;
}

}  // namespace gradiometry

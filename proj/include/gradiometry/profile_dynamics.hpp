#pragma once

// Singlet dynamics for particles drawn independently from a smooth density
// profile, plus the theta = 0 precision for any (possibly correlated)
// distribution. Delta-chain profiles are routed to the fixed-chain formulas.

#include <cmath>
#include <span>
#include <string>
#include <utility>

#include "gradiometry/chain_dynamics.hpp"
#include "gradiometry/moment_curve.hpp"
#include "gradiometry/parallel.hpp"
#include "gradiometry/profile.hpp"

namespace gradiometry {

namespace detail {

inline void require_smooth_dynamics(const DensityProfile& profile, double theta) {
  if (profile.pair_covariance() != 0.0 && theta != 0.0 && profile.chain() == nullptr) {
    throw DomainError(
        "finite-theta dynamics need a product profile; pair_covariance is only used at theta = 0");
  }
}

}  // namespace detail

/// Moments and precision for N particles, with optional per-site white noise q.
/// Written in terms of H = 1 - (1-q)^2 (C~^2 + S~^2):
///   <J_x^2> = N H / 4,  <J_x^4> = N (4H + 3(N-2) H^2) / 16,
///   Var(J_x^2) = N (4H + 2(N-3) H^2) / 16.
inline MomentPoint product_point(const DensityProfile& profile, int n, double theta, double q = 0.0) {
  if (const ChainGeometry* g = profile.chain()) return chain_point(*g, theta, n, q);
  if (n < 2) throw DomainError("need N >= 2");
  detail::require_noise_weight(q);
  detail::require_smooth_dynamics(profile, theta);
  const double nn = n;
  const double t = (1.0 - q) * (1.0 - q);
  const ProfilePhasor ph = profile_phasor(profile, theta);
  const double big_h = q * (2.0 - q) + t * ph.dephasing;

  MomentPoint p;
  p.jx2 = 0.25 * nn * big_h;
  p.jx4 = nn * (4.0 * big_h + 3.0 * (nn - 2.0) * big_h * big_h) / 16.0;
  p.var_jx2 = clamp_variance(nn * (4.0 * big_h + 2.0 * (nn - 3.0) * big_h * big_h) / 16.0, p.flags);
  p.djx2 = 0.25 * nn * t * ph.dephasing_derivative;
  p.inv_precision = inverse_precision(p.djx2, p.var_jx2, p.flags);
  return p;
}

/// <J_x^2> = (N/4)(1 - C~^2 - S~^2).
inline double jx2_product(const DensityProfile& profile, int n, double theta) {
  return product_point(profile, n, theta).jx2;
}

inline double jx4_product(const DensityProfile& profile, int n, double theta) {
  return product_point(profile, n, theta).jx4;
}

inline double precision_product(const DensityProfile& profile, int n, double theta) {
  return product_point(profile, n, theta).inv_precision;
}

/// (Delta theta)^-2 at theta = 0: N [sigma^2 - cov(z1, z2)] / L^2.
inline double precision_zero_general(const DensityProfile& profile, int n) {
  const double len = profile.char_length();
  return n * (profile.variance() - profile.pair_covariance()) / (len * len);
}

/// Distribution averages of I_2 and I_4.
inline std::pair<double, double> i2_i4_averages(const DensityProfile& profile, int n, double theta) {
  if (const ChainGeometry* g = profile.chain()) {
    g->require_size(n);
    return {i2_chain(*g, theta), i4_chain_char_fn(*g, theta)};
  }
  detail::require_smooth_dynamics(profile, theta);
  const double nn = n;
  const double g = 1.0 - profile_phasor(profile, theta).dephasing;
  return {nn * (nn - 1.0) * g, nn * (nn - 1.0) * (nn - 2.0) * (nn - 3.0) * g * g};
}

inline MomentCurve sweep_profile(const DensityProfile& profile, int n, std::span<const double> grid,
                                 double q = 0.0, int threads = 1) {
  const auto points = parallel_map(grid.size(), threads,
                                   [&](std::size_t i) { return product_point(profile, n, grid[i], q); });
  MomentCurve curve;
  curve.white_noise_jx2 = 0.25 * n;
  for (std::size_t i = 0; i < grid.size(); ++i) curve.push_back(grid[i], points[i]);
  return curve;
}

}  // namespace gradiometry

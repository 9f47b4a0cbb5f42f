#pragma once

// Moment dynamics of a spin-1/2 singlet on a fixed chain under a linear field
// gradient, and the precision of estimating the accumulated phase theta from
// measuring <J_x^2>.
//
// Two evaluation routes are provided:
//  * the shipped route (jx2_chain, jx4_chain, chain_point) works with pairwise
//    dephasing sums centered on the mean position and stays accurate as
//    theta -> 0, where the moments are O(theta^2) differences of O(N^2) terms;
//  * the literal route (i2_chain, i4_chain_*, jx4_chain_literal) evaluates the
//    C, S, X_{k,l} and characteristic-function expressions as written.
// The two agree identically in exact arithmetic.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "gradiometry/ensemble.hpp"
#include "gradiometry/errors.hpp"
#include "gradiometry/moment_curve.hpp"
#include "gradiometry/parallel.hpp"

namespace gradiometry {

namespace detail {

inline void require_chain_singlet(const ChainGeometry& geom, int n) {
  if (n < 2 || n % 2 != 0) {
    throw NoSinglet("spin-1/2 chain singlet needs even N >= 2, got " + std::to_string(n));
  }
  geom.require_size(n);
}

inline void require_noise_weight(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("noise weight q must lie in [0,1]");
}

}  // namespace detail

/// I_2 = sum_{n != m} (c_n c_m + s_n s_m) = C^2 + S^2 - N.
inline double i2_chain(const ChainGeometry& geom, double theta) {
  const auto [c, s] = trig_sums(geom, theta);
  return c * c + s * s - geom.size();
}

/// I_4 through the single-index power sums X_{k,l}.
inline double i4_chain_power_sum(const ChainGeometry& geom, double theta) {
  auto x = [&](int k, int l) { return power_sums(geom, theta, k, l); };
  const double x10 = x(1, 0), x01 = x(0, 1), x20 = x(2, 0), x02 = x(0, 2), x11 = x(1, 1);
  const double x30 = x(3, 0), x03 = x(0, 3), x21 = x(2, 1), x12 = x(1, 2);
  const double x40 = x(4, 0), x04 = x(0, 4), x22 = x(2, 2);
  const double x10s = x10 * x10;
  const double x01s = x01 * x01;
  return x10s * x10s + x01s * x01s + 2.0 * x10s * x01s              //
         - 6.0 * x40 - 6.0 * x04 - 12.0 * x22                       //
         + 3.0 * x20 * x20 + 3.0 * x02 * x02                        //
         + 8.0 * x30 * x10 + 8.0 * x03 * x01 + 4.0 * x11 * x11      //
         + 8.0 * x21 * x01 + 8.0 * x12 * x10 + 2.0 * x20 * x02      //
         - 6.0 * x20 * x10s - 6.0 * x02 * x01s                      //
         - 2.0 * x20 * x01s - 2.0 * x02 * x10s - 8.0 * x11 * x10 * x01;
}

/// I_4 through the empirical characteristic function at alpha and 2 alpha.
inline double i4_chain_char_fn(const ChainGeometry& geom, double theta) {
  const double n = geom.size();
  const double alpha = theta / geom.char_length();
  const std::complex<double> f1 = char_fn(geom, alpha);
  const std::complex<double> f2 = char_fn(geom, 2.0 * alpha);
  const double a2 = std::norm(f1);
  return n * (2.0 * (n - 3.0) - 4.0 * n * (n - 2.0) * a2 + n * n * n * a2 * a2 +
              n * std::norm(f2) - 2.0 * n * n * std::real(f1 * f1 * std::conj(f2)));
}

enum class I4Form { power_sum, char_fn };

/// Fourth moment exactly as the closed form reads, with I_4 from either route.
inline double jx4_chain_literal(const ChainGeometry& geom, double theta, int n,
                                I4Form form = I4Form::char_fn) {
  detail::require_chain_singlet(geom, n);
  const double nn = n;
  const double i2 = i2_chain(geom, theta);
  const double i4 =
      form == I4Form::power_sum ? i4_chain_power_sum(geom, theta) : i4_chain_char_fn(geom, theta);
  return (3.0 * nn * nn - 2.0 * nn - (6.0 * nn - 8.0) / (nn - 1.0) * i2 +
          3.0 / ((nn - 1.0) * (nn - 3.0)) * i4) /
         16.0;
}

/// Moments and precision with per-site white noise of weight q applied to the
/// initial singlet (q = 0 is the ideal singlet). Two-body correlations are
/// damped by (1-q)^2 and four-body ones by (1-q)^4.
inline MomentPoint chain_point(const ChainGeometry& geom, double theta, int n, double q = 0.0) {
  detail::require_chain_singlet(geom, n);
  detail::require_noise_weight(q);
  const double nn = n;
  const double t = (1.0 - q) * (1.0 - q);
  const double eps = q * (2.0 - q);  // 1 - t without cancellation

  const DephasingSums sums(geom, theta);
  const double u = sums.total();
  const double e = sums.disjoint_pairs();

  MomentPoint p;
  p.jx2 = 0.25 * nn * eps + t * u / (4.0 * (nn - 1.0));
  const double constant = eps * (3.0 * nn * nn - 2.0 * nn - (3.0 * nn * nn - 6.0 * nn) * t);
  const double two_body = (t * (6.0 * nn - 8.0) - 6.0 * t * t * (nn - 2.0)) * u / (nn - 1.0);
  const double four_body = 3.0 * t * t * e / ((nn - 1.0) * (nn - 3.0));
  p.jx4 = (constant + two_body + four_body) / 16.0;

  double du = sums.total_derivative();
  if (std::abs(du) <= 1e-13 * sums.derivative_scale()) du = 0.0;
  p.djx2 = t * du / (4.0 * (nn - 1.0));
  p.var_jx2 = clamp_variance(p.jx4 - p.jx2 * p.jx2, p.flags);
  p.inv_precision = inverse_precision(p.djx2, p.var_jx2, p.flags);
  return p;
}

/// <J_x^2>(theta) = (N/4){1 + [N - C^2 - S^2]/(N(N-1))}.
inline double jx2_chain(const ChainGeometry& geom, double theta, int n) {
  detail::require_chain_singlet(geom, n);
  return DephasingSums(geom, theta).total() / (4.0 * (n - 1.0));
}

/// <J_x^4>(theta). N = 2 is accepted: the four-distinct-index term is empty.
inline double jx4_chain(const ChainGeometry& geom, double theta, int n) {
  return chain_point(geom, theta, n).jx4;
}

/// Analytic d<J_x^2>/dtheta.
inline double djx2_dtheta_chain(const ChainGeometry& geom, double theta, int n) {
  detail::require_chain_singlet(geom, n);
  return DephasingSums(geom, theta).total_derivative() / (4.0 * (n - 1.0));
}

/// (Delta theta)^-1 by error propagation; 0 where the slope of <J_x^2> vanishes.
inline double precision_chain(const ChainGeometry& geom, double theta, int n) {
  return chain_point(geom, theta, n).inv_precision;
}

/// (Delta theta)^-2 at theta = 0: N [sigma^2 - cov(z1, z2)] / L^2.
inline double precision_zero_chain(const ChainGeometry& geom, int n) {
  detail::require_chain_singlet(geom, n);
  const PositionStats st = position_stats(geom);
  const double len = geom.char_length();
  return n * (st.variance - st.pair_covariance) / (len * len);
}

inline MomentCurve sweep_chain(const ChainGeometry& geom, int n, std::span<const double> grid,
                               int threads = 1) {
  detail::require_chain_singlet(geom, n);
  const auto points =
      parallel_map(grid.size(), threads, [&](std::size_t i) { return chain_point(geom, grid[i], n); });
  MomentCurve curve;
  curve.white_noise_jx2 = 0.25 * n;
  for (std::size_t i = 0; i < grid.size(); ++i) curve.push_back(grid[i], points[i]);
  return curve;
}

}  // namespace gradiometry

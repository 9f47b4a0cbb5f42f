#pragma once

// Imperfect singlets: per-site white noise of weight q on the initial state,
// and a global admixture p of the fully mixed state for the projector-based
// readout.

#include <cmath>
#include <numbers>
#include <string>

#include "gradiometry/chain_dynamics.hpp"
#include "gradiometry/profile_dynamics.hpp"

namespace gradiometry {

struct NoiseConfig {
  double q_local = 0.0;
  double p_global = 0.0;

  void validate() const {
    if (!(q_local >= 0.0 && q_local <= 1.0)) throw DomainError("q_local must lie in [0,1]");
    if (!(p_global >= 0.0 && p_global <= 1.0)) throw DomainError("p_global must lie in [0,1]");
  }
};

inline double jx2_noisy_product(const DensityProfile& profile, int n, double theta, double q) {
  return product_point(profile, n, theta, q).jx2;
}

inline double jx4_noisy_product(const DensityProfile& profile, int n, double theta, double q) {
  return product_point(profile, n, theta, q).jx4;
}

inline double jx2_noisy_chain(const ChainGeometry& geom, int n, double theta, double q) {
  return chain_point(geom, theta, n, q).jx2;
}

/// Chain fourth moment with noise: two-body sums scale by (1-q)^2, four-body
/// sums by (1-q)^4, the white-noise constant 3N^2 - 2N is untouched.
inline double jx4_noisy_chain(const ChainGeometry& geom, int n, double theta, double q) {
  return chain_point(geom, theta, n, q).jx4;
}

/// (Delta theta)^-1 from measuring <J_x^2> on the noisy state. Zero at theta = 0
/// for every q > 0, since the noise keeps Var(J_x^2) finite while the slope vanishes.
inline double precision_noisy(const DensityProfile& profile, int n, double theta, double q) {
  if (q == 1.0) throw DomainError("q = 1 leaves no gradient signal");
  return product_point(profile, n, theta, q).inv_precision;
}

enum class BinomialMode { exact, asymptotic };

inline constexpr int kBinomialProductLimit = 1000000;

/// <P_{J_x=0}> on the fully mixed state: 2^-N binom(N, N/2), or sqrt(2/(pi N)).
inline double projector_mixed_expectation(int n, BinomialMode mode = BinomialMode::exact) {
  if (n < 2 || n % 2 != 0) throw NoSinglet("J_x = 0 subspace needs even N, got " + std::to_string(n));
  if (mode == BinomialMode::asymptotic) return std::sqrt(2.0 / (std::numbers::pi * n));
  const int half = n / 2;
  if (half <= kBinomialProductLimit) {
    // binom(2m, m) / 4^m = prod_{k=1}^{m} (2k-1) / (2k); every factor is below 1.
    double r = 1.0;
    for (int k = 1; k <= half; ++k) r *= (2.0 * k - 1.0) / (2.0 * k);
    return r;
  }
  return std::exp(std::lgamma(n + 1.0) - 2.0 * std::lgamma(half + 1.0) - n * std::numbers::ln2);
}

/// Projector expectation on p * mixed + (1-p) * singlet.
inline double projector_noisy_curve(double p_global, int n, double proj_singlet_value,
                                    BinomialMode mode = BinomialMode::exact) {
  if (!(p_global >= 0.0 && p_global <= 1.0)) throw DomainError("p_global must lie in [0,1]");
  return p_global * projector_mixed_expectation(n, mode) + (1.0 - p_global) * proj_singlet_value;
}

/// <J_x^2> on p * mixed + (1-p) * singlet.
inline double second_moment_global_mix(double p_global, int n, double jx2_singlet) {
  if (!(p_global >= 0.0 && p_global <= 1.0)) throw DomainError("p_global must lie in [0,1]");
  return p_global * 0.25 * n + (1.0 - p_global) * jx2_singlet;
}

}  // namespace gradiometry

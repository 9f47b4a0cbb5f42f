#pragma once

// Reduced-state structure of the permutationally invariant spin-1/2 singlet.
// All quantities are ratios, so nothing here forms a double factorial of N
// beyond the explicit pairing_count.

#include <cstdint>
#include <string>

#include "gradiometry/errors.hpp"

namespace gradiometry {

enum class Axis { x, y, z };

inline char axis_name(Axis a) {
  switch (a) {
    case Axis::x: return 'x';
    case Axis::y: return 'y';
    case Axis::z: return 'z';
  }
  return '?';
}

/// Number of ways to split N particles into two-particle singlets, (N-1)!!.
/// Overflows uint64 beyond N = 40.
inline std::uint64_t pairing_count(int n) {
  if (n < 2 || n % 2 != 0) throw NoSinglet("pairing needs even N >= 2, got " + std::to_string(n));
  if (n > 40) throw DomainError("(N-1)!! overflows 64 bits for N > 40");
  std::uint64_t count = 1;
  for (int k = n - 1; k > 1; k -= 2) count *= static_cast<std::uint64_t>(k);
  return count;
}

/// Mixing weights of the four-particle reduced state: identity/16 (alpha),
/// two pair singlets (beta, 3 arrangements), one pair singlet next to
/// identity/4 (gamma, 6 arrangements).
struct ReducedWeights {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double p_singlet = 0.0;  // weight of the pair singlet in the two-particle state
};

inline ReducedWeights reduced_weights(int n) {
  if (n <= 3) throw DomainError("four-particle reduced state needs N >= 4");
  if (n % 2 != 0) throw NoSinglet("odd N=" + std::to_string(n));
  const double nm1 = n - 1.0;
  const double beta = 1.0 / (nm1 * (n - 3.0));
  const double gamma = 1.0 / nm1 - beta;
  return {1.0 - 3.0 * beta - 6.0 * gamma, beta, gamma, 1.0 / nm1};
}

/// <j_k (x) j_l> in the two-particle reduced state.
inline double two_body_correlator(int n, Axis k, Axis l) {
  if (n < 2 || n % 2 != 0) throw NoSinglet("two-body correlator needs even N >= 2");
  return k == l ? -1.0 / (4.0 * (n - 1.0)) : 0.0;
}

enum class FourBodyPattern { xxxx, yyyy, xxyy, mixed_odd };

/// Four-body correlators <j_a j_b j_c j_d> over distinct particles, N >= 6.
/// Patterns with an odd number of x (or y) factors vanish by SU(2) invariance.
inline double four_body_correlator(int n, FourBodyPattern pattern) {
  if (n < 6) throw DomainError("four-body closed form needs N >= 6, got " + std::to_string(n));
  if (n % 2 != 0) throw NoSinglet("odd N=" + std::to_string(n));
  const double denom = 16.0 * (n - 1.0) * (n - 3.0);
  switch (pattern) {
    case FourBodyPattern::xxxx:
    case FourBodyPattern::yyyy: return 3.0 / denom;
    case FourBodyPattern::xxyy: return 1.0 / denom;
    case FourBodyPattern::mixed_odd: return 0.0;
  }
  return 0.0;
}

}  // namespace gradiometry

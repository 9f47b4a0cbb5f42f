#pragma once

// Geometry of a quasi-1D ensemble along z and the phasor sums every analytic
// moment formula is built from. Positions are plain reals; the phase a particle
// at z accumulates is z * theta / L.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gradiometry/errors.hpp"
#include "gradiometry/summation.hpp"

namespace gradiometry {

/// Spin quantum number j, stored as 2j so half-integers are exact.
class SpinQuantum {
 public:
  constexpr SpinQuantum() = default;

  static SpinQuantum from_twice(int two_j) {
    if (two_j < 1) throw DomainError("spin j must be >= 1/2, got 2j=" + std::to_string(two_j));
    SpinQuantum s;
    s.two_j_ = two_j;
    return s;
  }

  static SpinQuantum from_value(double j) {
    const double twice = 2.0 * j;
    const double rounded = std::round(twice);
    if (!std::isfinite(j) || std::abs(twice - rounded) > 1e-12) {
      throw DomainError("spin j must be a half-integer, got " + std::to_string(j));
    }
    return from_twice(static_cast<int>(rounded));
  }

  /// Accepts "1/2", "3/2", "1", "0.5".
  static SpinQuantum parse(const std::string& text) {
    const auto slash = text.find('/');
    try {
      if (slash == std::string::npos) return from_value(std::stod(text));
      const int num = std::stoi(text.substr(0, slash));
      const int den = std::stoi(text.substr(slash + 1));
      if (den == 2) return from_twice(num);
      if (den == 1) return from_twice(2 * num);
    } catch (const std::logic_error&) {
    }
    throw DomainError("cannot parse spin quantum number '" + text + "'");
  }

  [[nodiscard]] constexpr int twice() const { return two_j_; }
  [[nodiscard]] constexpr double value() const { return 0.5 * two_j_; }
  [[nodiscard]] constexpr int multiplicity() const { return two_j_ + 1; }
  [[nodiscard]] constexpr bool is_half() const { return two_j_ == 1; }

  friend constexpr bool operator==(SpinQuantum, SpinQuantum) = default;

 private:
  int two_j_ = 1;
};

struct EnsembleSpec {
  int n_particles = 2;
  SpinQuantum spin{};

  void validate() const {
    if (n_particles < 2) {
      throw DomainError("ensemble needs at least 2 particles, got " + std::to_string(n_particles));
    }
  }

  /// A spin-1/2 singlet needs an even particle count.
  void require_singlet() const {
    validate();
    if (spin.is_half() && n_particles % 2 != 0) {
      throw NoSinglet("spin-1/2 ensemble with odd N=" + std::to_string(n_particles));
    }
  }
};

/// Fixed particle positions along z plus the characteristic length L.
class ChainGeometry {
 public:
  ChainGeometry(std::vector<double> positions, double char_length)
      : positions_(std::move(positions)), char_length_(char_length) {
    if (!(char_length_ > 0.0) || !std::isfinite(char_length_)) {
      throw InvalidGeometry("characteristic length must be positive and finite");
    }
    if (positions_.empty()) throw InvalidGeometry("no positions");
    for (double z : positions_) {
      if (!std::isfinite(z)) throw InvalidGeometry("non-finite position");
    }
  }

  [[nodiscard]] std::span<const double> positions() const { return positions_; }
  [[nodiscard]] int size() const { return static_cast<int>(positions_.size()); }
  [[nodiscard]] double char_length() const { return char_length_; }

  /// Phase of particle k at accumulated phase theta.
  [[nodiscard]] double phase(int k, double theta) const {
    return positions_[static_cast<std::size_t>(k)] * theta / char_length_;
  }

  void require_size(int n) const {
    if (size() != n) {
      throw InvalidGeometry("geometry has " + std::to_string(size()) +
                            " positions but N=" + std::to_string(n));
    }
  }

 private:
  std::vector<double> positions_;
  double char_length_;
};

/// z_n = (n-1) * spacing + offset, with L = spacing.
inline ChainGeometry equidistant_positions(int n, double spacing, double offset = 0.0) {
  if (n < 2) throw InvalidGeometry("equidistant chain needs n >= 2");
  if (!(spacing > 0.0)) throw InvalidGeometry("spacing must be positive");
  std::vector<double> z(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) z[static_cast<std::size_t>(k)] = k * spacing + offset;
  return ChainGeometry(std::move(z), spacing);
}

struct TrigSums {
  double cos_sum = 0.0;  // C
  double sin_sum = 0.0;  // S
};

inline TrigSums trig_sums(const ChainGeometry& geom, double theta) {
  CompensatedSum c;
  CompensatedSum s;
  for (int k = 0; k < geom.size(); ++k) {
    const double phi = geom.phase(k, theta);
    c += std::cos(phi);
    s += std::sin(phi);
  }
  return {c.value(), s.value()};
}

/// X_{k,l} = sum_n cos^k(phi_n) sin^l(phi_n), k + l <= 4.
inline double power_sums(const ChainGeometry& geom, double theta, int k, int l) {
  if (k < 0 || l < 0 || k + l > 4) throw DomainError("power_sums requires 0 <= k+l <= 4");
  CompensatedSum acc;
  for (int n = 0; n < geom.size(); ++n) {
    const double phi = geom.phase(n, theta);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    double term = 1.0;
    for (int i = 0; i < k; ++i) term *= c;
    for (int i = 0; i < l; ++i) term *= s;
    acc += term;
  }
  return acc.value();
}

/// Empirical characteristic function (1/N) sum_k exp(i alpha z_k).
inline std::complex<double> char_fn(const ChainGeometry& geom, double alpha) {
  CompensatedComplexSum acc;
  for (double z : geom.positions()) acc.add(std::polar(1.0, alpha * z));
  return acc.value() / static_cast<double>(geom.size());
}

/// Characteristic function of the M-body marginal of the permutation-averaged
/// chain density, evaluated through the M -> M-1 recurrence. Returns 0 when
/// M exceeds N (no M distinct particles).
inline std::complex<double> restricted_char_fn(const ChainGeometry& geom,
                                               std::span<const double> alphas) {
  const int n = geom.size();
  const int m = static_cast<int>(alphas.size());
  if (m == 0) return 1.0;
  if (m > n) return 0.0;
  if (m == 1) return char_fn(geom, alphas[0]);
  std::vector<double> head(alphas.begin(), alphas.end() - 1);
  const double last = alphas.back();
  std::complex<double> result = static_cast<double>(n) * char_fn(geom, last) *
                                restricted_char_fn(geom, head);
  for (std::size_t l = 0; l < head.size(); ++l) {
    std::vector<double> shifted = head;
    shifted[l] += last;
    result -= restricted_char_fn(geom, shifted);
  }
  return result / static_cast<double>(n - m + 1);
}

struct PositionStats {
  double mean = 0.0;
  double variance = 0.0;
  double pair_covariance = 0.0;
};

/// Mean, variance and two-body covariance of the permutation-averaged chain
/// distribution. For a fixed chain the covariance is -variance/(N-1).
inline PositionStats position_stats(const ChainGeometry& geom) {
  const int n = geom.size();
  if (n < 2) throw InvalidGeometry("position_stats needs N >= 2");
  CompensatedSum sum;
  for (double z : geom.positions()) sum += z;
  const double mean = sum.value() / n;
  CompensatedSum dev;
  CompensatedSum dev2;
  for (double z : geom.positions()) {
    const double d = z - mean;
    dev += d;
    dev2 += d * d;
  }
  const double variance = dev2.value() / n;
  // sum_{k != l} d_k d_l = (sum d)^2 - sum d^2; the covariance is shift invariant.
  const double cross = dev.value() * dev.value() - dev2.value();
  return {mean, variance, cross / (static_cast<double>(n) * (n - 1))};
}

/// Sums over the pairwise dephasing u_km = 1 - cos(phi_k - phi_m), computed in
/// O(N) from phases centered on the mean position so that no large, nearly
/// equal quantities are subtracted near theta = 0.
///
///   U  = sum_{k,m} u_km                       = N^2 - C^2 - S^2
///   R2 = sum_k (sum_m u_km)^2
///   W  = sum_{k,m} u_km^2
///   E  = sum over ordered pairs (k,m), (l,n) with k,l,m,n distinct of u_km u_ln
///      = U^2 - 4 R2 + 2 W
class DephasingSums {
 public:
  DephasingSums(const ChainGeometry& geom, double theta) : n_(geom.size()) {
    CompensatedSum zsum;
    for (double z : geom.positions()) zsum += z;
    const double zmean = zsum.value() / n_;
    const double inv_len = 1.0 / geom.char_length();

    u_.resize(static_cast<std::size_t>(n_));
    s_.resize(static_cast<std::size_t>(n_));
    CompensatedSum su, ss, suu, sss, sus, sws, swc, sabs;
    for (int k = 0; k < n_; ++k) {
      const double w = (geom.positions()[static_cast<std::size_t>(k)] - zmean) * inv_len;
      const double psi = w * theta;
      const double half = std::sin(0.5 * psi);
      const double u = 2.0 * half * half;
      const double s = std::sin(psi);
      u_[static_cast<std::size_t>(k)] = u;
      s_[static_cast<std::size_t>(k)] = s;
      su += u;
      ss += s;
      suu += u * u;
      sss += s * s;
      sus += u * s;
      sws += w * s;
      swc += w * std::cos(psi);
      sabs += std::abs(w);
    }
    su_ = su.value();
    ss_ = ss.value();
    suu_ = suu.value();
    sss_ = sss.value();
    sus_ = sus.value();
    sws_ = sws.value();
    swc_ = swc.value();
    abs_weight_ = sabs.value();
  }

  [[nodiscard]] int size() const { return n_; }

  [[nodiscard]] double total() const {
    const double n = n_;
    return 2.0 * n * su_ - su_ * su_ - ss_ * ss_;
  }

  /// dU/dtheta.
  [[nodiscard]] double total_derivative() const {
    return 2.0 * (n_ - su_) * sws_ - 2.0 * ss_ * swc_;
  }

  /// Upper bound on |dU/dtheta|; derivatives below ~1e-13 of it are rounding.
  [[nodiscard]] double derivative_scale() const { return 2.0 * n_ * abs_weight_; }

  [[nodiscard]] double row_sums_squared() const {
    CompensatedSum acc;
    const double n = n_;
    for (std::size_t k = 0; k < u_.size(); ++k) {
      const double r = n * u_[k] + su_ - u_[k] * su_ - s_[k] * ss_;
      acc += r * r;
    }
    return acc.value();
  }

  [[nodiscard]] double squares() const {
    const double n = n_;
    const double aa = 2.0 * n * suu_ + suu_ * suu_ + 2.0 * su_ * su_ - 4.0 * suu_ * su_;
    const double ab = 2.0 * sus_ * ss_ - sus_ * sus_;
    const double bb = sss_ * sss_;
    return aa - 2.0 * ab + bb;
  }

  [[nodiscard]] double disjoint_pairs() const {
    const double u = total();
    const double e = u * u - 4.0 * row_sums_squared() + 2.0 * squares();
    return e < 0.0 ? 0.0 : e;
  }

 private:
  int n_;
  std::vector<double> u_;
  std::vector<double> s_;
  double su_ = 0, ss_ = 0, suu_ = 0, sss_ = 0, sus_ = 0, sws_ = 0, swc_ = 0, abs_weight_ = 0;
};

}  // namespace gradiometry

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gradiometry/errors.hpp"

namespace gradiometry {

/// Side-channel markers attached to a curve point.
enum PointFlag : std::uint8_t {
  kNone = 0,
  kStationary = 1 << 0,  // derivative vanishes, inverse precision reported as 0
  kClamped = 1 << 1,     // tiny negative variance clamped to 0
  kDivergent = 1 << 2,   // Gaussian-assumption bound diverges (theta = 0)
};

inline std::string flag_string(std::uint8_t flags) {
  std::string out;
  auto append = [&](const char* name) {
    if (!out.empty()) out += '|';
    out += name;
  };
  if (flags & kStationary) append("stationary");
  if (flags & kClamped) append("clamped");
  if (flags & kDivergent) append("divergent");
  return out;
}

/// Moments of J_x and the error-propagation inverse precision at one theta.
struct MomentPoint {
  double jx2 = 0.0;
  double jx4 = 0.0;
  double var_jx2 = 0.0;
  double djx2 = 0.0;
  double inv_precision = 0.0;
  std::uint8_t flags = kNone;
};

struct MomentCurve {
  std::vector<double> thetas;
  std::vector<double> jx2;
  std::vector<double> jx4;
  std::vector<double> var_jx2;
  std::vector<double> inv_precision;
  std::vector<std::uint8_t> flags;
  /// Optional (Delta theta)^-1 under the Gaussian fourth-moment assumption.
  std::optional<std::vector<double>> inv_precision_gaussian;
  /// White-noise <J_x^2> used to normalize jx2.
  double white_noise_jx2 = 1.0;

  [[nodiscard]] std::size_t size() const { return thetas.size(); }
  [[nodiscard]] bool empty() const { return thetas.empty(); }

  void push_back(double theta, const MomentPoint& p) {
    thetas.push_back(theta);
    jx2.push_back(p.jx2);
    jx4.push_back(p.jx4);
    var_jx2.push_back(p.var_jx2);
    inv_precision.push_back(p.inv_precision);
    flags.push_back(p.flags);
  }

  [[nodiscard]] double normalized_jx2(std::size_t i) const { return jx2[i] / white_noise_jx2; }
};

/// Clamps a computed variance: values in [-1e-12, 0) become 0, anything more
/// negative is a bug in the caller's algebra.
inline double clamp_variance(double var, std::uint8_t& flags) {
  if (var >= 0.0) return var;
  if (var >= -1e-12) {
    flags |= kClamped;
    return 0.0;
  }
  throw NumericalInconsistency("negative variance of J_x^2: " + std::to_string(var));
}

/// (Delta theta)^-1 = |d<J_x^2>/dtheta| / sqrt(Var(J_x^2)), 0 where the slope vanishes.
inline double inverse_precision(double derivative, double variance, std::uint8_t& flags) {
  const double var = clamp_variance(variance, flags);
  if (derivative == 0.0) {
    flags |= kStationary;
    return 0.0;
  }
  return std::abs(derivative) / std::sqrt(var);
}

/// Evenly spaced grid of `count` points on [lo, hi]; a single point sits at lo.
inline std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 0) throw DomainError("grid count must be non-negative");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] =
        count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return grid;
}

}  // namespace gradiometry

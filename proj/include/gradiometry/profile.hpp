#pragma once

// Single-particle density profiles along z. A profile is either a smooth
// product distribution (Gaussian closed form or tabulated samples integrated
// numerically) or a delta chain, i.e. the permutation-averaged distribution of
// particles pinned to a ChainGeometry.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "gradiometry/ensemble.hpp"
#include "gradiometry/errors.hpp"
#include "gradiometry/summation.hpp"

namespace gradiometry {

struct GaussianProfile {
  double center = 0.0;
  double width = 1.0;  // sigma
};

/// Density sampled on a strictly increasing grid, interpolated by the local
/// cubic through the four nearest samples. Integrals are taken interval by
/// interval with adaptive Gauss-Kronrod.
class TabulatedProfile {
 public:
  static constexpr double kNormTolerance = 1e-10;

  /// Throws unless the interpolated density integrates to 1 within 1e-10,
  /// or rescales it when `normalize` is set.
  TabulatedProfile(std::vector<double> z, std::vector<double> density, bool normalize = false)
      : z_(std::move(z)), density_(std::move(density)) {
    if (z_.size() != density_.size()) throw DomainError("tabulated profile: column length mismatch");
    if (z_.size() < 4) throw DomainError("tabulated profile needs at least 4 samples");
    for (std::size_t i = 0; i < z_.size(); ++i) {
      if (!std::isfinite(z_[i]) || !std::isfinite(density_[i])) {
        throw DomainError("tabulated profile: non-finite sample");
      }
      if (density_[i] < 0.0) throw DomainError("tabulated profile: negative density");
      if (i > 0 && !(z_[i] > z_[i - 1])) {
        throw DomainError("tabulated profile: z must be strictly increasing");
      }
    }
    for (std::size_t i = 1; i < z_.size(); ++i) max_spacing_ = std::max(max_spacing_, z_[i] - z_[i - 1]);
    const double mass = integrate([](double) { return 1.0; });
    if (!(mass > 0.0)) throw DomainError("tabulated profile has zero mass");
    if (normalize) {
      for (double& d : density_) d /= mass;
    } else if (std::abs(mass - 1.0) > kNormTolerance) {
      throw DomainError("tabulated profile integrates to " + std::to_string(mass) + ", not 1");
    }
    mean_ = integrate([](double z) { return z; });
    variance_ = integrate([m = mean_](double z) { return (z - m) * (z - m); });
  }

  /// Reads two whitespace-separated columns (z, density); '#' starts a comment.
  static TabulatedProfile load(const std::string& path, bool normalize = true) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile file '" + path + "'");
    std::vector<double> z;
    std::vector<double> d;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream fields(line);
      double a = 0.0;
      double b = 0.0;
      if (!(fields >> a)) continue;
      std::string extra;
      if (!(fields >> b) || (fields >> extra)) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected two numeric columns");
      }
      z.push_back(a);
      d.push_back(b);
    }
    return TabulatedProfile(std::move(z), std::move(d), normalize);
  }

  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double variance() const { return variance_; }
  [[nodiscard]] std::size_t samples() const { return z_.size(); }

  [[nodiscard]] double density(double z) const {
    if (z < z_.front() || z > z_.back()) return 0.0;
    const auto it = std::upper_bound(z_.begin(), z_.end(), z);
    std::size_t i = static_cast<std::size_t>(it - z_.begin());
    i = i == 0 ? 0 : std::min(i - 1, z_.size() - 2);
    return interpolate(i, z);
  }

  [[nodiscard]] double max_spacing() const { return max_spacing_; }

  /// Integral of g(z) f(z) over the sampled support: 10-point Gauss-Legendre
  /// on each interval, split into `pieces` equal parts.
  template <class Fn>
  [[nodiscard]] double integrate(Fn&& g, int pieces = 1) const {
    using Quadrature = boost::math::quadrature::gauss<double, 10>;
    CompensatedSum total;
    for (std::size_t i = 0; i + 1 < z_.size(); ++i) {
      auto integrand = [&](double z) { return g(z) * interpolate(i, z); };
      const double step = (z_[i + 1] - z_[i]) / pieces;
      for (int k = 0; k < pieces; ++k) {
        const double a = z_[i] + k * step;
        const double b = k + 1 == pieces ? z_[i + 1] : a + step;
        total += Quadrature::integrate(integrand, a, b);
      }
    }
    return total.value();
  }

 private:
  [[nodiscard]] double interpolate(std::size_t interval, double z) const {
    const std::size_t n = z_.size();
    const std::size_t start = interval == 0 ? 0 : std::min(interval - 1, n - 4);
    double value = 0.0;
    for (std::size_t a = start; a < start + 4; ++a) {
      double basis = 1.0;
      for (std::size_t b = start; b < start + 4; ++b) {
        if (b != a) basis *= (z - z_[b]) / (z_[a] - z_[b]);
      }
      value += basis * density_[a];
    }
    return value;
  }

  std::vector<double> z_;
  std::vector<double> density_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double max_spacing_ = 0.0;
};

struct DeltaChainProfile {
  ChainGeometry geometry;
};

class DensityProfile {
 public:
  using Kind = std::variant<GaussianProfile, TabulatedProfile, DeltaChainProfile>;

  static DensityProfile gaussian(double center, double width, double char_length,
                                 double pair_covariance = 0.0) {
    if (!(width > 0.0)) throw DomainError("gaussian width must be positive");
    return DensityProfile(GaussianProfile{center, width}, char_length, pair_covariance);
  }

  static DensityProfile tabulated(TabulatedProfile table, double char_length,
                                  double pair_covariance = 0.0) {
    return DensityProfile(std::move(table), char_length, pair_covariance);
  }

  static DensityProfile delta_chain(ChainGeometry geometry) {
    const double len = geometry.char_length();
    const double cov = position_stats(geometry).pair_covariance;
    return DensityProfile(DeltaChainProfile{std::move(geometry)}, len, cov);
  }

  [[nodiscard]] const Kind& kind() const { return kind_; }
  [[nodiscard]] double char_length() const { return char_length_; }
  [[nodiscard]] double pair_covariance() const { return pair_covariance_; }
  [[nodiscard]] bool is_product() const {
    return !std::holds_alternative<DeltaChainProfile>(kind_) && pair_covariance_ == 0.0;
  }
  [[nodiscard]] const ChainGeometry* chain() const {
    const auto* d = std::get_if<DeltaChainProfile>(&kind_);
    return d ? &d->geometry : nullptr;
  }

  [[nodiscard]] double mean() const {
    return std::visit(
        [](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, GaussianProfile>) return k.center;
          else if constexpr (std::is_same_v<T, TabulatedProfile>) return k.mean();
          else return position_stats(k.geometry).mean;
        },
        kind_);
  }

  [[nodiscard]] double variance() const {
    return std::visit(
        [](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, GaussianProfile>) return k.width * k.width;
          else if constexpr (std::is_same_v<T, TabulatedProfile>) return k.variance();
          else return position_stats(k.geometry).variance;
        },
        kind_);
  }

 private:
  DensityProfile(Kind kind, double char_length, double pair_covariance)
      : kind_(std::move(kind)), char_length_(char_length), pair_covariance_(pair_covariance) {
    if (!(char_length_ > 0.0) || !std::isfinite(char_length_)) {
      throw InvalidGeometry("characteristic length must be positive and finite");
    }
    if (!std::isfinite(pair_covariance_)) throw DomainError("pair covariance must be finite");
  }

  Kind kind_;
  double char_length_;
  double pair_covariance_;
};

/// Averaged single-particle phasor at theta for a smooth profile.
struct ProfilePhasor {
  double c_tilde = 1.0;
  double s_tilde = 0.0;
  double dephasing = 0.0;             // h = 1 - C~^2 - S~^2, accurate near theta = 0
  double dephasing_derivative = 0.0;  // dh/dtheta
};

inline ProfilePhasor profile_phasor(const DensityProfile& profile, double theta) {
  const double alpha = theta / profile.char_length();
  return std::visit(
      [&](const auto& k) -> ProfilePhasor {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianProfile>) {
          const double s2 = k.width * k.width;
          const double decay = std::exp(-0.5 * s2 * alpha * alpha);
          ProfilePhasor p;
          p.c_tilde = decay * std::cos(k.center * alpha);
          p.s_tilde = decay * std::sin(k.center * alpha);
          p.dephasing = -std::expm1(-s2 * alpha * alpha);
          p.dephasing_derivative =
              2.0 * s2 * alpha / profile.char_length() * std::exp(-s2 * alpha * alpha);
          return p;
        } else if constexpr (std::is_same_v<T, TabulatedProfile>) {
          const double mu = k.mean();
          const double len = profile.char_length();
          // at most about one radian of phase per quadrature panel
          const int pieces = 1 + static_cast<int>(std::min(1e4, std::abs(alpha) * k.max_spacing()));
          const double u = k.integrate([&](double z) {
            const double h = std::sin(0.5 * (z - mu) * alpha);
            return 2.0 * h * h;
          }, pieces);
          const double s = k.integrate([&](double z) { return std::sin((z - mu) * alpha); }, pieces);
          const double ws = k.integrate([&](double z) { return (z - mu) / len * std::sin((z - mu) * alpha); }, pieces);
          const double wc = k.integrate([&](double z) { return (z - mu) / len * std::cos((z - mu) * alpha); }, pieces);
          const std::complex<double> centered(1.0 - u, s);
          const std::complex<double> full = std::polar(1.0, mu * alpha) * centered;
          ProfilePhasor p;
          p.c_tilde = full.real();
          p.s_tilde = full.imag();
          p.dephasing = std::max(0.0, 2.0 * u - u * u - s * s);
          p.dephasing_derivative = 2.0 * (1.0 - u) * ws - 2.0 * s * wc;
          return p;
        } else {
          // Single-particle marginal of the chain: the empirical distribution.
          const ChainGeometry& g = k.geometry;
          const DephasingSums sums(g, theta);
          const double n = g.size();
          const std::complex<double> f1 = char_fn(g, alpha);
          ProfilePhasor p;
          p.c_tilde = f1.real();
          p.s_tilde = f1.imag();
          p.dephasing = sums.total() / (n * n);
          p.dephasing_derivative = sums.total_derivative() / (n * n);
          return p;
        }
      },
      profile.kind());
}

/// (C~, S~): the density-averaged cosine and sine of z theta / L.
inline std::pair<double, double> ctilde_stilde(const DensityProfile& profile, double theta) {
  const ProfilePhasor p = profile_phasor(profile, theta);
  return {p.c_tilde, p.s_tilde};
}

}  // namespace gradiometry

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gradiometry/chain_dynamics.hpp"
#include "gradiometry/profile_dynamics.hpp"
#include "support/reference.hpp"

using namespace gradiometry;

namespace {

TabulatedProfile sampled_gaussian(double center, double sigma, double step_in_sigma = 0.005) {
  std::vector<double> z;
  std::vector<double> f;
  const int half = static_cast<int>(std::lround(8.0 / step_in_sigma));
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  for (int k = -half; k <= half; ++k) {
    const double x = k * step_in_sigma * sigma;
    z.push_back(center + x);
    f.push_back(norm * std::exp(-0.5 * x * x / (sigma * sigma)));
  }
  return TabulatedProfile(std::move(z), std::move(f), true);
}

}  // namespace

TEST(Phasor, GaussianClosedForm) {
  const DensityProfile p = DensityProfile::gaussian(0.0, 1.0, 1.0);
  const auto [c0, s0] = ctilde_stilde(p, 0.0);
  EXPECT_EQ(c0, 1.0);
  EXPECT_EQ(s0, 0.0);
  const auto [c, s] = ctilde_stilde(p, 1.0);
  EXPECT_NEAR(c * c + s * s, std::exp(-1.0), 1e-15);
  const DensityProfile shifted = DensityProfile::gaussian(2.3, 1.0, 1.0);
  for (double t : {0.3, 1.0, 2.0}) {
    EXPECT_NEAR(profile_phasor(p, t).dephasing, profile_phasor(shifted, t).dephasing, 1e-15);
    EXPECT_NEAR(jx2_product(p, 50, t), jx2_product(shifted, 50, t), 1e-12);
  }
}

TEST(Phasor, TabulatedMatchesClosedForm) {
  const DensityProfile closed = DensityProfile::gaussian(0.4, 1.0, 1.0);
  const DensityProfile table = DensityProfile::tabulated(sampled_gaussian(0.4, 1.0), 1.0);
  for (int k = 0; k < 50; ++k) {
    const double t = 0.06 * k;
    const ProfilePhasor a = profile_phasor(closed, t);
    const ProfilePhasor b = profile_phasor(table, t);
    EXPECT_NEAR(a.c_tilde, b.c_tilde, 1e-8) << t;
    EXPECT_NEAR(a.s_tilde, b.s_tilde, 1e-8) << t;
    EXPECT_NEAR(a.dephasing, b.dephasing, 1e-8) << t;
    EXPECT_NEAR(a.dephasing_derivative, b.dephasing_derivative, 1e-8) << t;
  }
  EXPECT_NEAR(table.mean(), 0.4, 1e-10);
  EXPECT_NEAR(table.variance(), 1.0, 1e-8);
}

TEST(Tabulated, ValidatesInput) {
  EXPECT_THROW(TabulatedProfile({0, 1, 2}, {1, 1, 1}), DomainError);
  EXPECT_THROW(TabulatedProfile({0, 1, 2, 3}, {0.1, -0.1, 0.2, 0.1}), DomainError);
  EXPECT_THROW(TabulatedProfile({0, 1, 1, 3}, {0.1, 0.1, 0.2, 0.1}), DomainError);
  EXPECT_THROW(TabulatedProfile({0, 1, 2, 3}, {1, 1, 1, 1}), DomainError);
  const TabulatedProfile flat({0, 1, 2, 3}, {1, 1, 1, 1}, true);
  EXPECT_NEAR(flat.mean(), 1.5, 1e-14);
  EXPECT_NEAR(flat.variance(), 0.75, 1e-14);
}

TEST(Tabulated, LoadsTwoColumnFiles) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = (dir / "gradiometry_profile_test.txt").string();
  {
    std::ofstream out(path);
    out << "# z density\n";
    for (int k = 0; k <= 40; ++k) out << 0.1 * k << ' ' << 1.0 << "  # flat\n";
  }
  const TabulatedProfile t = TabulatedProfile::load(path);
  EXPECT_NEAR(t.mean(), 2.0, 1e-12);
  {
    std::ofstream out(path);
    out << "0 1\n1 1 3\n";
  }
  try {
    static_cast<void>(TabulatedProfile::load(path));
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(TabulatedProfile::load(path), ConfigError);
}

TEST(ProductMoments, Examples) {
  const DensityProfile p = DensityProfile::gaussian(0.0, 1.0, 1.0);
  EXPECT_EQ(jx2_product(p, 100, 0.0), 0.0);
  EXPECT_NEAR(jx2_product(p, 100000, 1.0), 25000.0 * (1.0 - std::exp(-1.0)), 1e-8);
  EXPECT_NEAR(jx2_product(p, 100000, 40.0), 25000.0, 1e-9);
  EXPECT_NEAR(jx4_product(p, 100, 0.0), 0.0, 1e-12);
  const double n = 100.0;
  EXPECT_NEAR(jx4_product(p, 100, 40.0), n * (3.0 * n - 2.0) / 16.0, 1e-9);
}

TEST(ProductMoments, TranscribedFormulas) {
  const DensityProfile p = DensityProfile::gaussian(0.3, 1.0, 1.0);
  const double n = 1e5;
  for (double t : {0.1, 0.5, 1.2, 2.5}) {
    const double g = std::exp(-t * t);
    const double m2 = n / 4.0 * (1.0 - g);
    const double m4 = n / 16.0 * (3.0 * n - 2.0 - (6.0 * n - 8.0) * g + 3.0 * (n - 2.0) * g * g);
    const double d = n / 4.0 * 2.0 * t * g;
    EXPECT_NEAR(jx2_product(p, 100000, t), m2, 1e-9 * m2);
    EXPECT_NEAR(jx4_product(p, 100000, t), m4, 1e-9 * m4);
    EXPECT_NEAR(precision_product(p, 100000, t), d / std::sqrt(m4 - m2 * m2), 1e-6 * d / std::sqrt(m4 - m2 * m2));
  }
}

TEST(ProductMoments, BoundsAndMonotonicity) {
  const DensityProfile p = DensityProfile::gaussian(-1.0, 0.7, 1.0);
  double prev = -1.0;
  for (int k = 0; k <= 200; ++k) {
    const double t = 0.05 * k;
    const MomentPoint pt = product_point(p, 1000, t);
    EXPECT_GE(pt.jx2, prev);
    EXPECT_LE(pt.jx2, 250.0 + 1e-9);
    EXPECT_GE(pt.jx4 - pt.jx2 * pt.jx2, -1e-9);
    prev = pt.jx2;
  }
}

TEST(ProductMoments, MonteCarloOverChains) {
  // Averaging the chain moments over positions drawn i.i.d. from the profile
  // gives the product-profile moments (the moments are linear in the state).
  const double sigma = 0.8;
  const double t = 1.1;
  const DensityProfile p = DensityProfile::gaussian(0.5, sigma, 1.0);
  std::mt19937_64 rng(123456789);
  std::normal_distribution<double> draw(0.5, sigma);
  ref::Welford m2;
  ref::Welford m4;
  std::vector<double> z(4);
  for (int k = 0; k < 1000000; ++k) {
    for (double& v : z) v = draw(rng);
    const double i2v = ref::i2(z, t, 1.0);
    // For N = 4 the distinct-quadruple sum is cheap enough to do directly.
    double i4v = 0.0;
    const int perm[24][4] = {{0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 1, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}, {0, 3, 2, 1},
                             {1, 0, 2, 3}, {1, 0, 3, 2}, {1, 2, 0, 3}, {1, 2, 3, 0}, {1, 3, 0, 2}, {1, 3, 2, 0},
                             {2, 0, 1, 3}, {2, 0, 3, 1}, {2, 1, 0, 3}, {2, 1, 3, 0}, {2, 3, 0, 1}, {2, 3, 1, 0},
                             {3, 0, 1, 2}, {3, 0, 2, 1}, {3, 1, 0, 2}, {3, 1, 2, 0}, {3, 2, 0, 1}, {3, 2, 1, 0}};
    for (const auto& q : perm) {
      i4v += std::cos((z[q[0]] - z[q[1]]) * t) * std::cos((z[q[2]] - z[q[3]]) * t);
    }
    m2.add(1.0 - i2v / 12.0);
    m4.add(ref::jx4_from_sums(4.0, i2v, i4v));
  }
  EXPECT_NEAR(jx2_product(p, 4, t), m2.mean, 3.0 * m2.stderr_of_mean());
  EXPECT_NEAR(jx4_product(p, 4, t), m4.mean, 3.0 * m4.stderr_of_mean());
}

TEST(PrecisionZero, GeneralCases) {
  const DensityProfile p = DensityProfile::gaussian(0.0, 1.0, 1.0);
  EXPECT_NEAR(precision_zero_general(p, 100000), 1e5, 1e-9);
  const double pr = precision_product(p, 100000, 1e-4);
  EXPECT_NEAR(pr * pr, 1e5, 1e-3 * 1e5);
  EXPECT_NEAR(pr, std::sqrt(1e5), 1e-3 * std::sqrt(1e5));

  const ChainGeometry eq = equidistant_positions(8, 1.0);
  const DensityProfile chain = DensityProfile::delta_chain(eq);
  EXPECT_NEAR(precision_zero_general(chain, 8), (64.0 + 512.0) / 12.0, 1e-10);
  EXPECT_NEAR(precision_zero_general(chain, 8) / (8.0 * chain.variance()), 8.0 / 7.0, 1e-12);

  const DensityProfile point = DensityProfile::delta_chain(ChainGeometry(std::vector<double>(6, 1.5), 1.0));
  EXPECT_EQ(precision_zero_general(point, 6), 0.0);

  const DensityProfile corr = DensityProfile::gaussian(0.0, 1.0, 2.0, -0.1);
  EXPECT_NEAR(precision_zero_general(corr, 10), 10.0 * 1.1 / 4.0, 1e-12);
  EXPECT_THROW(jx2_product(corr, 10, 0.5), DomainError);
}

TEST(PrecisionZero, SmallThetaAcrossWidths) {
  for (double sigma : {0.3, 1.0, 2.5}) {
    const DensityProfile p = DensityProfile::gaussian(0.7, sigma, 1.0);
    const double pr = precision_product(p, 5000, 1e-4 / sigma);
    EXPECT_NEAR(pr * pr, precision_zero_general(p, 5000), 1e-3 * precision_zero_general(p, 5000));
  }
}

TEST(Averages, Examples) {
  const DensityProfile p = DensityProfile::gaussian(0.0, 1.0, 1.0);
  const auto [a0, b0] = i2_i4_averages(p, 6, 0.0);
  EXPECT_NEAR(a0, 30.0, 1e-12);
  EXPECT_NEAR(b0, 360.0, 1e-12);
  const auto [a1, b1] = i2_i4_averages(p, 6, 1.0);
  EXPECT_NEAR(a1, 30.0 * std::exp(-1.0), 1e-12);
  EXPECT_NEAR(b1, 360.0 * std::exp(-2.0), 1e-12);
  std::mt19937_64 rng(1);
  const ChainGeometry g(ref::random_positions(rng, 6), 1.0);
  const auto [c2, c4] = i2_i4_averages(DensityProfile::delta_chain(g), 6, 0.9);
  EXPECT_NEAR(c2, i2_chain(g, 0.9), 1e-12);
  EXPECT_NEAR(c4, i4_chain_char_fn(g, 0.9), 1e-12);
}

TEST(DeltaChain, RoutesToChainFormulas) {
  std::mt19937_64 rng(6);
  const ChainGeometry g(ref::random_positions(rng, 6), 1.0);
  const DensityProfile p = DensityProfile::delta_chain(g);
  EXPECT_FALSE(p.is_product());
  for (double t : {0.2, 1.0, 3.3}) {
    EXPECT_EQ(jx2_product(p, 6, t), jx2_chain(g, t, 6));
    EXPECT_EQ(jx4_product(p, 6, t), jx4_chain(g, t, 6));
  }
}

TEST(Sweep, ProfileCurveMatchesScalar) {
  const DensityProfile p = DensityProfile::gaussian(0.0, 1.0, 1.0);
  const std::vector<double> grid = linear_grid(0.0, 3.0, 31);
  const MomentCurve c = sweep_profile(p, 1000, grid, 0.0, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(c.jx2[i], jx2_product(p, 1000, grid[i]));
  EXPECT_EQ(c.white_noise_jx2, 250.0);
}

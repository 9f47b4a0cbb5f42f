#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gradiometry/oracle.hpp"
#include "gradiometry/spinj.hpp"
#include "support/reference.hpp"

using namespace gradiometry;
using std::numbers::pi;

namespace {

const SpinQuantum kHalf = SpinQuantum::from_twice(1);
const SpinQuantum kOne = SpinQuantum::from_twice(2);

}  // namespace

TEST(Kappa, Examples) {
  EXPECT_DOUBLE_EQ(kappa(kHalf), 1.0);
  EXPECT_DOUBLE_EQ(kappa(kOne), 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(kappa(SpinQuantum::from_twice(3)), 5.0);
  const SpinScaling s = SpinScaling::of(6, kOne);
  EXPECT_DOUBLE_EQ(s.wn_variance, 6.0 * 2.0 / 3.0);
}

TEST(SpinJ, ChainSecondMoment) {
  const ChainGeometry g6 = equidistant_positions(6, 1.0);
  EXPECT_NEAR(jx2_chain_spinj(g6, 6, kOne, pi), 4.8, 1e-12);
  std::mt19937_64 rng(2);
  const ChainGeometry r(ref::random_positions(rng, 8), 1.0);
  for (double t : {0.0, 0.7, 2.9}) EXPECT_NEAR(jx2_chain_spinj(r, 8, kHalf, t), jx2_chain(r, t, 8), 1e-13);
  // Odd N is fine for integer spin.
  EXPECT_NO_THROW(static_cast<void>(jx2_chain_spinj(equidistant_positions(3, 1.0), 3, kOne, 0.4)));
  EXPECT_THROW(static_cast<void>(jx2_chain_spinj(equidistant_positions(3, 1.0), 3, kHalf, 0.4)), NoSinglet);
}

TEST(SpinJ, ProductSecondMoment) {
  const DensityProfile p = DensityProfile::gaussian(0.0, 1.0, 1.0);
  EXPECT_NEAR(jx2_product_spinj(p, 1000, kOne, 1.0), 8.0 / 3.0 * 250.0 * (1.0 - std::exp(-1.0)), 1e-10);
  EXPECT_EQ(jx2_product_spinj(p, 1000, kOne, 0.0), 0.0);
  EXPECT_NEAR(jx2_product_spinj(p, 1000, kHalf, 0.8), jx2_product(p, 1000, 0.8), 1e-12);
  EXPECT_NEAR(jx2_product_spinj(p, 1000, kOne, 30.0), SpinScaling::of(1000, kOne).wn_variance, 1e-9);
}

TEST(GaussianAssumption, FourthMoment) {
  EXPECT_EQ(gaussian_assumption_jx4(0.0), 0.0);
  EXPECT_EQ(gaussian_assumption_jx4(2.0), 12.0);
  EXPECT_THROW(static_cast<void>(gaussian_assumption_jx4(-1.0)), DomainError);
  const DensityProfile p = DensityProfile::gaussian(0.0, 1.0, 1.0);
  for (int k = 0; k <= 27; ++k) {
    const double t = 0.3 + 0.1 * k;
    const double exact = jx4_product(p, 100000, t);
    EXPECT_LT(std::abs(gaussian_assumption_jx4(jx2_product(p, 100000, t)) - exact), 0.05 * exact) << t;
  }
}

TEST(GaussianAssumption, PrecisionProperties) {
  const DensityProfile p = DensityProfile::gaussian(0.0, 1.0, 1.0);
  const GaussianPrecision at0 = precision_gaussian_assumption(p, 100000, kHalf, 0.0);
  EXPECT_TRUE(at0.divergent);
  EXPECT_EQ(at0.inv_precision, 0.0);
  for (double t : {0.1, 0.5, 1.3}) {
    EXPECT_EQ(precision_gaussian_assumption(p, 100000, kHalf, t).inv_precision,
              precision_gaussian_assumption(p, 100000, kOne, t).inv_precision);
  }
  const double exact = precision_product(p, 100000, 0.5);
  EXPECT_NEAR(precision_gaussian_assumption(p, 100000, kHalf, 0.5).inv_precision, exact, 0.05 * exact);
  const ChainGeometry g = equidistant_positions(6, 1.0);
  EXPECT_NEAR(precision_gaussian_assumption(g, 6, kOne, 1.1).inv_precision,
              precision_gaussian_assumption(g, 6, kHalf, 1.1).inv_precision, 1e-12);
  // Direct transcription: |d<J_x^2>| / (sqrt 2 <J_x^2>).
  const double m = jx2_chain(g, 1.1, 6);
  const double d = djx2_dtheta_chain(g, 1.1, 6);
  EXPECT_NEAR(precision_gaussian_assumption(g, 6, kHalf, 1.1).inv_precision, std::abs(d) / (std::sqrt(2.0) * m), 1e-12);
}

TEST(SpinJ, Sweeps) {
  const ChainGeometry g = equidistant_positions(6, 1.0);
  const std::vector<double> grid = linear_grid(0.0, pi, 11);
  const MomentCurve c = sweep_spinj_chain(g, 6, kOne, grid);
  ASSERT_EQ(c.size(), 11u);
  EXPECT_TRUE(c.flags[0] & kDivergent);
  EXPECT_NEAR(c.jx2.back(), 4.8, 1e-12);
  EXPECT_EQ(c.white_noise_jx2, 4.0);
  const MomentCurve pc = sweep_spinj_profile(DensityProfile::gaussian(0.0, 1.0, 1.0), 100, kOne, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(pc.jx4[i], 3.0 * pc.jx2[i] * pc.jx2[i]);
}

TEST(OracleSpinOne, KappaScalingOfSecondMoment) {
  std::mt19937_64 rng(19);
  for (int n : {4, 6}) {
    const oracle::DensityOperator singlet = oracle::build_singlet_j0(n, kOne);
    const oracle::CollectiveMoments moments(oracle::SpinSystem(n, kOne), {Axis::x});
    for (int trial = 0; trial < 3; ++trial) {
      const ChainGeometry g(ref::random_positions(rng, n), 1.0);
      const double t = std::uniform_real_distribution<double>(0.0, 4.0)(rng);
      const oracle::OracleSample s = oracle::evolved_jx_moments(singlet, g, t, moments);
      EXPECT_NEAR(s.jx2, kappa(kOne) * jx2_chain(g, t, n), 1e-10);
    }
  }
}

TEST(OracleSpinOne, GaussianAssumptionNeverOvershootsExactPrecision) {
  const ChainGeometry g = equidistant_positions(6, 1.0);
  const std::vector<double> grid = linear_grid(0.3, pi, 41);
  const MomentCurve exact = oracle::sweep_oracle_chain(g, 6, kOne, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (exact.flags[i] & kStationary) continue;
    const double gauss = precision_gaussian_assumption(g, 6, kOne, grid[i]).inv_precision;
    EXPECT_LE(gauss, 1.05 * exact.inv_precision[i]) << grid[i];
  }
}

TEST(OracleSpinOne, TwoSiteCorrelatorAndSumRule) {
  const int n = 4;
  const oracle::DensityOperator singlet = oracle::build_singlet_j0(n, kOne);
  const double wn = SpinScaling::of(n, kOne).wn_variance;
  for (Axis a : {Axis::x, Axis::y, Axis::z}) {
    EXPECT_NEAR(oracle::local_product_expectation(singlet, {{0, a}, {2, a}}), -wn / (n * (n - 1.0)), 1e-12);
  }
  const oracle::LocalSpin local(kOne);
  auto site_spin_squared = [&](const oracle::DensityOperator& rho, int site) {
    const oracle::Matrix red = oracle::partial_trace(rho, {site});
    double total = 0.0;
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
      const oracle::Matrix c = local.component(a);
      total += (red * c * c).trace().real();
    }
    return total;
  };
  const oracle::DensityOperator mixed = oracle::DensityOperator::fully_mixed(oracle::SpinSystem(n, kOne));
  EXPECT_NEAR(site_spin_squared(mixed, 1), 2.0, 1e-12);
  EXPECT_NEAR(site_spin_squared(singlet, 3), 2.0, 1e-12);
  // The singlet's one-site marginal is maximally mixed.
  const oracle::Matrix red = oracle::partial_trace(singlet, {0});
  EXPECT_LT((red - oracle::Matrix::Identity(3, 3) / 3.0).cwiseAbs().maxCoeff(), 1e-12);
}

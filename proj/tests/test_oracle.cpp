#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gradiometry/chain_dynamics.hpp"
#include "gradiometry/noise.hpp"
#include "gradiometry/oracle.hpp"
#include "support/reference.hpp"

using namespace gradiometry;
using namespace gradiometry::oracle;
using std::numbers::pi;

namespace {

const SpinQuantum kHalf = SpinQuantum::from_twice(1);
const SpinQuantum kOne = SpinQuantum::from_twice(2);

}  // namespace

TEST(SpinSystem, LocalOperatorsAndLimits) {
  const LocalSpin half(kHalf);
  const Matrix comm = half.component(Axis::x) * half.component(Axis::y) - half.component(Axis::y) * half.component(Axis::x);
  EXPECT_LT((comm - Complex(0.0, 1.0) * half.component(Axis::z)).cwiseAbs().maxCoeff(), 1e-15);
  const LocalSpin one(kOne);
  Matrix casimir = Matrix::Zero(3, 3);
  for (Axis a : {Axis::x, Axis::y, Axis::z}) casimir += one.component(a) * one.component(a);
  EXPECT_LT((casimir - 2.0 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);

  const SpinSystem sys(3, kHalf);
  EXPECT_EQ(sys.dim(), 8);
  EXPECT_EQ(sys.m_value(0, 0), 0.5);
  EXPECT_EQ(sys.m_value(4, 0), -0.5);
  EXPECT_EQ(sys.m_value(1, 2), -0.5);
  EXPECT_THROW(SpinSystem(13, kHalf), DomainError);
  EXPECT_NO_THROW(SpinSystem(12, kHalf));
}

TEST(Singlet, PairMixtureMatchesJ0Projector) {
  for (int n : {2, 4, 6}) {
    const DensityOperator a = build_singlet_pair_mixture(n);
    const DensityOperator b = build_singlet_j0(n, kHalf);
    a.validate();
    b.validate();
    EXPECT_LT(a.distance(b), 1e-12) << n;
  }
  EXPECT_THROW(build_singlet_pair_mixture(5), NoSinglet);
  EXPECT_THROW(build_singlet_j0(3, kHalf), NoSinglet);
  EXPECT_THROW(build_singlet_pair_mixture(12), DomainError);
}

TEST(Singlet, SpinOneJ0State) {
  const DensityOperator rho = build_singlet_j0(4, kOne);
  rho.validate();
  const SpinSystem sys(4, kOne);
  const RealMatrix j2 = sys.total_spin_squared();
  EXPECT_NEAR(expectation(rho, j2.cast<Complex>()), 0.0, 1e-12);
  // Three-site spin-1 singlets exist too.
  EXPECT_NO_THROW(build_singlet_j0(3, kOne).validate());
}

TEST(Singlet, Invariants) {
  std::mt19937_64 rng(10);
  for (int n : {2, 4, 6}) {
    const DensityOperator rho = build_singlet_pair_mixture(n);
    const SpinSystem sys(n, kHalf);
    const CollectiveMoments mom(sys);
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
      for (int p = 1; p <= 4; ++p) EXPECT_NEAR(mom.moment(rho, a, p), 0.0, 1e-12);
    }
    std::normal_distribution<double> g;
    for (int k = 0; k < 4; ++k) {
      const Eigen::Vector3d axis(g(rng), g(rng), g(rng));
      const Matrix u = sys.collective_rotation(axis.normalized(), std::uniform_real_distribution<double>(0, 2 * pi)(rng));
      EXPECT_LT(conjugate(rho, u).distance(rho), 1e-12);
    }
  }
}

TEST(Evolution, GradientKeepsJzAndEchoes) {
  std::mt19937_64 rng(12);
  const DensityOperator rho = build_singlet_pair_mixture(6);
  const SpinSystem sys(6, kHalf);
  const CollectiveMoments mom(sys);
  const ChainGeometry g(ref::random_positions(rng, 6), 1.0);
  for (double t : {0.3, 1.7, 4.0}) {
    const DensityOperator ev = evolve_gradient(rho, g, t);
    EXPECT_NEAR(ev.trace_error(), 0.0, 1e-12);
    EXPECT_NEAR(mom.moment(ev, Axis::z, 2), 0.0, 1e-12);
    EXPECT_NEAR(mom.moment(ev, Axis::x, 2), mom.moment(ev, Axis::y, 2), 1e-12);
    EXPECT_LT(evolve_gradient(ev, g, -t).distance(rho), 1e-12);
    const OracleSample s = evolved_jx_moments(rho, g, t, mom);
    EXPECT_NEAR(s.jx2, mom.moment(ev, Axis::x, 2), 1e-12);
    EXPECT_NEAR(s.jx4, mom.moment(ev, Axis::x, 4), 1e-11);
  }
  // Uniform shift of all positions leaves the singlet's dynamics unchanged.
  std::vector<double> z(g.positions().begin(), g.positions().end());
  for (double& v : z) v += 2.5;
  EXPECT_NEAR(moment(evolve_gradient(rho, ChainGeometry(z, 1.0), 1.1), Axis::x, 4),
              moment(evolve_gradient(rho, g, 1.1), Axis::x, 4), 1e-12);
}

TEST(Evolution, AnalyticMomentsForSmallChains) {
  std::mt19937_64 rng(33);
  for (int n : {2, 4, 6}) {
    const DensityOperator rho = build_singlet_pair_mixture(n);
    const CollectiveMoments mom(SpinSystem(n, kHalf), {Axis::x});
    for (int trial = 0; trial < 3; ++trial) {
      const ChainGeometry g(ref::random_positions(rng, n), 1.0);
      for (int k = 0; k < 5; ++k) {
        const double t = std::uniform_real_distribution<double>(0.0, 2 * pi)(rng);
        const OracleSample s = evolved_jx_moments(rho, g, t, mom);
        EXPECT_NEAR(s.jx2, jx2_chain(g, t, n), 1e-10);
        EXPECT_NEAR(s.jx4, jx4_chain(g, t, n), 1e-10);
      }
    }
  }
}

TEST(Depolarize, Limits) {
  const DensityOperator rho = build_singlet_pair_mixture(4);
  EXPECT_LT(depolarize(rho, 0.0).distance(rho), 1e-15);
  const DensityOperator mixed = DensityOperator::fully_mixed(SpinSystem(4, kHalf));
  EXPECT_LT(depolarize(rho, 1.0).distance(mixed), 1e-15);
  const DensityOperator half = depolarize(rho, 0.5);
  half.validate();
  EXPECT_THROW(depolarize(build_singlet_j0(2, kOne), 0.1), DomainError);
  EXPECT_THROW(depolarize(rho, 1.2), DomainError);
}

TEST(Projector, ValuesAndCompleteness) {
  for (int n : {2, 4, 6}) {
    const SpinSystem sys(n, kHalf);
    const JxSpectrum spec(sys);
    const DensityOperator mixed = DensityOperator::fully_mixed(sys);
    EXPECT_NEAR(spec.value(mixed, 0.0), projector_mixed_expectation(n), 1e-14);
    EXPECT_NEAR(spec.value(build_singlet_pair_mixture(n), 0.0), 1.0, 1e-12);
    double total = 0.0;
    for (double m : spec.eigenvalues()) total += spec.value(mixed, m);
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(spec.value(mixed, 0.25), 0.0);
    EXPECT_EQ(spec.eigenvalues().size(), static_cast<std::size_t>(n + 1));
  }
  const DensityOperator ev = evolve_gradient(build_singlet_pair_mixture(4), equidistant_positions(4, 1.0), 1.0);
  EXPECT_LT(projector_jx_value(ev, 0.0), 1.0);
}

TEST(Stencil, MatchesAnalyticPrecision) {
  std::mt19937_64 rng(8);
  const ChainGeometry g(ref::random_positions(rng, 4), 1.0);
  const DensityOperator rho = build_singlet_pair_mixture(4);
  const CollectiveMoments mom(SpinSystem(4, kHalf), {Axis::x});
  const auto family = [&](double t) { return evolved_jx_moments(rho, g, t, mom); };
  for (double t : {0.3, 0.9, 2.2}) {
    const double exact = precision_chain(g, t, 4);
    EXPECT_NEAR(oracle_precision(family, t), exact, 1e-6 * std::max(exact, 1.0));
  }
  EXPECT_THROW(oracle_point(family, 0.5, 0.1), DomainError);
  EXPECT_THROW(oracle_point(family, 0.5, 0.0), DomainError);
  const auto constant = [](double) { return OracleSample{1.0, 2.0}; };
  const MomentPoint p = oracle_point(constant, 0.4);
  EXPECT_EQ(p.djx2, 0.0);
  EXPECT_EQ(p.inv_precision, 0.0);
}

TEST(Stencil, GridVersion) {
  const ChainGeometry g = equidistant_positions(4, 1.0);
  const DensityOperator rho = build_singlet_pair_mixture(4);
  const CollectiveMoments mom(SpinSystem(4, kHalf), {Axis::x});
  const std::vector<double> grid = linear_grid(0.2, 1.2, 101);
  std::vector<OracleSample> samples;
  for (double t : grid) samples.push_back(evolved_jx_moments(rho, g, t, mom));
  const std::vector<double> prec = oracle_precision_grid(grid, samples);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double exact = precision_chain(g, grid[i], 4);
    EXPECT_NEAR(prec[i], exact, 1e-4 * std::max(exact, 1.0)) << grid[i];
  }
  EXPECT_THROW(oracle_precision_grid(linear_grid(0, 1, 4), std::vector<OracleSample>(4)), DomainError);
  EXPECT_THROW(oracle_precision_grid(linear_grid(0, 1, 10), std::vector<OracleSample>(10)), DomainError);
  std::vector<double> uneven = linear_grid(0, 0.1, 6);
  uneven[3] += 1e-3;
  EXPECT_THROW(oracle_precision_grid(uneven, std::vector<OracleSample>(6)), DomainError);
}

TEST(Sweep, OracleChainCurve) {
  const ChainGeometry g = equidistant_positions(4, 1.0);
  const std::vector<double> grid = linear_grid(0.1, 3.0, 7);
  const MomentCurve c = sweep_oracle_chain(g, 4, kHalf, grid);
  const MomentCurve noisy = sweep_oracle_chain(g, 4, kHalf, grid, 0.2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(c.jx2[i], jx2_chain(g, grid[i], 4), 1e-12);
    EXPECT_NEAR(noisy.jx4[i], jx4_noisy_chain(g, 4, grid[i], 0.2), 1e-12);
  }
  EXPECT_DOUBLE_EQ(c.white_noise_jx2, 1.0);
  EXPECT_DOUBLE_EQ(sweep_oracle_chain(g, 4, kOne, grid).white_noise_jx2, 4.0 * 2.0 / 3.0);
}

TEST(Dump, RoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "gradiometry_dump_test.bin").string();
  const Matrix m = build_singlet_pair_mixture(4).matrix() * Complex(1.0, 0.25);
  write_operator(path, m);
  EXPECT_EQ(std::filesystem::file_size(path), 16u + 16u * 256u);
  {
    std::ifstream in(path, std::ios::binary);
    char magic[8];
    in.read(magic, 8);
    EXPECT_EQ(std::string(magic, 8), "GRDOPv01");
    unsigned char dim[8];
    in.read(reinterpret_cast<char*>(dim), 8);
    EXPECT_EQ(dim[0], 16);
    EXPECT_EQ(dim[1], 0);
  }
  EXPECT_EQ(read_operator(path), m);
  {
    std::ofstream out(path, std::ios::binary);
    out << "nonsense";
  }
  EXPECT_THROW(read_operator(path), Error);
  std::filesystem::remove(path);
}

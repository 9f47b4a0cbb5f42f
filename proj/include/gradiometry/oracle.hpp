#pragma once

// Dense exact simulation of N spin-j particles in the product J_z basis.
// Ground truth for the analytic formulas at desk-scale dimensions.
//
// Basis convention: site 0 is the most significant digit; local digit d holds
// m = j - d, so digit 0 is spin up.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gradiometry/correlators.hpp"
#include "gradiometry/ensemble.hpp"
#include "gradiometry/errors.hpp"
#include "gradiometry/moment_curve.hpp"
#include "gradiometry/parallel.hpp"

namespace gradiometry::oracle {

using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Complex = std::complex<double>;

inline constexpr int kMaxDimension = 4096;

/// Single-site spin matrices for spin j.
struct LocalSpin {
  RealMatrix jx;
  Matrix jy;
  RealMatrix jz;
  RealMatrix raise;  // j_+

  explicit LocalSpin(SpinQuantum j) {
    const int d = j.multiplicity();
    const double jj = j.value();
    raise = RealMatrix::Zero(d, d);
    jz = RealMatrix::Zero(d, d);
    for (int a = 0; a < d; ++a) {
      const double m = jj - a;
      jz(a, a) = m;
      if (a > 0) raise(a - 1, a) = std::sqrt(jj * (jj + 1.0) - m * (m + 1.0));
    }
    const RealMatrix lower = raise.transpose();
    jx = 0.5 * (raise + lower);
    jy = (raise - lower).cast<Complex>() * Complex(0.0, -0.5);
  }

  [[nodiscard]] Matrix component(Axis a) const {
    switch (a) {
      case Axis::x: return jx.cast<Complex>();
      case Axis::y: return jy;
      case Axis::z: return jz.cast<Complex>();
    }
    return {};
  }
};

class SpinSystem {
 public:
  SpinSystem(int n_sites, SpinQuantum j) : n_(n_sites), spin_(j), local_(j) {
    if (n_sites < 1) throw DomainError("need at least one site");
    long long dim = 1;
    for (int s = 0; s < n_sites; ++s) {
      dim *= j.multiplicity();
      if (dim > kMaxDimension) {
        throw DomainError("oracle dimension exceeds " + std::to_string(kMaxDimension));
      }
    }
    dim_ = static_cast<int>(dim);
    stride_.assign(static_cast<std::size_t>(n_), 1);
    for (int s = n_ - 2; s >= 0; --s) {
      stride_[static_cast<std::size_t>(s)] = stride_[static_cast<std::size_t>(s + 1)] * j.multiplicity();
    }
  }

  [[nodiscard]] int sites() const { return n_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int local_dim() const { return spin_.multiplicity(); }
  [[nodiscard]] SpinQuantum spin() const { return spin_; }
  [[nodiscard]] const LocalSpin& local() const { return local_; }

  [[nodiscard]] int digit(int index, int site) const {
    return (index / stride_[static_cast<std::size_t>(site)]) % local_dim();
  }
  [[nodiscard]] int with_digit(int index, int site, int d) const {
    const int st = stride_[static_cast<std::size_t>(site)];
    return index + (d - digit(index, site)) * st;
  }
  [[nodiscard]] double m_value(int index, int site) const {
    return spin_.value() - digit(index, site);
  }

  /// sum_n 1 (x) ... (x) A (x) ... (x) 1 for a local operator A.
  [[nodiscard]] Matrix collective(const Matrix& local_op) const {
    Matrix out = Matrix::Zero(dim_, dim_);
    const int d = local_dim();
    for (int b = 0; b < dim_; ++b) {
      for (int s = 0; s < n_; ++s) {
        const int db = digit(b, s);
        for (int da = 0; da < d; ++da) {
          const Complex v = local_op(da, db);
          if (v != Complex(0.0)) out(with_digit(b, s, da), b) += v;
        }
      }
    }
    return out;
  }

  [[nodiscard]] Matrix collective(Axis a) const { return collective(local_.component(a)); }

  /// J^2 = J_x^2 + J_y^2 + J_z^2, real symmetric in this basis.
  [[nodiscard]] RealMatrix total_spin_squared() const {
    const RealMatrix jplus = collective(local_.raise.cast<Complex>()).real();
    const RealMatrix jz = collective(local_.jz.cast<Complex>()).real();
    // J^2 = J_- J_+ + J_z^2 + J_z
    RealMatrix j2 = jplus.transpose() * jplus;
    j2 += jz * jz;
    j2 += jz;
    return j2;
  }

  /// exp(-i angle n.J) as the N-fold tensor power of the single-site rotation.
  [[nodiscard]] Matrix collective_rotation(const Eigen::Vector3d& axis, double angle) const {
    const Eigen::Vector3d nhat = axis.normalized();
    const Matrix gen = nhat.x() * local_.component(Axis::x) + nhat.y() * local_.component(Axis::y) +
                       nhat.z() * local_.component(Axis::z);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(gen);
    const Eigen::VectorXcd phases =
        (es.eigenvalues().cast<Complex>() * Complex(0.0, -angle)).array().exp();
    const Matrix single = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    Matrix full = Matrix::Ones(1, 1);
    for (int s = 0; s < n_; ++s) {
      Matrix next(full.rows() * single.rows(), full.cols() * single.cols());
      for (Eigen::Index r = 0; r < full.rows(); ++r) {
        for (Eigen::Index c = 0; c < full.cols(); ++c) {
          next.block(r * single.rows(), c * single.cols(), single.rows(), single.cols()) =
              full(r, c) * single;
        }
      }
      full = std::move(next);
    }
    return full;
  }

 private:
  int n_;
  SpinQuantum spin_;
  LocalSpin local_;
  int dim_ = 1;
  std::vector<int> stride_;
};

/// Dense density operator of a SpinSystem.
class DensityOperator {
 public:
  DensityOperator(const SpinSystem& system, Matrix rho) : sites_(system.sites()), spin_(system.spin()), rho_(std::move(rho)) {
    if (rho_.rows() != system.dim() || rho_.cols() != system.dim()) {
      throw DomainError("density matrix dimension does not match the spin system");
    }
  }

  static DensityOperator fully_mixed(const SpinSystem& system) {
    return {system, Matrix::Identity(system.dim(), system.dim()) / static_cast<double>(system.dim())};
  }

  [[nodiscard]] const Matrix& matrix() const { return rho_; }
  [[nodiscard]] int dim() const { return static_cast<int>(rho_.rows()); }
  [[nodiscard]] int sites() const { return sites_; }
  [[nodiscard]] SpinQuantum spin() const { return spin_; }

  [[nodiscard]] double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }
  [[nodiscard]] double trace_error() const { return std::abs(rho_.trace() - Complex(1.0)); }
  [[nodiscard]] double min_eigenvalue() const {
    const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
    return Eigen::SelfAdjointEigenSolver<Matrix>(herm, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  }

  /// Hermitian to 1e-12, unit trace to 1e-12, eigenvalues >= -1e-10.
  void validate() const {
    if (hermiticity_error() > 1e-12) throw NumericalInconsistency("density operator not Hermitian");
    if (trace_error() > 1e-12) throw NumericalInconsistency("density operator trace != 1");
    if (min_eigenvalue() < -1e-10) throw NumericalInconsistency("density operator not positive");
  }

  [[nodiscard]] double distance(const DensityOperator& other) const { return (rho_ - other.rho_).norm(); }

 private:
  int sites_;
  SpinQuantum spin_;
  Matrix rho_;
};

/// Visits every perfect matching of {0..n-1}, pairing the lowest unpaired
/// index with each remaining one in increasing order.
inline void for_each_pairing(int n, const std::function<void(const std::vector<std::pair<int, int>>&)>& visit) {
  std::vector<std::pair<int, int>> pairs;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::function<void()> recurse = [&] {
    int first = 0;
    while (first < n && used[static_cast<std::size_t>(first)]) ++first;
    if (first == n) {
      visit(pairs);
      return;
    }
    used[static_cast<std::size_t>(first)] = 1;
    for (int other = first + 1; other < n; ++other) {
      if (used[static_cast<std::size_t>(other)]) continue;
      used[static_cast<std::size_t>(other)] = 1;
      pairs.emplace_back(first, other);
      recurse();
      pairs.pop_back();
      used[static_cast<std::size_t>(other)] = 0;
    }
    used[static_cast<std::size_t>(first)] = 0;
  };
  recurse();
}

/// Uniform mixture of products of two-particle singlets over all pairings.
inline DensityOperator build_singlet_pair_mixture(int n) {
  if (n < 2 || n % 2 != 0) throw NoSinglet("pair mixture needs even N, got " + std::to_string(n));
  if (n > 10) throw DomainError("pair mixture limited to N <= 10");
  const SpinSystem system(n, SpinQuantum{});
  Matrix rho = Matrix::Zero(system.dim(), system.dim());
  const int n_pairs = n / 2;
  const double amp = std::pow(0.5, 0.5 * n_pairs);
  std::vector<int> index(static_cast<std::size_t>(1) << n_pairs);
  std::vector<double> value(index.size());
  std::uint64_t count = 0;
  for_each_pairing(n, [&](const std::vector<std::pair<int, int>>& pairs) {
    for (std::size_t mask = 0; mask < index.size(); ++mask) {
      int idx = 0;
      double sign = 1.0;
      for (int p = 0; p < n_pairs; ++p) {
        const auto [a, b] = pairs[static_cast<std::size_t>(p)];
        // (|up,down> - |down,up>)/sqrt2; digit 1 is spin down.
        const bool flipped = (mask >> p) & 1U;
        idx = system.with_digit(idx, flipped ? a : b, 1);
        if (flipped) sign = -sign;
      }
      index[mask] = idx;
      value[mask] = sign * amp;
    }
    for (std::size_t r = 0; r < index.size(); ++r) {
      for (std::size_t c = 0; c < index.size(); ++c) rho(index[r], index[c]) += value[r] * value[c];
    }
    ++count;
  });
  rho /= static_cast<double>(count);
  return {system, std::move(rho)};
}

/// Normalized projector onto the J^2 = 0 eigenspace (eigenvalue cutoff 1e-9).
inline DensityOperator build_singlet_j0(int n, SpinQuantum j) {
  const SpinSystem system(n, j);
  const Eigen::SelfAdjointEigenSolver<RealMatrix> es(system.total_spin_squared());
  std::vector<Eigen::Index> zero;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (std::abs(es.eigenvalues()(k)) < 1e-9) zero.push_back(k);
  }
  if (zero.empty()) {
    throw NoSinglet("no J = 0 states for N=" + std::to_string(n) + ", 2j=" + std::to_string(j.twice()));
  }
  RealMatrix basis(system.dim(), static_cast<Eigen::Index>(zero.size()));
  for (std::size_t c = 0; c < zero.size(); ++c) basis.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(zero[c]);
  const RealMatrix proj = basis * basis.transpose() / static_cast<double>(zero.size());
  return {system, proj.cast<Complex>()};
}

/// Conjugation by exp(-i theta sum_n (z_n / L) j_z^(n)): an elementwise phase mask.
inline DensityOperator evolve_gradient(const DensityOperator& rho, const ChainGeometry& geom, double theta) {
  geom.require_size(rho.sites());
  const SpinSystem system(rho.sites(), rho.spin());
  Eigen::VectorXcd left(system.dim());
  for (int b = 0; b < system.dim(); ++b) {
    double acc = 0.0;
    for (int s = 0; s < system.sites(); ++s) acc += geom.phase(s, theta) * system.m_value(b, s);
    left(b) = std::polar(1.0, -acc);
  }
  // Explicit real arithmetic: std::complex operator* goes through the slow
  // NaN-recovering path without -ffast-math.
  Matrix out(system.dim(), system.dim());
  const Matrix& in = rho.matrix();
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double cr = left(c).real();
    const double ci = -left(c).imag();
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const double wr = left(r).real() * cr - left(r).imag() * ci;
      const double wi = left(r).real() * ci + left(r).imag() * cr;
      const Complex v = in(r, c);
      out(r, c) = Complex(v.real() * wr - v.imag() * wi, v.real() * wi + v.imag() * wr);
    }
  }
  return {system, std::move(out)};
}

inline DensityOperator conjugate(const DensityOperator& rho, const Matrix& unitary) {
  const SpinSystem system(rho.sites(), rho.spin());
  return {system, unitary * rho.matrix() * unitary.adjoint()};
}

/// Tr(rho A) for Hermitian A, asserting the imaginary residue is at rounding level.
inline double expectation(const DensityOperator& rho, const Matrix& op, double scale) {
  if (op.rows() != rho.dim() || op.cols() != rho.dim()) throw DomainError("operator dimension mismatch");
  const Complex* a = rho.matrix().data();
  const Complex* b = op.data();
  double re = 0.0;
  double im = 0.0;
  for (Eigen::Index k = 0; k < op.size(); ++k) {
    // a_k * conj(b_k)
    re += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
    im += a[k].imag() * b[k].real() - a[k].real() * b[k].imag();
  }
  const Complex v(re, im);
  if (std::abs(v.imag()) > 1e-12 * scale) {
    throw NumericalInconsistency("expectation value has imaginary part " + std::to_string(v.imag()));
  }
  return v.real();
}

inline double expectation(const DensityOperator& rho, const Matrix& op) {
  return expectation(rho, op, 1.0 + op.cwiseAbs().maxCoeff());
}

/// Powers 1..4 of the requested collective spin components.
class CollectiveMoments {
 public:
  explicit CollectiveMoments(const SpinSystem& system,
                             std::initializer_list<Axis> axes = {Axis::x, Axis::y, Axis::z}) {
    for (Axis a : axes) {
      auto& pw = powers_[static_cast<std::size_t>(a)];
      if (a == Axis::y) {
        pw[0] = system.collective(a);
        for (int p = 1; p < 4; ++p) pw[static_cast<std::size_t>(p)] = pw[static_cast<std::size_t>(p - 1)] * pw[0];
      } else {
        // J_x and J_z are real in this basis.
        auto& rp = real_powers_[static_cast<std::size_t>(a)];
        rp[0] = system.collective(a).real();
        pw[0] = rp[0].cast<Complex>();
        for (int p = 1; p < 4; ++p) {
          rp[static_cast<std::size_t>(p)] = rp[static_cast<std::size_t>(p - 1)] * rp[0];
          pw[static_cast<std::size_t>(p)] = rp[static_cast<std::size_t>(p)].cast<Complex>();
        }
      }
      for (int p = 0; p < 4; ++p) {
        scale_[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] =
            1.0 + pw[static_cast<std::size_t>(p)].cwiseAbs().maxCoeff();
      }
      ready_[static_cast<std::size_t>(a)] = true;
    }
  }

  [[nodiscard]] const Matrix& power(Axis a, int p) const {
    if (p < 1 || p > 4) throw DomainError("moment power must be 1..4");
    if (!ready_[static_cast<std::size_t>(a)]) {
      throw DomainError(std::string("axis ") + axis_name(a) + " was not precomputed");
    }
    return powers_[static_cast<std::size_t>(a)][static_cast<std::size_t>(p - 1)];
  }

  /// J_x^p and J_z^p as real matrices.
  [[nodiscard]] const RealMatrix& real_power(Axis a, int p) const {
    if (a == Axis::y) throw DomainError("J_y is not real in the j_z basis");
    static_cast<void>(power(a, p));
    return real_powers_[static_cast<std::size_t>(a)][static_cast<std::size_t>(p - 1)];
  }

  /// <J_axis^power>.
  [[nodiscard]] double moment(const DensityOperator& rho, Axis a, int p) const {
    return expectation(rho, power(a, p),
                       scale_[static_cast<std::size_t>(a)][static_cast<std::size_t>(p - 1)]);
  }

 private:
  std::array<std::array<Matrix, 4>, 3> powers_;
  std::array<std::array<RealMatrix, 4>, 3> real_powers_;
  std::array<std::array<double, 4>, 3> scale_{};
  std::array<bool, 3> ready_{};
};

inline double moment(const DensityOperator& rho, Axis a, int p) {
  return CollectiveMoments(SpinSystem(rho.sites(), rho.spin()), {a}).moment(rho, a, p);
}

struct OracleSample {
  double jx2 = 0.0;
  double jx4 = 0.0;
};

/// <J_x^2> and <J_x^4> of evolve_gradient(rho, geom, theta) in one pass,
/// without materializing the evolved state.
inline OracleSample evolved_jx_moments(const DensityOperator& rho, const ChainGeometry& geom, double theta,
                                       const CollectiveMoments& moments) {
  geom.require_size(rho.sites());
  const SpinSystem system(rho.sites(), rho.spin());
  const RealMatrix& a2 = moments.real_power(Axis::x, 2);
  const RealMatrix& a4 = moments.real_power(Axis::x, 4);
  if (a2.rows() != rho.dim()) throw DomainError("operator dimension mismatch");
  std::vector<double> phase(static_cast<std::size_t>(system.dim()));
  for (int b = 0; b < system.dim(); ++b) {
    double acc = 0.0;
    for (int s = 0; s < system.sites(); ++s) acc += geom.phase(s, theta) * system.m_value(b, s);
    phase[static_cast<std::size_t>(b)] = acc;
  }
  std::vector<double> cs(phase.size());
  std::vector<double> sn(phase.size());
  for (std::size_t b = 0; b < phase.size(); ++b) {
    cs[b] = std::cos(phase[b]);
    sn[b] = std::sin(phase[b]);
  }
  const Matrix& in = rho.matrix();
  double s2 = 0.0;
  double s4 = 0.0;
  double i2 = 0.0;
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    for (Eigen::Index r = 0; r < in.rows(); ++r) {
      // w = exp(-i (phi_r - phi_c))
      const double wr = cs[static_cast<std::size_t>(r)] * cs[static_cast<std::size_t>(c)] +
                        sn[static_cast<std::size_t>(r)] * sn[static_cast<std::size_t>(c)];
      const double wi = sn[static_cast<std::size_t>(c)] * cs[static_cast<std::size_t>(r)] -
                        sn[static_cast<std::size_t>(r)] * cs[static_cast<std::size_t>(c)];
      const Complex v = in(r, c);
      const double re = v.real() * wr - v.imag() * wi;
      s2 += re * a2(r, c);
      s4 += re * a4(r, c);
      i2 += (v.real() * wi + v.imag() * wr) * a2(r, c);
    }
  }
  if (std::abs(i2) > 1e-12 * (1.0 + a2.cwiseAbs().maxCoeff())) {
    throw NumericalInconsistency("expectation value has imaginary part " + std::to_string(i2));
  }
  return {s2, s4};
}

/// Per-site white noise rho -> (1-q) rho + q (1/2 (x) Tr_site rho), applied to
/// every qubit in turn.
inline DensityOperator depolarize(const DensityOperator& rho, double q) {
  if (!rho.spin().is_half()) throw DomainError("depolarizing channel is defined for qubits only");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("q must lie in [0,1]");
  const SpinSystem system(rho.sites(), rho.spin());
  Matrix cur = rho.matrix();
  const int dim = system.dim();
  for (int s = 0; s < system.sites(); ++s) {
    Matrix next = (1.0 - q) * cur;
    for (int c = 0; c < dim; ++c) {
      for (int r = 0; r < dim; ++r) {
        if (system.digit(r, s) != system.digit(c, s)) continue;
        const Complex traced = cur(system.with_digit(r, s, 0), system.with_digit(c, s, 0)) +
                               cur(system.with_digit(r, s, 1), system.with_digit(c, s, 1));
        next(r, c) += 0.5 * q * traced;
      }
    }
    cur = std::move(next);
  }
  return {system, std::move(cur)};
}

/// Reduced state on `keep` (in the given order) as a dense matrix.
inline Matrix partial_trace(const DensityOperator& rho, const std::vector<int>& keep) {
  const SpinSystem system(rho.sites(), rho.spin());
  const int d = system.local_dim();
  int kdim = 1;
  for (std::size_t i = 0; i < keep.size(); ++i) kdim *= d;
  Matrix out = Matrix::Zero(kdim, kdim);
  auto reduced_index = [&](int full) {
    int idx = 0;
    for (int s : keep) idx = idx * d + system.digit(full, s);
    return idx;
  };
  std::vector<char> kept(static_cast<std::size_t>(system.sites()), 0);
  for (int s : keep) kept[static_cast<std::size_t>(s)] = 1;
  for (int r = 0; r < system.dim(); ++r) {
    for (int c = 0; c < system.dim(); ++c) {
      bool same = true;
      for (int s = 0; s < system.sites() && same; ++s) {
        if (!kept[static_cast<std::size_t>(s)] && system.digit(r, s) != system.digit(c, s)) same = false;
      }
      if (same) out(reduced_index(r), reduced_index(c)) += rho.matrix()(r, c);
    }
  }
  return out;
}

/// <prod_k j_{axis_k}^{(site_k)}> over distinct sites.
inline double local_product_expectation(const DensityOperator& rho,
                                        const std::vector<std::pair<int, Axis>>& factors) {
  std::vector<int> sites;
  for (const auto& f : factors) sites.push_back(f.first);
  const Matrix reduced = partial_trace(rho, sites);
  const LocalSpin local(rho.spin());
  Matrix op = Matrix::Ones(1, 1);
  for (const auto& f : factors) {
    const Matrix m = local.component(f.second);
    Matrix next(op.rows() * m.rows(), op.cols() * m.cols());
    for (Eigen::Index r = 0; r < op.rows(); ++r) {
      for (Eigen::Index c = 0; c < op.cols(); ++c) {
        next.block(r * m.rows(), c * m.cols(), m.rows(), m.cols()) = op(r, c) * m;
      }
    }
    op = std::move(next);
  }
  const Complex v = (reduced * op).trace();
  return v.real();
}

/// Eigenspaces of J_x for projector expectations.
class JxSpectrum {
 public:
  explicit JxSpectrum(const SpinSystem& system) {
    const RealMatrix jx = system.collective(Axis::x).real();
    const Eigen::SelfAdjointEigenSolver<RealMatrix> es(jx);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const double ev = es.eigenvalues()(k);
      const int twice = static_cast<int>(std::lround(2.0 * ev));
      if (std::abs(2.0 * ev - twice) > 2e-9) {
        throw NumericalInconsistency("J_x eigenvalue off the half-integer lattice");
      }
      bins_[twice].push_back(es.eigenvectors().col(k));
    }
  }

  /// Tr(rho P_{J_x = m}); 0 when m is not in the spectrum.
  [[nodiscard]] double value(const DensityOperator& rho, double m) const {
    const int twice = static_cast<int>(std::lround(2.0 * m));
    if (std::abs(2.0 * m - twice) > 1e-9) return 0.0;
    const auto it = bins_.find(twice);
    if (it == bins_.end()) return 0.0;
    double acc = 0.0;
    for (const Eigen::VectorXd& v : it->second) {
      const Eigen::VectorXcd vc = v.cast<Complex>();
      acc += (vc.adjoint() * rho.matrix() * vc)(0, 0).real();
    }
    return acc;
  }

  [[nodiscard]] std::vector<double> eigenvalues() const {
    std::vector<double> out;
    for (const auto& [twice, vecs] : bins_) out.push_back(0.5 * twice);
    return out;
  }

 private:
  std::map<int, std::vector<Eigen::VectorXd>> bins_;
};

inline double projector_jx_value(const DensityOperator& rho, double m) {
  return JxSpectrum(SpinSystem(rho.sites(), rho.spin())).value(rho, m);
}

/// Slopes below this multiple of max|f| / h are rounding noise of the stencil.
inline constexpr double kStencilNoise = 1e-13;

/// Moments, slope and error-propagation (Delta theta)^-1 from a state family,
/// with a 5-point central difference for d<J_x^2>/dtheta. Steps above 0.05
/// are rejected.
inline MomentPoint oracle_point(const std::function<OracleSample(double)>& family, double theta,
                                double step = 1e-3) {
  if (!(step > 0.0) || step > 0.05) throw DomainError("stencil step must lie in (0, 0.05]");
  const OracleSample mid = family(theta);
  const double fm2 = family(theta - 2.0 * step).jx2;
  const double fm1 = family(theta - step).jx2;
  const double fp1 = family(theta + step).jx2;
  const double fp2 = family(theta + 2.0 * step).jx2;
  double deriv = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * step);
  const double scale = std::max({std::abs(fm2), std::abs(fm1), std::abs(fp1), std::abs(fp2)});
  if (std::abs(deriv) <= kStencilNoise * scale / step) deriv = 0.0;
  MomentPoint p;
  p.jx2 = mid.jx2;
  p.jx4 = mid.jx4;
  p.var_jx2 = clamp_variance(mid.jx4 - mid.jx2 * mid.jx2, p.flags);
  p.djx2 = deriv;
  p.inv_precision = inverse_precision(deriv, p.var_jx2, p.flags);
  return p;
}

inline double oracle_precision(const std::function<OracleSample(double)>& family, double theta,
                               double step = 1e-3) {
  return oracle_point(family, theta, step).inv_precision;
}

/// Same on a precomputed uniform grid (>= 5 points, spacing <= max_step).
/// One-sided 5-point stencils are used at the two ends on each side.
inline std::vector<double> oracle_precision_grid(const std::vector<double>& thetas,
                                                 const std::vector<OracleSample>& samples,
                                                 double max_step = 0.05) {
  const std::size_t n = thetas.size();
  if (n < 5 || samples.size() != n) throw DomainError("need >= 5 grid points with matching samples");
  const double h = (thetas.back() - thetas.front()) / static_cast<double>(n - 1);
  if (!(h > 0.0) || h > max_step) throw DomainError("grid too coarse for a 5-point stencil");
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(thetas[i] - thetas[i - 1] - h) > 1e-9 * (1.0 + std::abs(h))) {
      throw DomainError("grid must be uniform");
    }
  }
  auto f = [&](std::size_t i) { return samples[i].jx2; };
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(f(i)));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    if (i >= 2 && i + 2 < n) {
      d = (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) / (12.0 * h);
    } else if (i < 2) {
      const std::size_t k = i;
      // forward differences anchored at 0 for points 0, 1
      const double c[2][5] = {{-25, 48, -36, 16, -3}, {-3, -10, 18, -6, 1}};
      for (int t = 0; t < 5; ++t) d += c[k][t] * f(static_cast<std::size_t>(t));
      d /= 12.0 * h;
    } else {
      const std::size_t k = n - 1 - i;
      const double c[2][5] = {{25, -48, 36, -16, 3}, {3, 10, -18, 6, -1}};
      for (int t = 0; t < 5; ++t) d += c[k][t] * f(n - 1 - static_cast<std::size_t>(t));
      d /= 12.0 * h;
    }
    if (std::abs(d) <= kStencilNoise * scale / h) d = 0.0;
    std::uint8_t flags = kNone;
    out[i] = inverse_precision(d, samples[i].jx4 - samples[i].jx2 * samples[i].jx2, flags);
  }
  return out;
}

/// Singlet of N spin-j particles: the pair mixture for qubits, the J = 0
/// projector otherwise.
inline DensityOperator build_singlet(int n, SpinQuantum j) {
  if (j.is_half() && n <= 10) return build_singlet_pair_mixture(n);
  return build_singlet_j0(n, j);
}

/// Exact chain curve: singlet, optional per-site noise q, gradient evolution.
inline MomentCurve sweep_oracle_chain(const ChainGeometry& geom, int n, SpinQuantum j,
                                      std::span<const double> grid, double q = 0.0,
                                      int threads = 1) {
  geom.require_size(n);
  const SpinSystem system(n, j);
  DensityOperator initial = build_singlet(n, j);
  if (q != 0.0) initial = depolarize(initial, q);
  const CollectiveMoments moments(system, {Axis::x});
  const auto family = [&](double theta) { return evolved_jx_moments(initial, geom, theta, moments); };
  const auto points = parallel_map(grid.size(), threads, [&](std::size_t i) { return oracle_point(family, grid[i]); });
  MomentCurve curve;
  curve.white_noise_jx2 = n * j.value() * (j.value() + 1.0) / 3.0;
  for (std::size_t i = 0; i < grid.size(); ++i) curve.push_back(grid[i], points[i]);
  return curve;
}

inline constexpr char kDumpMagic[8] = {'G', 'R', 'D', 'O', 'P', 'v', '0', '1'};

/// Binary dump: 8-byte magic, uint64 dimension, then dim*dim (re, im) pairs,
/// row-major, all little-endian.
inline void write_operator(const std::string& path, const Matrix& m) {
  if (m.rows() != m.cols()) throw DomainError("operator dump needs a square matrix");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  auto put_u64 = [&](std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  };
  out.write(kDumpMagic, 8);
  put_u64(static_cast<std::uint64_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_u64(std::bit_cast<std::uint64_t>(m(r, c).real()));
      put_u64(std::bit_cast<std::uint64_t>(m(r, c).imag()));
    }
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

inline Matrix read_operator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  auto get_u64 = [&]() {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("truncated operator dump '" + path + "'");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  };
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kDumpMagic, 8) != 0) {
    throw Error("'" + path + "' is not an operator dump");
  }
  const std::uint64_t dim = get_u64();
  if (dim == 0 || dim > static_cast<std::uint64_t>(kMaxDimension)) throw Error("bad dump dimension");
  Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double re = std::bit_cast<double>(get_u64());
      const double im = std::bit_cast<double>(get_u64());
      m(r, c) = Complex(re, im);
    }
  }
  return m;
}

}  // namespace gradiometry::oracle

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "cdlmg/error.hpp"
#include "cdlmg/ramp.hpp"

namespace cdlmg {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

/// Maximum-angular-momentum (Dicke) sector of N spin-1/2 particles.
///
/// Basis state |k>, k = 0..N, carries S_z eigenvalue k - N/2, so |N> is all spins up.
class DickeSector {
 public:
  explicit DickeSector(int n) : n_(n) {
    detail::require(n >= 1, "particle count N must be >= 1 (got " + std::to_string(n) + ")");
  }

  int n() const { return n_; }
  int dim() const { return n_ + 1; }
  double spin() const { return 0.5 * n_; }
  /// S_z eigenvalue of basis state |k>.
  double m(int k) const { return k - 0.5 * n_; }
  /// Parity (0 even, 1 odd) of the sector containing the fully polarized state |N>.
  int polarized_parity() const { return n_ % 2; }

  friend bool operator==(const DickeSector&, const DickeSector&) = default;

 private:
  int n_;
};

/// Dense complex matrix acting on a Dicke sector.
class OperatorMatrix {
 public:
  explicit OperatorMatrix(DickeSector sector)
      : sector_(sector), m_(Matrix::Zero(sector.dim(), sector.dim())) {}

  OperatorMatrix(DickeSector sector, Matrix m) : sector_(sector), m_(std::move(m)) {
    detail::require(m_.rows() == sector_.dim() && m_.cols() == sector_.dim(),
                    "operator shape does not match sector dimension " +
                        std::to_string(sector_.dim()));
  }

  static OperatorMatrix identity(DickeSector sector) {
    return {sector, Matrix::Identity(sector.dim(), sector.dim())};
  }

  const DickeSector& sector() const { return sector_; }
  int dim() const { return sector_.dim(); }
  const Matrix& matrix() const { return m_; }
  Matrix& matrix() { return m_; }
  cplx operator()(int r, int c) const { return m_(r, c); }
  cplx& operator()(int r, int c) { return m_(r, c); }

  OperatorMatrix adjoint() const { return {sector_, m_.adjoint()}; }
  double max_abs() const { return m_.size() ? m_.cwiseAbs().maxCoeff() : 0.0; }
  /// max |A - A^dagger| elementwise.
  double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_error() <= tol; }

  OperatorMatrix& operator+=(const OperatorMatrix& o) { check(o); m_ += o.m_; return *this; }
  OperatorMatrix& operator-=(const OperatorMatrix& o) { check(o); m_ -= o.m_; return *this; }
  OperatorMatrix& operator*=(cplx s) { m_ *= s; return *this; }

  friend OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b) { return a += b; }
  friend OperatorMatrix operator-(OperatorMatrix a, const OperatorMatrix& b) { return a -= b; }
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    a.check(b);
    return {a.sector_, a.m_ * b.m_};
  }
  friend OperatorMatrix operator*(cplx s, OperatorMatrix a) { return a *= s; }
  friend OperatorMatrix operator*(OperatorMatrix a, cplx s) { return a *= s; }
  friend OperatorMatrix operator*(double s, OperatorMatrix a) { return a *= s; }

 private:
  void check(const OperatorMatrix& o) const {
    detail::require(sector_ == o.sector_, "operators act on different sectors (N=" +
                                              std::to_string(sector_.n()) + " vs N=" +
                                              std::to_string(o.sector_.n()) + ")");
  }

  DickeSector sector_;
  Matrix m_;
};

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a * b - b * a;
}

inline OperatorMatrix anticommutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a * b + b * a;
}

inline OperatorMatrix power(const OperatorMatrix& a, int p) {
  detail::require(p >= 0, "negative operator power");
  OperatorMatrix out = OperatorMatrix::identity(a.sector());
  for (int i = 0; i < p; ++i) out = out * a;
  return out;
}

struct SpinOps {
  OperatorMatrix sx, sy, sz, splus, sminus;
};

/// Collective spin operators S_a = sum_i sigma_a^i / 2 for total spin S = N/2.
inline SpinOps build_spin_ops(DickeSector sector) {
  const int d = sector.dim();
  const double s = sector.spin();
  Matrix sp = Matrix::Zero(d, d);
  Matrix sz = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = sector.m(k);
    sz(k, k) = m;
    if (k + 1 < d) sp(k + 1, k) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  Matrix sm = sp.adjoint();
  Matrix sx = 0.5 * (sp + sm);
  Matrix sy = (sp - sm) / cplx(0.0, 2.0);
  return {{sector, sx}, {sector, sy}, {sector, sz}, {sector, sp}, {sector, sm}};
}

/// LMG model parameters. gamma is the anisotropy; the ramp drives h(t).
struct ModelParams {
  int n = 2;
  double gamma = 0.0;
  RampSchedule ramp = RampSchedule::linear(0.75, 0.5);

  DickeSector sector() const { return DickeSector(n); }

  void validate() const {
    detail::require(n >= 2, "particle count N must be >= 2 (got " + std::to_string(n) + ")");
    detail::require(std::isfinite(gamma), "gamma must be finite");
    ramp.validate();
  }
};

/// Pieces of H_0(h) = -(2/N)(Sx^2 + gamma Sy^2) - 2 h Sz. The h-independent part is
/// real symmetric and the field couples through the diagonal of Sz.
struct H0Parts {
  RealMatrix interaction;  // -(2/N)(Sx^2 + gamma Sy^2)
  RealVector sz;           // diagonal of Sz

  RealMatrix at(double h) const {
    RealMatrix out = interaction;
    out.diagonal() -= 2.0 * h * sz;
    return out;
  }
};

inline H0Parts h0_parts(int n, double gamma) {
  const DickeSector sector(n);
  const SpinOps ops = build_spin_ops(sector);
  const Matrix sxx = ops.sx.matrix() * ops.sx.matrix();
  const Matrix syy = ops.sy.matrix() * ops.sy.matrix();
  H0Parts parts;
  parts.interaction = (-(2.0 / n) * (sxx + gamma * syy)).real();
  parts.sz = ops.sz.matrix().diagonal().real();
  return parts;
}

/// H_0(h) without the constant energy shift; include_shift adds +(1+gamma)/2.
inline OperatorMatrix build_h0(const ModelParams& params, double h, bool include_shift = false) {
  detail::require(params.n >= 2, "particle count N must be >= 2");
  const H0Parts parts = h0_parts(params.n, params.gamma);
  RealMatrix m = parts.at(h);
  if (include_shift) m.diagonal().array() += 0.5 * (1.0 + params.gamma);
  return {params.sector(), m.cast<cplx>()};
}

struct ParityProjectors {
  OperatorMatrix even, odd;
};

/// Projectors onto basis states |k> with k even / odd.
inline ParityProjectors parity_projectors(DickeSector sector) {
  OperatorMatrix pe(sector), po(sector);
  for (int k = 0; k < sector.dim(); ++k) (k % 2 == 0 ? pe : po)(k, k) = 1.0;
  return {pe, po};
}

/// Basis indices of one parity sector (parity 0: even k).
inline std::vector<int> parity_indices(int dim, int parity) {
  std::vector<int> idx;
  for (int k = parity; k < dim; k += 2) idx.push_back(k);
  return idx;
}

/// Largest entry coupling basis states of opposite parity.
inline double parity_leak(const Matrix& m) {
  double worst = 0.0;
  for (int c = 0; c < m.cols(); ++c)
    for (int r = (c + 1) % 2; r < m.rows(); r += 2) worst = std::max(worst, std::abs(m(r, c)));
  return worst;
}

}  // namespace cdlmg

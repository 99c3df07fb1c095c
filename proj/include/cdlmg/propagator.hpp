#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cdlmg/error.hpp"
#include "cdlmg/spin_algebra.hpp"

namespace cdlmg {

namespace detail {

inline void propagate_block(const Matrix& h, const std::vector<int>& idx, double dt, Vector& psi) {
  const int n = static_cast<int>(idx.size());
  if (n == 0) return;
  Matrix sub(n, n);
  Vector v(n);
  for (int r = 0; r < n; ++r) {
    v(r) = psi(idx[r]);
    for (int c = 0; c < n; ++c) sub(r, c) = h(idx[r], idx[c]);
  }
  if (v.cwiseAbs().maxCoeff() == 0.0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
  if (es.info() != Eigen::Success) throw NumericalError("propagator eigensolver failed");
  const Vector phases = (es.eigenvalues().cast<cplx>() * cplx(0.0, -dt)).array().exp();
  const Vector out = es.eigenvectors() * phases.asDiagonal() * (es.eigenvectors().adjoint() * v);
  for (int r = 0; r < n; ++r) psi(idx[r]) = out(r);
}

}  // namespace detail

/// psi <- exp(-i H dt) psi by exact diagonalization of the Hermitian H.
/// Parity-conserving generators are exponentiated block by block.
inline void propagate_exact(const Matrix& h, double dt, Vector& psi) {
  const int d = static_cast<int>(h.rows());
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (parity_leak(h) <= 1e-14 * scale) {
    detail::propagate_block(h, parity_indices(d, 0), dt, psi);
    detail::propagate_block(h, parity_indices(d, 1), dt, psi);
    return;
  }
  std::vector<int> all(d);
  for (int k = 0; k < d; ++k) all[k] = k;
  detail::propagate_block(h, all, dt, psi);
}

/// psi <- exp(-i H dt) psi by a Taylor series summed to machine precision.
/// The step is split so each piece has ||H dt||_1 <= 0.5.
template <class Mat>
void propagate_taylor(const Mat& h, double dt, Vector& psi) {
  const double norm1 = h.cwiseAbs().colwise().sum().maxCoeff();
  const int pieces = std::max(1, static_cast<int>(std::ceil(norm1 * std::abs(dt) / 0.5)));
  const double tau = dt / pieces;
  const cplx factor(0.0, -tau);
  Vector term(psi.size());
  for (int p = 0; p < pieces; ++p) {
    term = psi;
    Vector acc = psi;
    for (int k = 1; k < 40; ++k) {
      term = (h * term).eval() * (factor / double(k));
      acc += term;
      if (term.norm() <= 1e-17 * acc.norm()) break;
    }
    psi = acc;
  }
}

}  // namespace cdlmg

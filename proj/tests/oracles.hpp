#pragma once

// Reference computations that share no code with the library: collective spins from the
// full tensor-product space, driving terms from finite differences of spectral projectors,
// and Runge-Kutta integration of the Schroedinger equation.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct Spins {
  Mat sx, sy, sz;
};

/// Collective spin operators restricted to the symmetric subspace, built from 2^N-dimensional
/// Pauli sums. Basis state k is the normalized symmetric state with k spins up.
inline Spins dicke_spins(int n) {
  const int dim = 1 << n;
  Mat sx = Mat::Zero(dim, dim), sy = Mat::Zero(dim, dim), sz = Mat::Zero(dim, dim);
  for (int s = 0; s < dim; ++s)
    for (int q = 0; q < n; ++q) {
      const bool up = (s >> q) & 1;
      const int flipped = s ^ (1 << q);
      sx(flipped, s) += 0.5;
      sy(flipped, s) += up ? cplx(0.0, 0.5) : cplx(0.0, -0.5);
      sz(s, s) += up ? 0.5 : -0.5;
    }
  Mat basis = Mat::Zero(dim, n + 1);
  for (int s = 0; s < dim; ++s) basis(s, __builtin_popcount(s)) = 1.0;
  for (int k = 0; k <= n; ++k) basis.col(k).normalize();
  return {basis.adjoint() * sx * basis, basis.adjoint() * sy * basis, basis.adjoint() * sz * basis};
}

/// Same operators from the textbook J_+ matrix elements, for sizes beyond the tensor product.
inline Spins ladder_spins(int n) {
  const double j = 0.5 * n;
  Mat jp = Mat::Zero(n + 1, n + 1), jz = Mat::Zero(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) {
    const double m = k - j;
    jz(k, k) = m;
    if (k < n) jp(k + 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  const Mat jm = jp.adjoint();
  return {0.5 * (jp + jm), cplx(0.0, -0.5) * (jp - jm), jz};
}

inline Mat lmg_h0(const Spins& s, int n, double gamma, double h) {
  return -(2.0 / n) * (s.sx * s.sx + gamma * s.sy * s.sy) - 2.0 * h * s.sz;
}

/// H_1 = (i/2) sum_n [dP_n/dt, P_n] with the projector derivative from central differences.
/// Valid for a nondegenerate spectrum.
inline Mat projector_cd(const std::function<Mat(double)>& h_of, double h, double hdot, double dh = 1e-5) {
  auto projectors = [&](double x) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h_of(x));
    std::vector<Mat> p;
    for (int k = 0; k < es.eigenvectors().cols(); ++k)
      p.push_back(es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint());
    return p;
  };
  const auto plus = projectors(h + dh), minus = projectors(h - dh), mid = projectors(h);
  Mat out = Mat::Zero(mid[0].rows(), mid[0].cols());
  for (std::size_t k = 0; k < mid.size(); ++k) {
    const Mat dp = (plus[k] - minus[k]) * (hdot / (2.0 * dh));
    out += dp * mid[k] - mid[k] * dp;
  }
  return cplx(0.0, 0.5) * out;
}

/// Fixed-step classical Runge-Kutta for i d(psi)/dt = H(t) psi.
inline Vec rk4(const std::function<Mat(double)>& h_of, Vec psi, double t0, double t1, int steps) {
  const double dt = (t1 - t0) / steps;
  const cplx mi(0.0, -1.0);
  for (int s = 0; s < steps; ++s) {
    const double t = t0 + s * dt;
    const Vec k1 = mi * (h_of(t) * psi);
    const Vec k2 = mi * (h_of(t + 0.5 * dt) * (psi + 0.5 * dt * k1));
    const Vec k3 = mi * (h_of(t + 0.5 * dt) * (psi + 0.5 * dt * k2));
    const Vec k4 = mi * (h_of(t + dt) * (psi + dt * k3));
    psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return psi;
}

inline Vec lowest_vector(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return es.eigenvectors().col(0);
}

/// Mixing angle of a real symmetric 2x2 block [[a, c], [c, b]]: lower eigenvector
/// cos(theta) e_0 + sin(theta) e_1.
inline double two_level_angle(double a, double b, double c) { return 0.5 * std::atan2(2.0 * c, a - b); }

/// Large-N gap above the transition.
inline double hp_gap(double h, double gamma) { return 2.0 * std::sqrt((h - 1.0) * (h - gamma)); }

}  // namespace oracle

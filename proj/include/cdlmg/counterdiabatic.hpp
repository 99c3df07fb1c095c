#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "cdlmg/error.hpp"
#include "cdlmg/io.hpp"
#include "cdlmg/spectrum.hpp"
#include "cdlmg/spin_algebra.hpp"

namespace cdlmg {

/// Half-width of the window around h = 1 where the oscillator correction is undefined.
inline constexpr double kHpSwitchTol = 1e-3;

enum class DrivingMode { exact, truncated, hp, analytic_n2, analytic_n3 };

inline std::string to_string(DrivingMode m) {
  switch (m) {
    case DrivingMode::exact: return "exact";
    case DrivingMode::truncated: return "truncated";
    case DrivingMode::hp: return "hp";
    case DrivingMode::analytic_n2: return "analytic_n2";
    case DrivingMode::analytic_n3: return "analytic_n3";
  }
  return "?";
}

/// Auxiliary Hamiltonian H_1 at one instant, in the S_z basis.
struct DrivingTerm {
  OperatorMatrix matrix;
  DrivingMode mode = DrivingMode::exact;
  int bands = 0;  // band count kept by a truncation
  double h = 0.0;
  double hdot = 0.0;
};

/// Exact transitionless driving term for H_0(h) moving at rate hdot.
///
/// <m|H_1|n> = i <m|dH_0/dt|n> / (E_n - E_m) with dH_0/dt = -2 hdot S_z; entries inside a
/// numerically degenerate cluster (including the diagonal) are zero.
inline DrivingTerm exact_cd(const SpectrumSnapshot& snap, const RealVector& sz_diag, double hdot) {
  const int d = snap.dim();
  OperatorMatrix out(DickeSector(d - 1));
  if (hdot != 0.0) {
    const auto clusters = snap.clusters();
    std::vector<int> cluster_of(d);
    for (int c = 0; c < static_cast<int>(clusters.size()); ++c)
      for (int n = clusters[c].first; n < clusters[c].second; ++n) cluster_of[n] = c;
    if (snap.real_parity_vectors) {
      // H_1 = i V K V^T with K real antisymmetric.
      const RealMatrix v = snap.vectors.real();
      RealMatrix k = v.transpose() * (sz_diag.asDiagonal() * v) * (-2.0 * hdot);
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n)
          k(m, n) = cluster_of[m] == cluster_of[n] ? 0.0 : k(m, n) / (snap.energies(n) - snap.energies(m));
      const RealMatrix h1 = v * k * v.transpose();
      out.matrix() = cplx(0.0, 1.0) * h1.cast<cplx>();
    } else {
      const Matrix& v = snap.vectors;
      Matrix k = v.adjoint() * (sz_diag.cast<cplx>().asDiagonal() * v) * (-2.0 * hdot);
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n)
          k(m, n) = cluster_of[m] == cluster_of[n] ? cplx(0.0)
                                                   : I * k(m, n) / (snap.energies(n) - snap.energies(m));
      out.matrix() = v * k * v.adjoint();
    }
    out.matrix() = 0.5 * (out.matrix() + out.matrix().adjoint()).eval();
  }
  return {out, DrivingMode::exact, 0, snap.h, hdot};
}

inline DrivingTerm exact_cd(const ModelParams& params, double h, double hdot) {
  const H0Parts parts = h0_parts(params.n, params.gamma);
  return exact_cd(diagonalize_h0(parts, h), parts.sz, hdot);
}

/// Coefficient table of an even-offset banded driving term.
///
/// Rows follow the excitation labelling used for the banded pattern: label p counts
/// down spins, so p corresponds to basis state |N - p>. x(i, j) (1-based, band i at
/// offset 2i, row j) is defined by  H_1[p + 2i][p] = i x(i, p + 1),  p = j - 1.
struct BandTable {
  int n = 0;
  std::vector<std::vector<double>> x;  // x[i-1][j-1]

  int bands() const { return static_cast<int>(x.size()); }
  bool empty() const { return x.empty(); }
  double operator()(int band, int row) const { return x.at(band - 1).at(row - 1); }

  double band_max(int band) const {
    double m = 0.0;
    for (double v : x.at(band - 1)) m = std::max(m, std::abs(v));
    return m;
  }

  /// Matrix holding only band `band` of the table.
  OperatorMatrix band_matrix(int band) const {
    OperatorMatrix out{DickeSector(n)};
    const auto& col = x.at(band - 1);
    for (int j = 1; j <= static_cast<int>(col.size()); ++j) {
      const int r = n - (j - 1) - 2 * band;  // our index of label p + 2i
      out(r, r + 2 * band) = I * col[j - 1];
      out(r + 2 * band, r) = -I * col[j - 1];
    }
    return out;
  }

  OperatorMatrix to_matrix() const {
    OperatorMatrix out{DickeSector(n)};
    for (int b = 1; b <= bands(); ++b) out += band_matrix(b);
    return out;
  }

  io::CsvTable to_csv() const {
    io::CsvTable table({"band", "row", "x"});
    for (int b = 1; b <= bands(); ++b)
      for (int j = 1; j <= static_cast<int>(x[b - 1].size()); ++j)
        table.add_row({double(b), double(j), x[b - 1][j - 1]});
    return table;
  }
};

namespace detail {

/// Largest entry violating the pattern: diagonal, odd offsets, real parts of even offsets.
inline double band_structure_violation(const Matrix& m) {
  double worst = 0.0;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      const int off = std::abs(r - c);
      if (off == 0 || off % 2 == 1)
        worst = std::max(worst, std::abs(m(r, c)));
      else
        worst = std::max(worst, std::abs(m(r, c).real()));
    }
  return worst;
}

}  // namespace detail

/// Reads band coefficients off a driving term. Trailing all-zero bands are dropped.
inline BandTable band_table(const OperatorMatrix& h1) {
  const int n = h1.sector().n();
  const double tol = 1e-10 * std::max(1.0, h1.max_abs());
  const double violation = detail::band_structure_violation(h1.matrix());
  if (violation > tol)
    throw StructureError("band_table: driving term at N=" + std::to_string(n) +
                         " has diagonal, odd-offset or real even-offset content of size " +
                         io::format_number(violation) +
                         "; the even-band pattern does not hold here");
  BandTable table;
  table.n = n;
  for (int b = 1; 2 * b <= n; ++b) {
    std::vector<double> col;
    for (int j = 1; j <= n + 1 - 2 * b; ++j) {
      const int r = n - (j - 1) - 2 * b;
      col.push_back((h1(r, r + 2 * b) / I).real());
    }
    table.x.push_back(std::move(col));
  }
  while (!table.x.empty() && table.band_max(table.bands()) <= tol) table.x.pop_back();
  return table;
}

inline BandTable band_table(const DrivingTerm& h1) { return band_table(h1.matrix); }

/// Keeps bands 1..k (offsets 2..2k) and zeroes everything else.
inline DrivingTerm truncate(const DrivingTerm& h1, int k) {
  detail::require(k >= 1, "truncate: band count must be >= 1");
  DrivingTerm out = h1;
  Matrix& m = out.matrix.matrix();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      const int off = std::abs(r - c);
      if (off == 0 || off % 2 == 1 || off > 2 * k) m(r, c) = 0.0;
    }
  out.mode = DrivingMode::truncated;
  out.bands = k;
  return out;
}

/// d ln(omega) / dh for the oscillator frequency of either phase.
///   h > 1:     omega = 2 sqrt((h-1)(h-gamma))
///   0 < h < 1: omega = 2 sqrt((1-h^2)(1-gamma))
inline double hp_log_frequency_slope(double h, double gamma) {
  if (h > 1.0) return 0.5 * (1.0 / (h - 1.0) + 1.0 / (h - gamma));
  return -h / (1.0 - h * h);
}

inline double hp_frequency(double h, double gamma) {
  if (h > 1.0) return 2.0 * std::sqrt((h - 1.0) * (h - gamma));
  return 2.0 * std::sqrt((1.0 - h * h) * (1.0 - gamma));
}

/// Coefficient c of the oscillator correction c (SxSy + SySx).
///
/// From i (omega'/4 omega)(a^2 - a^dag^2) with S_+ ~ sqrt(N) a one gets
/// |c| = |d ln(omega)/dt| / 2N. Above the transition the sign is the one of that mapping
/// (c = -omega'/(2 N omega)). Below it the oscillator lives along the tilted classical spin and
/// the sign is reversed, c = +omega'/(2 N omega); both signs are checked against the
/// exact driving term and the fidelity gain over the bare ramp in the tests.
inline double hp_coefficient(int n, double gamma, double h, double hdot) {
  detail::require(h > 0.0, "hp correction requires h > 0");
  detail::require(gamma < 1.0, "hp correction requires gamma < 1");
  if (std::abs(h - 1.0) < kHpSwitchTol)
    throw CriticalPointError("hp correction is undefined at the critical point (h = " +
                             io::format_number(h) + ")");
  const double rate = hdot * hp_log_frequency_slope(h, gamma);
  return (h > 1.0 ? -rate : rate) / (2.0 * n);
}

/// SxSy + SySx.
inline OperatorMatrix sxsy_symmetric(const SpinOps& ops) {
  return anticommutator(ops.sx, ops.sy);
}

inline DrivingTerm hp_correction(const ModelParams& params, double h, double hdot) {
  const double c = hp_coefficient(params.n, params.gamma, h, hdot);
  const SpinOps ops = build_spin_ops(params.sector());
  OperatorMatrix m = c * sxsy_symmetric(ops);
  m.matrix() = 0.5 * (m.matrix() + m.matrix().adjoint()).eval();
  return {m, DrivingMode::hp, 1, h, hdot};
}

/// Rate of change of the mixing angle of the 2x2 block {|p>, |p+2>} (excitation labels),
/// with lower eigenvector cos(theta)|p> + sin(theta)|p+2>.
inline double two_level_theta_dot(const ModelParams& params, int p, double h, double hdot) {
  const H0Parts parts = h0_parts(params.n, params.gamma);
  const int kp = params.n - p, kq = params.n - p - 2;
  const RealMatrix h0 = parts.at(h);
  const double a = h0(kp, kp), b = h0(kq, kq), c = h0(kp, kq);
  const double da = -2.0 * parts.sz(kp), db = -2.0 * parts.sz(kq);
  return hdot * c * (db - da) / ((b - a) * (b - a) + 4.0 * c * c);
}

/// Closed forms for N = 2 and N = 3, where every parity block is a two-level system.
///   N = 2: H_1 = thetadot (SxSy + SySx)
///   N = 3: H_1 = (thetadot_1 + thetadot_2)/(2 sqrt 3) B_0 + (thetadot_1 - thetadot_2)/sqrt 3 B_1
/// with B_0 = SxSy + SySx and B_1 = SxSySz + SzSySx.
inline DrivingTerm analytic_cd(const ModelParams& params, double h, double hdot) {
  detail::require(params.n == 2 || params.n == 3, "analytic driving term exists only for N = 2, 3");
  const SpinOps ops = build_spin_ops(params.sector());
  const OperatorMatrix b0 = sxsy_symmetric(ops);
  if (params.n == 2) {
    const double td = two_level_theta_dot(params, 0, h, hdot);
    return {td * b0, DrivingMode::analytic_n2, 1, h, hdot};
  }
  const OperatorMatrix b1 = ops.sx * ops.sy * ops.sz + ops.sz * ops.sy * ops.sx;
  const double t1 = two_level_theta_dot(params, 0, h, hdot);
  const double t2 = two_level_theta_dot(params, 1, h, hdot);
  const double r3 = std::sqrt(3.0);
  OperatorMatrix m = ((t1 + t2) / (2.0 * r3)) * b0 + ((t1 - t2) / r3) * b1;
  return {m, DrivingMode::analytic_n3, 1, h, hdot};
}

}  // namespace cdlmg

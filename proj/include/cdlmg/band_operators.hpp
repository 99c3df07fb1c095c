#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdlmg/counterdiabatic.hpp"
#include "cdlmg/error.hpp"
#include "cdlmg/io.hpp"
#include "cdlmg/spin_algebra.hpp"

namespace cdlmg {

/// B_j for the first band:
///   j even: Sz^{j/2} (SxSy + SySx) Sz^{j/2}
///   j odd:  Sz^{(j-1)/2} SxSy Sz^{(j+1)/2} + Sz^{(j+1)/2} SySx Sz^{(j-1)/2}
inline OperatorMatrix build_Bj(DickeSector sector, int j) {
  detail::require(j >= 0 && j <= sector.n() - 2,
                  "build_Bj: j=" + std::to_string(j) + " outside [0, N-2] for N=" +
                      std::to_string(sector.n()));
  const SpinOps ops = build_spin_ops(sector);
  if (j % 2 == 0) {
    const OperatorMatrix z = power(ops.sz, j / 2);
    return z * anticommutator(ops.sx, ops.sy) * z;
  }
  const OperatorMatrix lo = power(ops.sz, (j - 1) / 2), hi = power(ops.sz, (j + 1) / 2);
  return lo * ops.sx * ops.sy * hi + hi * ops.sy * ops.sx * lo;
}

/// i (S_-^{2b} - S_+^{2b}); populates only the offset-2b diagonals.
inline OperatorMatrix build_band_generator(DickeSector sector, int b) {
  detail::require(b >= 1 && 2 * b <= sector.n(),
                  "build_band_generator: band " + std::to_string(b) + " outside [1, N/2]");
  const SpinOps ops = build_spin_ops(sector);
  return I * (power(ops.sminus, 2 * b) - power(ops.splus, 2 * b));
}

namespace detail {

/// Real least squares  sum_j c_j ops[j] ~ target  over the full complex matrices.
/// Columns are normalized first; rank deficiency falls back to the minimum-norm solution.
inline std::vector<double> solve_real_combination(const std::vector<OperatorMatrix>& ops,
                                                  const OperatorMatrix& target) {
  const int d = target.dim();
  const int rows = 2 * d * d;
  const int cols = static_cast<int>(ops.size());
  RealMatrix a(rows, cols);
  RealVector y(rows);
  auto flatten = [&](const Matrix& m, auto&& out) {
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) {
        out(2 * (c * d + r)) = m(r, c).real();
        out(2 * (c * d + r) + 1) = m(r, c).imag();
      }
  };
  RealVector scale(cols);
  for (int j = 0; j < cols; ++j) {
    flatten(ops[j].matrix(), a.col(j));
    scale(j) = a.col(j).norm();
    if (scale(j) > 0.0) a.col(j) /= scale(j);
  }
  flatten(target.matrix(), y);
  const RealVector sol = a.completeOrthogonalDecomposition().solve(y);
  std::vector<double> out(cols);
  for (int j = 0; j < cols; ++j) out[j] = scale(j) > 0.0 ? sol(j) / scale(j) : 0.0;
  return out;
}

inline std::string sz_power_label(int p) {
  if (p == 0) return "";
  if (p == 1) return "Sz";
  return "Sz^" + std::to_string(p);
}

/// Elementary first-band matrix: x(1, i) = 1 and every other entry zero.
inline OperatorMatrix first_band_unit(DickeSector sector, int i) {
  BandTable t;
  t.n = sector.n();
  t.x.assign(1, std::vector<double>(sector.n() - 1, 0.0));
  t.x[0][i - 1] = 1.0;
  return t.band_matrix(1);
}

}  // namespace detail

/// beta(i, j) with  E_i = sum_j beta(i, j) B_j,  E_i the unit first-band pattern of row i.
struct BetaMatrix {
  RealMatrix beta;  // row i-1 (i = 1..N-1), column j (j = 0..N-2)
  double residual = 0.0;

  double operator()(int i, int j) const { return beta(i - 1, j); }
};

inline constexpr double kBetaResidualTol = 1e-8;

inline BetaMatrix solve_first_band_beta(DickeSector sector) {
  const int n = sector.n();
  detail::require(n >= 2, "solve_first_band_beta requires N >= 2");
  std::vector<OperatorMatrix> basis;
  for (int j = 0; j <= n - 2; ++j) basis.push_back(build_Bj(sector, j));
  BetaMatrix out;
  out.beta = RealMatrix::Zero(n - 1, n - 1);
  for (int i = 1; i <= n - 1; ++i) {
    const OperatorMatrix target = detail::first_band_unit(sector, i);
    const std::vector<double> c = detail::solve_real_combination(basis, target);
    OperatorMatrix rebuilt(sector);
    for (int j = 0; j <= n - 2; ++j) {
      out.beta(i - 1, j) = c[j];
      rebuilt += c[j] * basis[j];
    }
    out.residual = std::max(out.residual, (rebuilt - target).max_abs());
  }
  if (out.residual > kBetaResidualTol)
    throw DecompositionError("first-band beta solve at N=" + std::to_string(n) +
                             " leaves residual " + io::format_number(out.residual));
  return out;
}

/// Sum of coefficient * operator terms with human-readable operator labels.
struct OperatorDecomposition {
  struct Term {
    double coefficient;
    OperatorMatrix op;
    std::string label;
  };

  DickeSector sector{2};
  int band = 0;
  std::vector<Term> terms;
  double residual = 0.0;

  bool empty() const { return terms.empty(); }

  OperatorMatrix sum() const {
    OperatorMatrix out(sector);
    for (const auto& t : terms) out += t.coefficient * t.op;
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json terms_json = nlohmann::json::array();
    for (const auto& t : terms) terms_json.push_back({{"label", t.label}, {"coefficient", t.coefficient}});
    return terms_json;
  }
};

/// Dressed operators spanning band b. With Q_b = (i/2)(S_-^{2b} - S_+^{2b}):
///   j even: Sz^{j/2} Q_b Sz^{j/2}
///   j odd:  (Sz^{(j-1)/2} Q_b Sz^{(j+1)/2} + Sz^{(j+1)/2} Q_b Sz^{(j-1)/2}) / 2
/// for j = 0..N-2b. For b = 1 these coincide with B_j.
inline std::vector<OperatorDecomposition::Term> band_dressing_basis(DickeSector sector, int b) {
  const OperatorMatrix q = 0.5 * build_band_generator(sector, b);
  const SpinOps ops = build_spin_ops(sector);
  const std::string core =
      b == 1 ? "(SxSy+SySx)" : "Q" + std::to_string(b);
  std::vector<OperatorDecomposition::Term> basis;
  for (int j = 0; j <= sector.n() - 2 * b; ++j) {
    if (b == 1) {
      const int p = j / 2;
      std::string label;
      if (j % 2 == 0) {
        label = detail::sz_power_label(p) + core + detail::sz_power_label(p);
      } else {
        label = detail::sz_power_label(p) + "SxSy" + detail::sz_power_label(p + 1) + "+" +
                detail::sz_power_label(p + 1) + "SySx" + detail::sz_power_label(p);
      }
      basis.push_back({1.0, build_Bj(sector, j), label});
      continue;
    }
    if (j % 2 == 0) {
      const OperatorMatrix z = power(ops.sz, j / 2);
      basis.push_back({1.0, z * q * z,
                       detail::sz_power_label(j / 2) + core + detail::sz_power_label(j / 2)});
    } else {
      const OperatorMatrix lo = power(ops.sz, (j - 1) / 2), hi = power(ops.sz, (j + 1) / 2);
      basis.push_back({1.0, 0.5 * (lo * q * hi + hi * q * lo),
                       "sym(" + detail::sz_power_label((j - 1) / 2) + core +
                           detail::sz_power_label((j + 1) / 2) + ")"});
    }
  }
  return basis;
}

inline constexpr double kDecompositionTol = 1e-10;

/// Expresses a single-band matrix through the dressed basis of band b.
inline OperatorDecomposition decompose_band(const OperatorMatrix& target, int b) {
  const DickeSector sector = target.sector();
  detail::require(b >= 1 && 2 * b <= sector.n(), "decompose_band: band out of range");
  const double scale = std::max(1.0, target.max_abs());
  for (int r = 0; r < target.dim(); ++r)
    for (int c = 0; c < target.dim(); ++c)
      if (std::abs(r - c) != 2 * b && std::abs(target(r, c)) > 1e-12 * scale)
        throw ValidationError("decompose_band: target has entries off the offset-" +
                              std::to_string(2 * b) + " diagonals");
  OperatorDecomposition out;
  out.sector = sector;
  out.band = b;
  if (target.max_abs() == 0.0) return out;

  auto basis = band_dressing_basis(sector, b);
  std::vector<OperatorMatrix> ops;
  for (const auto& t : basis) ops.push_back(t.op);
  const std::vector<double> c = detail::solve_real_combination(ops, target);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    basis[j].coefficient = c[j];
    out.terms.push_back(std::move(basis[j]));
  }
  out.residual = (out.sum() - target).max_abs();
  if (out.residual > kDecompositionTol * scale) {
    std::string labels;
    for (const auto& t : out.terms) labels += (labels.empty() ? "" : ", ") + t.label;
    throw DecompositionError("decompose_band: band " + std::to_string(b) + " at N=" +
                             std::to_string(sector.n()) + " leaves residual " +
                             io::format_number(out.residual) + " with basis {" + labels + "}");
  }
  return out;
}

/// Decomposes bands 1..k of a driving term.
inline std::vector<OperatorDecomposition> decompose_driving(const OperatorMatrix& h1, int k) {
  const BandTable table = band_table(h1);
  std::vector<OperatorDecomposition> out;
  for (int b = 1; b <= std::min(k, table.bands()); ++b)
    out.push_back(decompose_band(table.band_matrix(b), b));
  return out;
}

}  // namespace cdlmg

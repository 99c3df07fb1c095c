#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "cdlmg/error.hpp"
#include "cdlmg/io.hpp"
#include "cdlmg/spin_algebra.hpp"

namespace cdlmg {

/// Relative width of a numerically degenerate cluster: |E_a - E_b| < 1e-8 ||H||.
inline constexpr double kDegeneracyRelTol = 1e-8;
/// Successive eigenvectors overlapping less than this mean the ramp grid is too coarse.
inline constexpr double kMinAlignOverlap = 0.1;

/// Sorted eigenvalues and gauge-fixed orthonormal eigenvectors (columns) at one instant.
struct SpectrumSnapshot {
  double h = std::numeric_limits<double>::quiet_NaN();
  RealVector energies;
  Matrix vectors;
  double degeneracy_tol = 0.0;
  /// True when every eigenvector is real and of definite parity.
  bool real_parity_vectors = false;

  int dim() const { return static_cast<int>(energies.size()); }
  Vector vector(int n) const { return vectors.col(n); }

  /// Half-open index ranges [first, last) of numerically degenerate levels.
  std::vector<std::pair<int, int>> clusters() const {
    std::vector<std::pair<int, int>> out;
    int start = 0;
    for (int n = 1; n <= dim(); ++n) {
      if (n == dim() || energies(n) - energies(n - 1) >= degeneracy_tol) {
        out.emplace_back(start, n);
        start = n;
      }
    }
    return out;
  }
};

namespace detail {

/// Largest-magnitude component made real and positive.
inline void fix_gauge(Matrix& vectors) {
  for (int c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    const cplx v = vectors(arg, c);
    if (std::abs(v) == 0.0) continue;
    vectors.col(c) *= std::conj(v) / std::abs(v);
    vectors(arg, c) = std::abs(vectors(arg, c));
  }
}

struct Level {
  double energy;
  Vector vec;
};

template <class Mat>
void solve_block(const Mat& h, const std::vector<int>& idx, int dim, std::vector<Level>& out) {
  const int n = static_cast<int>(idx.size());
  if (n == 0) return;
  Mat sub(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) sub(r, c) = h(idx[r], idx[c]);
  Eigen::SelfAdjointEigenSolver<Mat> es(sub);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed to converge");
  for (int a = 0; a < n; ++a) {
    Vector v = Vector::Zero(dim);
    for (int r = 0; r < n; ++r) v(idx[r]) = es.eigenvectors()(r, a);
    out.push_back({es.eigenvalues()(a), std::move(v)});
  }
}

template <class Mat>
SpectrumSnapshot assemble(const Mat& h, bool by_parity, double field) {
  const int dim = static_cast<int>(h.rows());
  std::vector<Level> levels;
  levels.reserve(dim);
  if (by_parity) {
    solve_block(h, parity_indices(dim, 0), dim, levels);
    solve_block(h, parity_indices(dim, 1), dim, levels);
  } else {
    std::vector<int> all(dim);
    std::iota(all.begin(), all.end(), 0);
    solve_block(h, all, dim, levels);
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.energy < b.energy; });
  SpectrumSnapshot snap;
  snap.h = field;
  snap.energies.resize(dim);
  snap.vectors.resize(dim, dim);
  for (int n = 0; n < dim; ++n) {
    snap.energies(n) = levels[n].energy;
    snap.vectors.col(n) = levels[n].vec;
  }
  fix_gauge(snap.vectors);
  const double norm = dim ? snap.energies.cwiseAbs().maxCoeff() : 0.0;
  snap.degeneracy_tol = kDegeneracyRelTol * norm;
  snap.real_parity_vectors = by_parity && snap.vectors.imag().cwiseAbs().maxCoeff() == 0.0;
  return snap;
}

}  // namespace detail

/// Full eigendecomposition of a Hermitian operator.
///
/// Operators that do not couple opposite parities are solved block by block, so every
/// eigenvector has definite parity even inside a degenerate even/odd pair.
inline SpectrumSnapshot diagonalize(const OperatorMatrix& op,
                                    double h = std::numeric_limits<double>::quiet_NaN()) {
  const Matrix& m = op.matrix();
  const double scale = std::max(1.0, op.max_abs());
  if (op.hermiticity_error() > 1e-10 * scale)
    throw ValidationError("diagonalize: operator is not Hermitian (|H - H^dagger| = " +
                          io::format_number(op.hermiticity_error()) + ")");
  const bool by_parity = parity_leak(m) <= 1e-14 * scale;
  if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
    const RealMatrix re = m.real();
    return detail::assemble(re, by_parity, h);
  }
  return detail::assemble(m, by_parity, h);
}

/// Spectrum of H_0(h) using precomputed model pieces.
inline SpectrumSnapshot diagonalize_h0(const H0Parts& parts, double h) {
  return detail::assemble(parts.at(h), true, h);
}

inline SpectrumSnapshot diagonalize_h0(const ModelParams& params, double h) {
  return diagonalize_h0(h0_parts(params.n, params.gamma), h);
}

/// Discrete parallel transport of cur onto prev.
///
/// Non-degenerate levels get the phase making <v_n(prev)|v_n(cur)> real positive;
/// a degenerate cluster is rotated by the unitary polar factor of its overlap block.
/// Energies are returned untouched.
inline SpectrumSnapshot gauge_align(const SpectrumSnapshot& prev, const SpectrumSnapshot& cur) {
  detail::require(prev.dim() == cur.dim(), "gauge_align: snapshots differ in dimension");
  SpectrumSnapshot out = cur;
  for (const auto& [first, last] : cur.clusters()) {
    const int m = last - first;
    const Matrix overlap =
        cur.vectors.middleCols(first, m).adjoint() * prev.vectors.middleCols(first, m);
    if (m == 1) {
      const cplx ov = overlap(0, 0);
      if (std::abs(ov) < kMinAlignOverlap)
        throw GridTooCoarseError("gauge_align: level " + std::to_string(first) +
                                 " overlaps its predecessor by only " +
                                 io::format_number(std::abs(ov)) + "; use a finer h grid");
      out.vectors.col(first) *= ov / std::abs(ov);
      continue;
    }
    Eigen::JacobiSVD<Matrix> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues().minCoeff() < kMinAlignOverlap)
      throw GridTooCoarseError("gauge_align: degenerate levels " + std::to_string(first) + ".." +
                               std::to_string(last - 1) +
                               " lost continuity with the previous grid point; use a finer h grid");
    const Matrix polar = svd.matrixU() * svd.matrixV().adjoint();
    out.vectors.middleCols(first, m) = cur.vectors.middleCols(first, m) * polar;
  }
  return out;
}

/// Follows one eigenvector of H_0 along a ramp by overlap continuity.
///
/// At the first field value the lowest level is taken; inside a degenerate ground
/// cluster the member with most weight in the parity sector of |N> is chosen, since
/// that is the branch connecting to the unique ground state at large field.
class GroundTracker {
 public:
  explicit GroundTracker(const ModelParams& params)
      : parts_(h0_parts(params.n, params.gamma)), sector_(params.sector()) {}

  const Vector& start(double h) {
    snap_ = diagonalize_h0(parts_, h);
    const auto [first, last] = snap_.clusters().front();
    const std::vector<int> idx = parity_indices(snap_.dim(), sector_.polarized_parity());
    double best = -1.0;
    for (int n = first; n < last; ++n) {
      double w = 0.0;
      for (int k : idx) w += std::norm(snap_.vectors(k, n));
      if (w > best + 1e-12) {
        best = w;
        level_ = n;
      }
    }
    ground_ = snap_.vector(level_);
    overlap_ = 1.0;
    started_ = true;
    return ground_;
  }

  const Vector& advance(double h) {
    if (!started_) return start(h);
    snap_ = gauge_align(snap_, diagonalize_h0(parts_, h));
    const RealVector ov = (snap_.vectors.adjoint() * ground_).cwiseAbs();
    Eigen::Index arg = 0;
    overlap_ = ov.maxCoeff(&arg);
    if (overlap_ <= 0.5)
      throw GridTooCoarseError("ground-state tracking lost continuity at h = " +
                               io::format_number(h) + " (overlap " +
                               io::format_number(overlap_) + "); refine the time grid");
    level_ = static_cast<int>(arg);
    ground_ = snap_.vector(level_);
    return ground_;
  }

  const Vector& ground() const { return ground_; }
  int level() const { return level_; }
  double last_overlap() const { return overlap_; }
  const SpectrumSnapshot& snapshot() const { return snap_; }

 private:
  H0Parts parts_;
  DickeSector sector_;
  SpectrumSnapshot snap_;
  Vector ground_;
  int level_ = 0;
  double overlap_ = 1.0;
  bool started_ = false;
};

/// Energy differences E_j - E_i of H_0 over a field grid.
struct GapTable {
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> h;
  std::vector<std::vector<double>> gaps;  // gaps[row][pair]

  io::CsvTable to_csv() const {
    std::vector<std::string> header{"h"};
    for (auto [i, j] : pairs) header.push_back("gap" + std::to_string(i) + std::to_string(j));
    io::CsvTable table(header);
    for (std::size_t r = 0; r < h.size(); ++r) {
      std::vector<double> row{h[r]};
      row.insert(row.end(), gaps[r].begin(), gaps[r].end());
      table.add_row(row);
    }
    return table;
  }
};

inline const std::vector<std::pair<int, int>>& default_gap_pairs() {
  static const std::vector<std::pair<int, int>> pairs{{0, 1}, {2, 3}, {4, 5}};
  return pairs;
}

inline GapTable gap_series(const ModelParams& params, const std::vector<double>& h_grid,
                           const std::vector<std::pair<int, int>>& pairs = default_gap_pairs()) {
  detail::require(!h_grid.empty(), "gap_series: empty h grid");
  detail::require(std::is_sorted(h_grid.begin(), h_grid.end()), "gap_series: h grid must be sorted");
  for (auto [i, j] : pairs)
    detail::require(i >= 0 && j >= 0 && i <= params.n && j <= params.n,
                    "gap_series: level index out of range for N=" + std::to_string(params.n));
  const H0Parts parts = h0_parts(params.n, params.gamma);
  GapTable table;
  table.pairs = pairs;
  for (double h : h_grid) {
    const SpectrumSnapshot snap = diagonalize_h0(parts, h);
    std::vector<double> row;
    for (auto [i, j] : pairs) row.push_back(snap.energies(j) - snap.energies(i));
    table.h.push_back(h);
    table.gaps.push_back(std::move(row));
  }
  return table;
}

}  // namespace cdlmg

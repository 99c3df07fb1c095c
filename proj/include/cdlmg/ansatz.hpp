#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/NonLinearOptimization>

#include "cdlmg/banded_ansatz.hpp"
#include "cdlmg/counterdiabatic.hpp"
#include "cdlmg/dynamics.hpp"
#include "cdlmg/error.hpp"
#include "cdlmg/io.hpp"
#include "cdlmg/nelder_mead.hpp"
#include "cdlmg/propagator.hpp"
#include "cdlmg/spin_algebra.hpp"

namespace cdlmg {

/// Piecewise-constant band values x_1..x_k on a uniform segmentation of the ramp.
struct BandCoefficients {
  int bands = 0;
  std::vector<double> boundaries;          // segments + 1 times
  std::vector<std::vector<double>> values;  // values[segment][band - 1]

  int segments() const { return static_cast<int>(values.size()); }

  int segment_at(double t) const {
    const auto it = std::upper_bound(boundaries.begin() + 1, boundaries.end() - 1, t);
    return static_cast<int>(it - boundaries.begin()) - 1;
  }

  const std::vector<double>& at(double t) const { return values[segment_at(t)]; }

  std::vector<double> midpoints() const {
    std::vector<double> out;
    for (int s = 0; s < segments(); ++s) out.push_back(0.5 * (boundaries[s] + boundaries[s + 1]));
    return out;
  }

  std::vector<double> band_series(int band) const {
    std::vector<double> out;
    for (const auto& v : values) out.push_back(v.at(band - 1));
    return out;
  }

  Protocol protocol(const std::string& label = "optimized") const {
    BandCoefficients copy = *this;
    return Protocol::ansatz(bands, [copy](double t) { return copy.at(t); }, label);
  }

  /// One row per segment at its midpoint.
  io::CsvTable to_csv() const {
    std::vector<std::string> header{"t"};
    for (int b = 1; b <= bands; ++b) header.push_back("x_" + std::to_string(b));
    io::CsvTable table(header);
    const auto mids = midpoints();
    for (int s = 0; s < segments(); ++s) {
      std::vector<double> row{mids[s]};
      row.insert(row.end(), values[s].begin(), values[s].end());
      table.add_row(row);
    }
    return table;
  }

  nlohmann::json to_json() const {
    return {{"bands", bands}, {"boundaries", boundaries}, {"values", values}};
  }
};

struct OptimizeOptions {
  int bands = 1;
  int segments = 40;
  int steps_per_segment = 50;
  unsigned seed = 0;
  NelderMeadOptions simplex{};
};

struct OptimizationResult {
  BandCoefficients coefficients;
  Trajectory trajectory;                 // replay of the schedule through evolve
  std::vector<double> segment_fidelity;  // objective value reached at each segment end
  std::vector<std::string> warnings;
  long evaluations = 0;

  double min_fidelity() const { return trajectory.min_fidelity(); }
  double final_fidelity() const { return trajectory.final_fidelity(); }
};

namespace detail {

/// H_0 and the ansatz restricted to the parity sector holding |N>; the ansatz and H_0 never
/// leave it, so the optimizer propagates a vector of half the size.
struct SectorModel {
  RealMatrix interaction;
  RealVector sz;
  int size = 0;

  SectorModel(const ModelParams& params) {
    const H0Parts parts = h0_parts(params.n, params.gamma);
    const auto idx = parity_indices(params.n + 1, params.sector().polarized_parity());
    size = static_cast<int>(idx.size());
    interaction.resize(size, size);
    sz.resize(size);
    for (int r = 0; r < size; ++r) {
      sz(r) = parts.sz(idx[r]);
      for (int c = 0; c < size; ++c) interaction(r, c) = parts.interaction(idx[r], idx[c]);
    }
  }

  RealMatrix h0(double h) const {
    RealMatrix out = interaction;
    out.diagonal() -= 2.0 * h * sz;
    return out;
  }

  /// Band b (offset 2b in the full basis) is offset b inside the sector.
  Matrix with_ansatz(const RealMatrix& h0, const Eigen::VectorXd& x) const {
    Matrix out = h0.cast<cplx>();
    for (int b = 1; b <= x.size(); ++b)
      for (int r = 0; r + b < size; ++r) {
        out(r, r + b) += cplx(0.0, x(b - 1));
        out(r + b, r) -= cplx(0.0, x(b - 1));
      }
    return out;
  }

  Vector ground(double h) const {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h0(h));
    return es.eigenvectors().col(0).cast<cplx>();
  }
};

/// Band-1 value of the oscillator correction, averaged along the band.
inline double hp_band_one_value(const ModelParams& params, const OperatorMatrix& b0, double t) {
  double c = 0.0;
  try {
    c = hp_coefficient(params.n, params.gamma, params.ramp.h(t), params.ramp.hdot(t));
  } catch (const CriticalPointError&) {
    return 0.0;
  } catch (const ValidationError&) {
    return 0.0;
  }
  const BandTable table = band_table(c * b0);
  if (table.empty()) return 0.0;
  const auto& row = table.x[0];
  return std::accumulate(row.begin(), row.end(), 0.0) / row.size();
}

}  // namespace detail

/// Greedy segment-by-segment optimization of the banded ansatz. Within each segment the
/// coefficients are constant and chosen to maximize the ground-state fidelity at the segment
/// end; earlier segments stay fixed. Three simplex starts per segment (zeros, previous optimum,
/// oscillator-correction value) are tried in an order shuffled by the seed.
inline OptimizationResult optimize(const ModelParams& params, const OptimizeOptions& options) {
  params.validate();
  detail::require(options.bands >= 1, "optimize: band count must be >= 1 (got " +
                                          std::to_string(options.bands) + ")");
  detail::require(2 * options.bands <= params.n,
                  "optimize: " + std::to_string(options.bands) + " bands exceed N/2 for N=" +
                      std::to_string(params.n));
  detail::require(options.segments >= 10, "optimize: at least 10 segments are required (got " +
                                              std::to_string(options.segments) + ")");
  detail::require(options.steps_per_segment >= 1, "optimize: steps per segment must be >= 1");

  const detail::SectorModel model(params);
  const OperatorMatrix b0 = sxsy_symmetric(build_spin_ops(params.sector()));
  const int k = options.bands, segs = options.segments, sub = options.steps_per_segment;
  const double t0 = params.ramp.t_start(), t1 = params.ramp.t_end();
  const double seg_len = (t1 - t0) / segs, dt = seg_len / sub;

  OptimizationResult result;
  result.coefficients.bands = k;
  for (int s = 0; s <= segs; ++s) result.coefficients.boundaries.push_back(s == segs ? t1 : t0 + s * seg_len);

  std::mt19937 rng(options.seed);
  Vector psi = model.ground(params.ramp.h(t0));
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(k);

  for (int s = 0; s < segs; ++s) {
    const double ta = result.coefficients.boundaries[s], tb = result.coefficients.boundaries[s + 1];
    const Vector target = model.ground(params.ramp.h(tb));
    std::vector<RealMatrix> h0s;
    for (int q = 0; q < sub; ++q) h0s.push_back(model.h0(params.ramp.h(ta + (q + 0.5) * dt)));

    auto propagate = [&](const Eigen::VectorXd& x) {
      Vector p = psi;
      for (const auto& h : h0s) propagate_taylor(model.with_ansatz(h, x), dt, p);
      return p;
    };
    auto objective = [&](const Eigen::VectorXd& x) { return -fidelity(target, propagate(x)); };

    Eigen::VectorXd hp_start = Eigen::VectorXd::Zero(k);
    hp_start(0) = detail::hp_band_one_value(params, b0, 0.5 * (ta + tb));
    std::vector<Eigen::VectorXd> starts{Eigen::VectorXd::Zero(k), prev, hp_start};
    std::shuffle(starts.begin(), starts.end(), rng);

    const double bare = objective(Eigen::VectorXd::Zero(k));
    NelderMeadResult best;
    best.f = std::numeric_limits<double>::infinity();
    for (const auto& x0 : starts) {
      NelderMeadResult r = nelder_mead(objective, x0, options.simplex);
      result.evaluations += r.evaluations;
      if (r.f < best.f) best = std::move(r);
    }
    if (bare - best.f <= 1e-12)
      result.warnings.push_back("segment " + std::to_string(s) + " (t=" + io::format_number(ta) + ".." +
                                io::format_number(tb) + "): no improvement over the bare ramp");

    prev = best.x;
    result.coefficients.values.emplace_back(best.x.data(), best.x.data() + k);
    result.segment_fidelity.push_back(-best.f);
    psi = propagate(best.x);
  }

  result.trajectory = evolve(params, result.coefficients.protocol("optimized" + std::to_string(k)),
                             {segs * sub, false});
  return result;
}

/// x(t) = sum_m a_m sin(omega_m t + phi_m) fitted to one band of an optimized schedule.
struct HarmonicFit {
  int band = 1;
  std::vector<double> a, omega, phi;
  double residual = 0.0;  // RMS over the fitted samples
  bool converged = false;

  int harmonics() const { return static_cast<int>(a.size()); }

  double operator()(double t) const {
    double v = 0.0;
    for (int m = 0; m < harmonics(); ++m) v += a[m] * std::sin(omega[m] * t + phi[m]);
    return v;
  }

  nlohmann::json to_json() const {
    return {{"band", band}, {"a", a}, {"omega", omega}, {"phi", phi},
            {"residual", residual}, {"converged", converged}};
  }
};

namespace detail {

struct HarmonicResidual {
  const std::vector<double>& t;
  const std::vector<double>& y;

  int values() const { return static_cast<int>(t.size()); }
  int inputs() const { return 3 * harmonics; }
  int harmonics;

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (int i = 0; i < values(); ++i) {
      double v = 0.0;
      for (int m = 0; m < harmonics; ++m) v += p(3 * m) * std::sin(p(3 * m + 1) * t[i] + p(3 * m + 2));
      f(i) = v - y[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const {
    for (int i = 0; i < values(); ++i)
      for (int m = 0; m < harmonics; ++m) {
        const double arg = p(3 * m + 1) * t[i] + p(3 * m + 2);
        jac(i, 3 * m) = std::sin(arg);
        jac(i, 3 * m + 1) = p(3 * m) * t[i] * std::cos(arg);
        jac(i, 3 * m + 2) = p(3 * m) * std::cos(arg);
      }
    return 0;
  }
};

/// Amplitudes and phases for fixed frequencies by linear least squares.
inline Eigen::VectorXd linear_start(const std::vector<double>& t, const std::vector<double>& y,
                                    const std::vector<double>& omega) {
  const int c = static_cast<int>(omega.size()), m = static_cast<int>(t.size());
  RealMatrix a(m, 2 * c);
  RealVector rhs(m);
  for (int i = 0; i < m; ++i) {
    rhs(i) = y[i];
    for (int h = 0; h < c; ++h) {
      a(i, 2 * h) = std::sin(omega[h] * t[i]);
      a(i, 2 * h + 1) = std::cos(omega[h] * t[i]);
    }
  }
  const RealVector sc = a.completeOrthogonalDecomposition().solve(rhs);
  Eigen::VectorXd p(3 * c);
  for (int h = 0; h < c; ++h) {
    p(3 * h) = std::hypot(sc(2 * h), sc(2 * h + 1));
    p(3 * h + 1) = omega[h];
    p(3 * h + 2) = std::atan2(sc(2 * h + 1), sc(2 * h));
  }
  return p;
}

/// The c strongest local maxima of the discrete periodogram over a frequency grid.
inline std::vector<double> periodogram_peaks(const std::vector<double>& t, const std::vector<double>& y,
                                             int c) {
  const double span = t.back() - t.front();
  const double spacing = span / std::max<std::size_t>(1, t.size() - 1);
  const double w_max = std::min(40.0, M_PI / spacing);
  std::vector<double> grid, power;
  for (double w = 0.2; w <= w_max; w += 0.05) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) acc += y[i] * std::exp(cplx(0.0, -w * t[i]));
    grid.push_back(w);
    power.push_back(std::norm(acc));
  }
  std::vector<int> peaks;
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    const bool left = i == 0 || power[i] >= power[i - 1];
    const bool right = i + 1 == static_cast<int>(grid.size()) || power[i] >= power[i + 1];
    if (left && right) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](int a, int b) { return power[a] > power[b]; });
  std::vector<double> out;
  for (int i = 0; i < c && i < static_cast<int>(peaks.size()); ++i) out.push_back(grid[peaks[i]]);
  for (int i = 1; static_cast<int>(out.size()) < c; ++i) out.push_back(out.empty() ? 1.0 : out.front() * (i + 1));
  return out;
}

}  // namespace detail

inline constexpr int kHarmonicRandomStarts = 60;

/// Nonlinear least squares for c harmonics with free amplitudes, frequencies and phases.
/// The first start uses the periodogram peaks; further starts draw frequencies from the seed.
inline HarmonicFit fit_harmonics(const std::vector<double>& t, const std::vector<double>& y, int c,
                                 unsigned seed = 0, int band = 1) {
  detail::require(c >= 1 && c <= 3, "fit_harmonics: harmonic count must be 1, 2 or 3 (got " +
                                        std::to_string(c) + ")");
  detail::require(t.size() == y.size(), "fit_harmonics: time and value series differ in length");
  detail::require(static_cast<int>(t.size()) >= 3 * c,
                  "fit_harmonics: need at least " + std::to_string(3 * c) + " samples");
  for (double v : y) detail::require(std::isfinite(v), "fit_harmonics: series is not finite");

  std::vector<std::vector<double>> freq_starts{detail::periodogram_peaks(t, y, c)};
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> freq(0.2, 15.0);
  for (int s = 0; s < kHarmonicRandomStarts; ++s) {
    std::vector<double> w(c);
    for (auto& v : w) v = freq(rng);
    freq_starts.push_back(std::move(w));
  }

  detail::HarmonicResidual functor{t, y, c};
  Eigen::VectorXd f(t.size());
  HarmonicFit best;
  best.band = band;
  best.residual = std::numeric_limits<double>::infinity();
  for (const auto& w : freq_starts) {
    Eigen::VectorXd p = detail::linear_start(t, y, w);
    Eigen::LevenbergMarquardt<detail::HarmonicResidual> lm(functor);
    lm.parameters.maxfev = 4000;
    const auto status = lm.minimize(p);
    functor(p, f);
    const double rms = std::sqrt(f.squaredNorm() / f.size());
    if (!std::isfinite(rms) || rms >= best.residual) continue;
    best.residual = rms;
    best.converged = status >= Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall &&
                     status <= Eigen::LevenbergMarquardtSpace::CosinusTooSmall;
    best.a.assign(c, 0.0);
    best.omega.assign(c, 0.0);
    best.phi.assign(c, 0.0);
    for (int m = 0; m < c; ++m) {
      best.a[m] = p(3 * m);
      best.omega[m] = p(3 * m + 1);
      best.phi[m] = p(3 * m + 2);
    }
  }
  if (best.a.empty()) throw NumericalError("fit_harmonics: every start diverged");
  return best;
}

/// Fits the segment-midpoint series of one band of an optimized schedule.
inline HarmonicFit fit_harmonics(const BandCoefficients& coeffs, int c, unsigned seed = 0, int band = 1) {
  detail::require(band >= 1 && band <= coeffs.bands, "fit_harmonics: band out of range");
  return fit_harmonics(coeffs.midpoints(), coeffs.band_series(band), c, seed, band);
}

struct FitEvaluation {
  Trajectory trajectory;
  double discrepancy = 0.0;  // max_t |F_optimized(t) - F_fit(t)|
};

/// Replays the optimized schedule with one band replaced by a smooth function of time.
inline FitEvaluation evaluate_fit(const ModelParams& params, const OptimizationResult& optimized,
                                  const std::function<double(double)>& band_value, int band = 1,
                                  const std::string& label = "fit") {
  const BandCoefficients coeffs = optimized.coefficients;
  detail::require(band >= 1 && band <= coeffs.bands, "evaluate_fit: band out of range");
  const Protocol protocol = Protocol::ansatz(
      coeffs.bands,
      [coeffs, band_value, band](double t) {
        std::vector<double> x = coeffs.at(t);
        x[band - 1] = band_value(t);
        return x;
      },
      label);
  FitEvaluation out;
  out.trajectory = evolve(params, protocol, {optimized.trajectory.steps, false});
  for (std::size_t i = 0; i < out.trajectory.fidelity.size(); ++i)
    out.discrepancy = std::max(out.discrepancy,
                               std::abs(optimized.trajectory.fidelity[i] - out.trajectory.fidelity[i]));
  return out;
}

inline FitEvaluation evaluate_fit(const ModelParams& params, const OptimizationResult& optimized,
                                  const HarmonicFit& fit) {
  return evaluate_fit(params, optimized, [fit](double t) { return fit(t); }, fit.band,
                      "fit" + std::to_string(fit.harmonics()));
}

}  // namespace cdlmg

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdlmg/band_operators.hpp"
#include "cdlmg/banded_ansatz.hpp"
#include "cdlmg/counterdiabatic.hpp"
#include "cdlmg/error.hpp"
#include "cdlmg/io.hpp"
#include "cdlmg/propagator.hpp"
#include "cdlmg/spectrum.hpp"
#include "cdlmg/spin_algebra.hpp"

namespace cdlmg {

/// Which auxiliary term accompanies H_0 during the ramp.
struct Protocol {
  enum class Kind { bare, exact_cd, truncated, hp, analytic, ansatz, decomposed };

  using CoefficientFn = std::function<std::vector<double>(double t)>;

  Kind kind = Kind::bare;
  int bands = 0;
  CoefficientFn coefficients;  // ansatz only
  std::string label;           // ansatz only

  static Protocol bare() { return {}; }
  static Protocol exact() { return {Kind::exact_cd}; }
  static Protocol truncated(int k) {
    detail::require(k >= 1, "truncated protocol needs at least one band");
    return {Kind::truncated, k};
  }
  static Protocol hp() { return {Kind::hp, 1}; }
  static Protocol analytic() { return {Kind::analytic}; }
  static Protocol decomposed(int k) {
    detail::require(k >= 1, "decomposed protocol needs at least one band");
    return {Kind::decomposed, k};
  }
  static Protocol ansatz(int k, CoefficientFn fn, std::string label = "ansatz") {
    detail::require(k >= 1, "ansatz protocol needs at least one band");
    return {Kind::ansatz, k, std::move(fn), std::move(label)};
  }

  /// Accepts bare, exact_cd, hp, analytic, truncated[:k], decomposed[:k].
  static Protocol parse(const std::string& text, int default_bands = 1) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    int k = default_bands;
    if (colon != std::string::npos) {
      try {
        k = std::stoi(text.substr(colon + 1));
      } catch (const std::exception&) {
        throw ValidationError("protocol '" + text + "': band count is not an integer");
      }
    }
    if (name == "bare") return bare();
    if (name == "exact_cd" || name == "exact") return exact();
    if (name == "hp") return hp();
    if (name == "analytic") return analytic();
    if (name == "truncated") return truncated(k);
    if (name == "decomposed") return decomposed(k);
    throw ValidationError("unknown protocol '" + text +
                          "' (expected bare, exact_cd, truncated[:k], hp, analytic, decomposed[:k])");
  }

  std::string name() const {
    switch (kind) {
      case Kind::bare: return "bare";
      case Kind::exact_cd: return "exact_cd";
      case Kind::truncated: return "truncated" + std::to_string(bands);
      case Kind::hp: return "hp";
      case Kind::analytic: return "analytic";
      case Kind::decomposed: return "decomposed" + std::to_string(bands);
      case Kind::ansatz: return label;
    }
    return "?";
  }
};

/// Evaluates the driving matrix of a protocol at any instant of a ramp.
class DrivingModel {
 public:
  DrivingModel(const ModelParams& params, Protocol protocol)
      : params_(params),
        protocol_(std::move(protocol)),
        parts_(h0_parts(params.n, params.gamma)),
        b0_(sxsy_symmetric(build_spin_ops(params.sector()))) {
    if (protocol_.kind == Protocol::Kind::hp)
      detail::require(params.gamma < 1.0, "hp protocol requires gamma < 1 (got " +
                                              io::format_number(params.gamma) + ")");
    if (protocol_.kind == Protocol::Kind::analytic)
      detail::require(params.n == 2 || params.n == 3, "analytic protocol exists only for N = 2, 3");
    if (protocol_.kind == Protocol::Kind::truncated || protocol_.kind == Protocol::Kind::decomposed ||
        protocol_.kind == Protocol::Kind::ansatz)
      detail::require(2 * protocol_.bands <= params.n,
                      protocol_.name() + ": band count exceeds N/2 for N=" + std::to_string(params.n));
  }

  const H0Parts& parts() const { return parts_; }

  Matrix h0(double h) const { return parts_.at(h).cast<cplx>(); }

  /// Driving matrix at time t (zero for the bare protocol).
  Matrix driving(double t) const {
    const double h = params_.ramp.h(t), hdot = params_.ramp.hdot(t);
    const int d = params_.n + 1;
    switch (protocol_.kind) {
      case Protocol::Kind::bare: return Matrix::Zero(d, d);
      case Protocol::Kind::exact_cd: return exact(h, hdot).matrix.matrix();
      case Protocol::Kind::truncated: return truncate(exact(h, hdot), protocol_.bands).matrix.matrix();
      case Protocol::Kind::hp:
        try {
          return hp_coefficient(params_.n, params_.gamma, h, hdot) * b0_.matrix();
        } catch (const CriticalPointError&) {
          return Matrix::Zero(d, d);  // switched off at the transition
        }
      case Protocol::Kind::analytic: return analytic_cd(params_, h, hdot).matrix.matrix();
      case Protocol::Kind::decomposed: {
        OperatorMatrix sum(params_.sector());
        for (const auto& dec : decompose_driving(exact(h, hdot).matrix, protocol_.bands))
          sum += dec.sum();
        return sum.matrix();
      }
      case Protocol::Kind::ansatz: {
        const std::vector<double> x = protocol_.coefficients(t);
        return ansatz_matrix(params_.sector(), x).matrix();
      }
    }
    return Matrix::Zero(d, d);
  }

  Matrix hamiltonian(double t) const { return h0(params_.ramp.h(t)) + driving(t); }

 private:
  DrivingTerm exact(double h, double hdot) const {
    return exact_cd(diagonalize_h0(parts_, h), parts_.sz, hdot);
  }

  ModelParams params_;
  Protocol protocol_;
  H0Parts parts_;
  OperatorMatrix b0_;
};

/// |<a|b>|^2.
inline double fidelity(const Vector& a, const Vector& b) { return std::norm(a.dot(b)); }

struct EvolveOptions {
  int steps = 4000;
  bool record_states = false;
};

/// Evolved state against the tracked instantaneous ground state on a uniform grid.
struct Trajectory {
  ModelParams params;
  std::string protocol;
  int steps = 0;
  std::vector<double> times;
  std::vector<double> fields;
  std::vector<double> fidelity;
  std::vector<Vector> states;  // only with record_states
  std::vector<Vector> ground;  // only with record_states
  double max_norm_error = 0.0;

  double final_fidelity() const { return fidelity.back(); }
  double min_fidelity() const { return *std::min_element(fidelity.begin(), fidelity.end()); }

  /// Smallest fidelity over grid points with t <= t_max.
  double min_fidelity_until(double t_max) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < times.size() && times[i] <= t_max + 1e-12; ++i)
      m = std::min(m, fidelity[i]);
    return m;
  }

  /// Fidelity at the grid point closest to t.
  double fidelity_at(double t) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < times.size(); ++i)
      if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
    return fidelity[best];
  }

  io::CsvTable to_csv() const {
    io::CsvTable table({"t", "h", "fidelity"});
    for (std::size_t i = 0; i < times.size(); ++i) table.add_row({times[i], fields[i], fidelity[i]});
    return table;
  }
};

inline constexpr double kNormTol = 1e-8;

/// Time-ordered evolution with the midpoint propagator exp(-i H(t_mid) dt), starting from
/// the tracked ground state of H_0(h(t_start)).
inline Trajectory evolve(const ModelParams& params, const Protocol& protocol,
                         const EvolveOptions& options = {}) {
  params.validate();
  detail::require(options.steps >= 1, "evolve: step count must be >= 1");
  const DrivingModel model(params, protocol);
  const double t0 = params.ramp.t_start(), t1 = params.ramp.t_end();
  const double dt = (t1 - t0) / options.steps;

  Trajectory traj;
  traj.params = params;
  traj.protocol = protocol.name();
  traj.steps = options.steps;
  traj.times.reserve(options.steps + 1);
  traj.fields.reserve(options.steps + 1);
  traj.fidelity.reserve(options.steps + 1);

  GroundTracker tracker(params);
  Vector psi = tracker.start(params.ramp.h(t0));
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.fields.push_back(params.ramp.h(t));
    traj.fidelity.push_back(fidelity(tracker.ground(), psi));
    if (options.record_states) {
      traj.states.push_back(psi);
      traj.ground.push_back(tracker.ground());
    }
  };
  record(t0);
  for (int s = 0; s < options.steps; ++s) {
    const double t_mid = t0 + (s + 0.5) * dt;
    propagate_exact(model.hamiltonian(t_mid), dt, psi);
    const double err = std::abs(psi.norm() - 1.0);
    traj.max_norm_error = std::max(traj.max_norm_error, err);
    if (err > kNormTol)
      throw NumericalError("evolve: norm drifted by " + io::format_number(err) + " at step " +
                           std::to_string(s));
    const double t = s + 1 == options.steps ? t1 : t0 + (s + 1) * dt;
    tracker.advance(params.ramp.h(t));
    record(t);
  }
  return traj;
}

struct ConvergedTrajectory {
  Trajectory trajectory;
  Trajectory refined;  // same protocol at half the step
  double delta = 0.0;  // |F_end(dt) - F_end(dt/2)|
};

inline constexpr double kStepConvergenceTol = 1e-6;

/// Halves the step until F(t_end) moves by less than tol; throws with a suggested step
/// count after max_refinements failed halvings.
inline ConvergedTrajectory evolve_converged(const ModelParams& params, const Protocol& protocol,
                                            EvolveOptions options = {},
                                            double tol = kStepConvergenceTol,
                                            int max_refinements = 3) {
  Trajectory coarse = evolve(params, protocol, options);
  for (int r = 0; r <= max_refinements; ++r) {
    EvolveOptions fine_opts = options;
    fine_opts.steps = 2 * options.steps;
    Trajectory fine = evolve(params, protocol, fine_opts);
    const double delta = std::abs(coarse.final_fidelity() - fine.final_fidelity());
    if (delta < tol) return {std::move(coarse), std::move(fine), delta};
    options = fine_opts;
    coarse = std::move(fine);
  }
  throw NumericalError("evolve: " + protocol.name() + " did not converge in the step size; try --steps " +
                       std::to_string(4 * options.steps));
}

inline nlohmann::json params_json(const ModelParams& p) {
  return {{"N", p.n},
          {"gamma", p.gamma},
          {"ramp", p.ramp.describe()},
          {"t_start", p.ramp.t_start()},
          {"t_end", p.ramp.t_end()}};
}

}  // namespace cdlmg

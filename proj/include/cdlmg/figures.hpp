#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdlmg/ansatz.hpp"
#include "cdlmg/dynamics.hpp"
#include "cdlmg/error.hpp"
#include "cdlmg/parallel.hpp"
#include "cdlmg/spectrum.hpp"

namespace cdlmg {

/// Named reproduction recipe: one or more model sizes, fixed protocols and optimized band counts.
struct FigurePreset {
  std::string id;
  std::string description;
  std::vector<ModelParams> models;
  std::vector<std::string> protocols;  // Protocol::parse syntax
  std::vector<int> optimized_bands;    // one optimize() run per entry and model
};

inline ModelParams lmg(int n, RampSchedule ramp, double gamma = 0.0) {
  ModelParams p;
  p.n = n;
  p.gamma = gamma;
  p.ramp = std::move(ramp);
  return p;
}

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig1a", "fig2", "fig3a", "s1a", "s1b", "s1c", "s1d"};
  return ids;
}

inline FigurePreset figure_preset(const std::string& id) {
  const std::vector<std::string> four{"exact_cd", "truncated:1", "hp", "bare"};
  const RampSchedule main_ramp = RampSchedule::linear(0.75, 0.5);
  if (id == "fig1a") return {id, "fixed protocols across the transition", {lmg(100, main_ramp)}, four, {}};
  if (id == "fig2") return {id, "optimized ansatz with 1-4 bands", {lmg(80, main_ramp)}, {}, {1, 2, 3, 4}};
  if (id == "fig3a") {
    FigurePreset p{id, "single-band optimized ansatz versus N", {}, {}, {1}};
    for (int n : {10, 20, 40, 80, 100}) p.models.push_back(lmg(n, main_ramp));
    return p;
  }
  if (id == "s1a") return {id, "ramp inside the low-field phase", {lmg(100, RampSchedule::linear(0.55, 0.3))}, four, {}};
  if (id == "s1b") return {id, "reversed ramp", {lmg(100, RampSchedule::linear(1.25, -0.5))}, four, {}};
  if (id == "s1c") return {id, "quadratic ramp", {lmg(100, RampSchedule::quadratic(0.75, 0.5))}, four, {}};
  if (id == "s1d") return {id, "tanh ramp", {lmg(100, RampSchedule::tanh(0.75, 0.5, 5.0))}, four, {}};
  std::string known;
  for (const auto& f : figure_ids()) known += (known.empty() ? "" : ", ") + f;
  throw ValidationError("unknown figure '" + id + "' (known: " + known + ", fig1b for the spectrum)");
}

/// Field grid and model of the gap figure.
struct SpectrumPreset {
  ModelParams model;
  std::vector<double> h_grid;
};

inline std::vector<double> linspace(double a, double b, int points) {
  detail::require(points >= 1, "grid needs at least one point");
  std::vector<double> out;
  for (int i = 0; i < points; ++i) out.push_back(points == 1 ? a : a + (b - a) * i / (points - 1));
  return out;
}

inline SpectrumPreset spectrum_preset() { return {lmg(100, RampSchedule::constant(1.0)), linspace(0.5, 1.5, 201)}; }

struct Curve {
  std::string label;
  Trajectory trajectory;
  std::optional<OptimizationResult> optimized;
};

/// Runs every curve of a preset. Curves are independent and run on the thread budget.
inline std::vector<Curve> run_figure(const FigurePreset& preset, int steps = 4000,
                                     const OptimizeOptions& base = {}) {
  struct Job {
    ModelParams params;
    std::string protocol;
    int bands;
  };
  std::vector<Job> jobs;
  for (const auto& m : preset.models) {
    for (const auto& p : preset.protocols) jobs.push_back({m, p, 0});
    for (int k : preset.optimized_bands) jobs.push_back({m, "", k});
  }
  const bool many_models = preset.models.size() > 1;
  return parallel_map<Curve>(static_cast<int>(jobs.size()), [&](int i) {
    const Job& job = jobs[i];
    const std::string suffix = many_models ? "_N" + std::to_string(job.params.n) : "";
    if (job.bands == 0) {
      Trajectory t = evolve(job.params, Protocol::parse(job.protocol), {steps, false});
      return Curve{t.protocol + suffix, std::move(t), std::nullopt};
    }
    OptimizeOptions opt = base;
    opt.bands = job.bands;
    OptimizationResult r = optimize(job.params, opt);
    Trajectory t = r.trajectory;
    return Curve{"optimized" + std::to_string(job.bands) + suffix, std::move(t), std::move(r)};
  });
}

}  // namespace cdlmg

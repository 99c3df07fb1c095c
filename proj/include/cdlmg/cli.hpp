#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cdlmg/ansatz.hpp"
#include "cdlmg/band_operators.hpp"
#include "cdlmg/counterdiabatic.hpp"
#include "cdlmg/dynamics.hpp"
#include "cdlmg/error.hpp"
#include "cdlmg/figures.hpp"
#include "cdlmg/io.hpp"
#include "cdlmg/parallel.hpp"
#include "cdlmg/spectrum.hpp"

#ifndef CDLMG_VERSION
#define CDLMG_VERSION "0.0.0"
#endif
#ifndef CDLMG_GIT_DESCRIBE
#define CDLMG_GIT_DESCRIBE "unknown"
#endif

namespace cdlmg::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2 };

/// Everything a run needs; echoed into the manifest so the run can be replayed.
struct RunConfig {
  int n = 100;
  double gamma = 0.0;
  std::string ramp = "linear:0.75,0.5";
  double t_start = 0.0;
  double t_end = 1.0;
  std::vector<std::string> protocols;
  int bands = 0;  // 0: command default
  int segments = 40;
  int steps = 4000;
  int steps_per_segment = 50;
  unsigned seed = 0;
  std::string out = "out";
  std::string figure;
  int harmonics = 3;
  double h_min = 0.5, h_max = 1.5;
  int h_points = 201;
  double h = 0.9, hdot = 0.5;

  ModelParams model() const {
    detail::require(n >= 2, "--n must be >= 2 (got " + std::to_string(n) + ")");
    detail::require(std::isfinite(gamma), "--gamma must be finite");
    ModelParams p;
    p.n = n;
    p.gamma = gamma;
    p.ramp = RampSchedule::parse(ramp, t_start, t_end);
    p.validate();
    return p;
  }

  nlohmann::json to_json() const {
    return {{"n", n},
            {"gamma", gamma},
            {"ramp", ramp},
            {"t_start", t_start},
            {"t_end", t_end},
            {"protocols", protocols},
            {"bands", bands},
            {"segments", segments},
            {"steps", steps},
            {"steps_per_segment", steps_per_segment},
            {"seed", seed},
            {"out", out},
            {"figure", figure},
            {"harmonics", harmonics},
            {"h_min", h_min},
            {"h_max", h_max},
            {"h_points", h_points},
            {"h", h},
            {"hdot", hdot}};
  }
};

namespace detail {

using cdlmg::detail::require;

class Manifest {
 public:
  Manifest(std::string command, const RunConfig& cfg)
      : start_(std::chrono::steady_clock::now()) {
    json_ = {{"tool", "cdlmg"},
             {"version", CDLMG_VERSION},
             {"git_describe", CDLMG_GIT_DESCRIBE},
             {"command", std::move(command)},
             {"config", cfg.to_json()},
             {"outputs", nlohmann::json::array()},
             {"warnings", nlohmann::json::array()}};
  }

  nlohmann::json& operator[](const std::string& key) { return json_[key]; }

  void write(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
    io::write_atomic(dir / name, content);
    json_["outputs"].push_back(name);
  }

  void warn(const std::string& w) { json_["warnings"].push_back(w); }

  void finish(const std::filesystem::path& dir) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json_["wall_time_s"] = wall;
    io::write_atomic(dir / "manifest.json", json_.dump(2) + "\n");
  }

 private:
  nlohmann::json json_;
  std::chrono::steady_clock::time_point start_;
};

inline std::string fmt(double v) { return io::format_number(v); }

inline int cmd_evolve(const RunConfig& cfg, std::ostream& out) {
  std::vector<ModelParams> models;
  std::vector<std::string> protocols = cfg.protocols;
  std::vector<int> optimized;
  if (!cfg.figure.empty()) {
    const FigurePreset preset = figure_preset(cfg.figure);
    models = preset.models;
    if (protocols.empty()) protocols = preset.protocols;
    optimized = preset.optimized_bands;
  } else {
    models.push_back(cfg.model());
    if (protocols.empty()) protocols.push_back("exact_cd");
  }
  require(cfg.steps >= 1, "--steps must be >= 1");
  const int default_bands = cfg.bands > 0 ? cfg.bands : 1;
  for (const auto& m : models)
    for (const auto& p : protocols) (void)DrivingModel(m, Protocol::parse(p, default_bands));

  FigurePreset run{cfg.figure.empty() ? "custom" : cfg.figure, "", models, {}, optimized};
  for (const auto& p : protocols) {
    const Protocol proto = Protocol::parse(p, default_bands);
    run.protocols.push_back(proto.kind == Protocol::Kind::truncated || proto.kind == Protocol::Kind::decomposed
                                ? p.substr(0, p.find(':')) + ":" + std::to_string(proto.bands)
                                : p);
  }
  OptimizeOptions opt;
  opt.segments = cfg.segments;
  opt.steps_per_segment = cfg.steps_per_segment;
  opt.seed = cfg.seed;

  Manifest manifest("evolve", cfg);
  const std::filesystem::path dir = cfg.out;
  const std::vector<Curve> curves = run_figure(run, cfg.steps, opt);
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& c : curves) {
    manifest.write(dir, c.label + ".csv", c.trajectory.to_csv().str());
    summary.push_back({{"label", c.label},
                       {"params", params_json(c.trajectory.params)},
                       {"steps", c.trajectory.steps},
                       {"final_fidelity", c.trajectory.final_fidelity()},
                       {"min_fidelity", c.trajectory.min_fidelity()}});
    if (c.optimized)
      for (const auto& w : c.optimized->warnings) manifest.warn(c.label + ": " + w);
    out << c.label << " final_fidelity=" << fmt(c.trajectory.final_fidelity())
        << " min_fidelity=" << fmt(c.trajectory.min_fidelity()) << "\n";
  }
  manifest["curves"] = summary;
  manifest.finish(dir);
  return kOk;
}

inline int cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
  require(cfg.figure.empty() || cfg.figure == "fig1b", "spectrum only knows --figure fig1b");
  ModelParams model;
  std::vector<double> grid;
  if (cfg.figure == "fig1b") {
    const SpectrumPreset preset = spectrum_preset();
    model = preset.model;
    grid = preset.h_grid;
  } else {
    require(cfg.n >= 2, "--n must be >= 2 (got " + std::to_string(cfg.n) + ")");
    require(cfg.h_points >= 1, "--h-points must be >= 1; the h grid is empty");
    require(cfg.h_min > 0.0 && cfg.h_max >= cfg.h_min, "--h-min/--h-max must satisfy 0 < h-min <= h-max");
    model.n = cfg.n;
    model.gamma = cfg.gamma;
    grid = linspace(cfg.h_min, cfg.h_max, cfg.h_points);
  }
  const GapTable table = gap_series(model, grid);
  Manifest manifest("spectrum", cfg);
  manifest["params"] = {{"N", model.n}, {"gamma", model.gamma}};
  manifest["grid"] = {{"h_min", grid.front()}, {"h_max", grid.back()}, {"points", grid.size()}};
  const std::filesystem::path dir = cfg.out;
  manifest.write(dir, "gaps.csv", table.to_csv().str());
  manifest.finish(dir);
  out << "gap01 at h=" << fmt(table.h.front()) << ": " << fmt(table.gaps.front()[0]) << "\n";
  out << "gap01 at h=" << fmt(table.h.back()) << ": " << fmt(table.gaps.back()[0]) << "\n";
  return kOk;
}

inline std::vector<ModelParams> optimizer_models(const RunConfig& cfg, std::vector<int>& bands) {
  std::vector<ModelParams> models;
  if (!cfg.figure.empty()) {
    const FigurePreset preset = figure_preset(cfg.figure);
    require(!preset.optimized_bands.empty(), "figure " + cfg.figure + " has no optimized curves");
    models = preset.models;
    bands = cfg.bands != 0 ? std::vector<int>{cfg.bands} : preset.optimized_bands;
  } else {
    models.push_back(cfg.model());
    bands = {cfg.bands != 0 ? cfg.bands : 1};
  }
  for (int k : bands) require(k >= 1, "--bands must be >= 1 (got " + std::to_string(k) + ")");
  require(cfg.segments >= 10, "--segments must be >= 10 (got " + std::to_string(cfg.segments) + ")");
  require(cfg.steps_per_segment >= 1, "--steps-per-segment must be >= 1");
  for (const auto& m : models)
    for (int k : bands)
      require(2 * k <= m.n, "--bands " + std::to_string(k) + " exceeds N/2 for N=" + std::to_string(m.n));
  return models;
}

inline int cmd_optimize(const RunConfig& cfg, std::ostream& out) {
  std::vector<int> bands;
  const std::vector<ModelParams> models = optimizer_models(cfg, bands);
  Manifest manifest("optimize", cfg);
  const std::filesystem::path dir = cfg.out;
  struct Job {
    ModelParams params;
    int k;
  };
  std::vector<Job> jobs;
  for (const auto& m : models)
    for (int k : bands) jobs.push_back({m, k});
  const auto results = parallel_map<OptimizationResult>(static_cast<int>(jobs.size()), [&](int i) {
    OptimizeOptions opt;
    opt.bands = jobs[i].k;
    opt.segments = cfg.segments;
    opt.steps_per_segment = cfg.steps_per_segment;
    opt.seed = cfg.seed;
    return optimize(jobs[i].params, opt);
  });
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = results[i];
    const std::string tag = "N" + std::to_string(jobs[i].params.n) + "_k" + std::to_string(jobs[i].k);
    manifest.write(dir, "schedule_" + tag + ".csv", r.coefficients.to_csv().str());
    manifest.write(dir, "trajectory_" + tag + ".csv", r.trajectory.to_csv().str());
    for (const auto& w : r.warnings) manifest.warn(tag + ": " + w);
    runs.push_back({{"params", params_json(jobs[i].params)},
                    {"bands", jobs[i].k},
                    {"schedule", r.coefficients.to_json()},
                    {"evaluations", r.evaluations},
                    {"final_fidelity", r.final_fidelity()},
                    {"min_fidelity", r.min_fidelity()}});
    out << tag << " min_fidelity=" << fmt(r.min_fidelity()) << " final_fidelity=" << fmt(r.final_fidelity())
        << "\n";
  }
  manifest["runs"] = runs;
  manifest.finish(dir);
  return kOk;
}

inline int cmd_fit(const RunConfig& cfg, std::ostream& out) {
  require(cfg.harmonics >= 1 && cfg.harmonics <= 3, "--harmonics must be 1, 2 or 3");
  std::vector<int> bands;
  RunConfig local = cfg;
  if (local.bands == 0) local.bands = 1;
  const std::vector<ModelParams> models = optimizer_models(local, bands);
  Manifest manifest("fit", cfg);
  const std::filesystem::path dir = cfg.out;
  io::CsvTable report({"N", "bands", "harmonics", "residual", "discrepancy"});
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& m : models) {
    OptimizeOptions opt;
    opt.bands = bands.front();
    opt.segments = cfg.segments;
    opt.steps_per_segment = cfg.steps_per_segment;
    opt.seed = cfg.seed;
    const OptimizationResult r = optimize(m, opt);
    const std::string tag = "N" + std::to_string(m.n) + "_k" + std::to_string(opt.bands);
    manifest.write(dir, "schedule_" + tag + ".csv", r.coefficients.to_csv().str());
    for (const auto& w : r.warnings) manifest.warn(tag + ": " + w);
    const auto evals = parallel_map<std::pair<HarmonicFit, double>>(cfg.harmonics, [&](int i) {
      const HarmonicFit fit = fit_harmonics(r.coefficients, i + 1, cfg.seed);
      return std::pair{fit, evaluate_fit(m, r, fit).discrepancy};
    });
    for (int c = 1; c <= cfg.harmonics; ++c) {
      const auto& [fit, disc] = evals[c - 1];
      if (!fit.converged) manifest.warn(tag + ": harmonic fit c=" + std::to_string(c) + " did not converge");
      report.add_row({double(m.n), double(opt.bands), double(c), fit.residual, disc});
      nlohmann::json j = fit.to_json();
      j["N"] = m.n;
      j["harmonics"] = c;
      j["discrepancy"] = disc;
      fits.push_back(j);
      out << tag << " harmonics=" << c << " residual=" << fmt(fit.residual) << " discrepancy=" << fmt(disc)
          << "\n";
    }
  }
  manifest.write(dir, "fits.json", fits.dump(2) + "\n");
  manifest.write(dir, "discrepancy.csv", report.str());
  manifest.finish(dir);
  return kOk;
}

inline int cmd_decompose(const RunConfig& cfg, std::ostream& out) {
  require(cfg.n >= 2, "--n must be >= 2 (got " + std::to_string(cfg.n) + ")");
  require(cfg.h > 0.0, "--field must be > 0");
  require(cfg.bands >= 0, "--bands must be >= 0");
  ModelParams model;
  model.n = cfg.n;
  model.gamma = cfg.gamma;
  const DrivingTerm h1 = exact_cd(model, cfg.h, cfg.hdot);
  const BandTable table = band_table(h1);
  const int k = cfg.bands > 0 ? std::min(cfg.bands, table.bands()) : table.bands();
  const auto decs = decompose_driving(h1.matrix, k);
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& d : decs) {
    bands.push_back({{"band", d.band}, {"residual", d.residual}, {"terms", d.to_json()}});
    out << "band " << d.band << ": " << d.terms.size() << " terms, residual " << fmt(d.residual) << "\n";
  }
  Manifest manifest("decompose", cfg);
  manifest["params"] = {{"N", model.n}, {"gamma", model.gamma}, {"h", cfg.h}, {"hdot", cfg.hdot}};
  const std::filesystem::path dir = cfg.out;
  manifest.write(dir, "bands.csv", table.to_csv().str());
  manifest.write(dir, "decomposition.json", bands.dump(2) + "\n");
  manifest.finish(dir);
  return kOk;
}

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Counterdiabatic driving of the LMG model", "cdlmg"};
  app.set_version_flag("--version", std::string(CDLMG_VERSION) + " (" + CDLMG_GIT_DESCRIBE + ")");
  app.require_subcommand(1);
  RunConfig cfg;

  auto model_flags = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.n, "particle count N");
    sub->add_option("--gamma", cfg.gamma, "anisotropy gamma");
    sub->add_option("--out", cfg.out, "output directory");
  };
  auto ramp_flags = [&](CLI::App* sub) {
    sub->add_option("--ramp", cfg.ramp, "field schedule kind:params, e.g. linear:0.75,0.5 or tanh:0.75,0.5,5");
    sub->add_option("--t-start", cfg.t_start, "ramp start time");
    sub->add_option("--t-end", cfg.t_end, "ramp end time");
    sub->add_option("--figure", cfg.figure, "named preset: fig1a fig2 fig3a s1a s1b s1c s1d");
    sub->add_option("--seed", cfg.seed, "seed for multi-start ordering");
  };
  auto optimizer_flags = [&](CLI::App* sub) {
    sub->add_option("--bands", cfg.bands, "band count k")->check(CLI::PositiveNumber);
    sub->add_option("--segments", cfg.segments, "piecewise-constant segments");
    sub->add_option("--steps-per-segment", cfg.steps_per_segment, "propagation steps per segment");
  };

  CLI::App* evolve = app.add_subcommand("evolve", "integrate the ramp under one or more protocols");
  model_flags(evolve);
  ramp_flags(evolve);
  evolve->add_option("--protocol", cfg.protocols,
                     "bare, exact_cd, truncated[:k], hp, analytic, decomposed[:k]; repeatable");
  evolve->add_option("--bands", cfg.bands, "default band count for truncated/decomposed")
      ->check(CLI::PositiveNumber);
  evolve->add_option("--steps", cfg.steps, "time steps");
  evolve->add_option("--segments", cfg.segments, "optimizer segments for optimized presets");
  evolve->add_option("--steps-per-segment", cfg.steps_per_segment, "optimizer steps per segment");

  CLI::App* spectrum = app.add_subcommand("spectrum", "gap table of H_0 over a field grid");
  model_flags(spectrum);
  spectrum->add_option("--h-min", cfg.h_min, "lowest field");
  spectrum->add_option("--h-max", cfg.h_max, "highest field");
  spectrum->add_option("--h-points", cfg.h_points, "grid points");
  spectrum->add_option("--figure", cfg.figure, "fig1b");

  CLI::App* optimize_cmd = app.add_subcommand("optimize", "optimize the banded ansatz");
  model_flags(optimize_cmd);
  ramp_flags(optimize_cmd);
  optimizer_flags(optimize_cmd);

  CLI::App* fit = app.add_subcommand("fit", "optimize one band and fit harmonic series to it");
  model_flags(fit);
  ramp_flags(fit);
  optimizer_flags(fit);
  fit->add_option("--harmonics", cfg.harmonics, "largest harmonic count c (1-3)");

  CLI::App* decompose = app.add_subcommand("decompose", "band table and operator decomposition of the exact term");
  model_flags(decompose);
  decompose->add_option("--field", cfg.h, "field value h");
  decompose->add_option("--field-rate", cfg.hdot, "field rate dh/dt");
  decompose->add_option("--bands", cfg.bands, "bands to decompose (0: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*evolve) return detail::cmd_evolve(cfg, out);
    if (*spectrum) return detail::cmd_spectrum(cfg, out);
    if (*optimize_cmd) return detail::cmd_optimize(cfg, out);
    if (*fit) return detail::cmd_fit(cfg, out);
    if (*decompose) return detail::cmd_decompose(cfg, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kValidation;
}

}  // namespace cdlmg::cli

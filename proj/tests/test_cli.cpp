#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cdlmg/cli.hpp"

namespace fs = std::filesystem;
using cdlmg::io::read_file;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cdlmg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cdlmg::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cdlmg_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

/// Smallest value of the fidelity column of a trajectory CSV.
double min_fidelity(const fs::path& csv) {
  std::istringstream is(read_file(csv));
  std::string line;
  std::getline(is, line);
  double m = 2.0;
  while (std::getline(is, line)) m = std::min(m, std::stod(line.substr(line.rfind(',') + 1)));
  return m;
}

}  // namespace

TEST(Cli, EvolveSpinTwoExact) {
  const fs::path dir = scratch("evolve2");
  const CliRun r = cli({"evolve", "--n", "2", "--protocol", "exact_cd", "--ramp", "linear:0.75,0.5", "--out", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GE(min_fidelity(dir / "exact_cd.csv"), 0.9999);
  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["command"], "evolve");
  EXPECT_EQ(manifest["config"]["n"], 2);
  EXPECT_TRUE(manifest.contains("git_describe"));
  EXPECT_TRUE(manifest.contains("version"));
  EXPECT_TRUE(manifest.contains("wall_time_s"));
  EXPECT_NE(r.out.find("exact_cd final_fidelity="), std::string::npos);
}

TEST(Cli, EvolveIsByteReproducible) {
  const fs::path a = scratch("repro_a"), b = scratch("repro_b");
  const std::vector<std::string> base{"evolve", "--n", "6", "--protocol", "bare", "--protocol", "truncated:1",
                                      "--steps", "300", "--out"};
  auto args = base;
  args.push_back(a);
  ASSERT_EQ(cli(args).code, 0);
  args.back() = b;
  ASSERT_EQ(cli(args).code, 0);
  for (const char* f : {"bare.csv", "truncated1.csv"}) EXPECT_EQ(read_file(a / f), read_file(b / f));
}

TEST(Cli, FigureOneOrdering) {
  const fs::path dir = scratch("fig1a");
  const CliRun r = cli({"evolve", "--figure", "fig1a", "--steps", "1000", "--out", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  ASSERT_EQ(manifest["curves"].size(), 4u);
  double bare = 0.0, lowest_other = 1.0;
  for (const auto& c : manifest["curves"]) {
    EXPECT_TRUE(fs::exists(dir / (c["label"].get<std::string>() + ".csv")));
    if (c["label"] == "bare")
      bare = c["final_fidelity"];
    else
      lowest_other = std::min(lowest_other, c["final_fidelity"].get<double>());
  }
  EXPECT_LT(bare, lowest_other);
}

TEST(Cli, ValidationErrorsExitOne) {
  EXPECT_EQ(cli({"evolve", "--n", "0", "--out", scratch("bad")}).code, 1);
  EXPECT_EQ(cli({"evolve", "--n", "4", "--gamma", "1.0", "--protocol", "hp", "--out", scratch("bad")}).code, 1);
  EXPECT_EQ(cli({"evolve", "--n", "4", "--ramp", "linear:0.2,-1", "--out", scratch("bad")}).code, 1);
  EXPECT_EQ(cli({"evolve", "--n", "4", "--protocol", "warp", "--out", scratch("bad")}).code, 1);
  EXPECT_EQ(cli({"spectrum", "--n", "10", "--h-points", "0", "--out", scratch("bad")}).code, 1);
  EXPECT_EQ(cli({"optimize", "--n", "10", "--bands", "0", "--out", scratch("bad")}).code, 1);
  EXPECT_EQ(cli({"fit", "--n", "10", "--harmonics", "5", "--out", scratch("bad")}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({}).code, 1);
  const CliRun bad = cli({"evolve", "--n", "0", "--out", scratch("bad")});
  EXPECT_NE(bad.err.find("--n"), std::string::npos);
}

TEST(Cli, HelpExitsZero) {
  const CliRun r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("evolve"), std::string::npos);
}

TEST(Cli, NumericalFailureExitsTwo) {
  // one step across the transition cannot keep track of the ground state
  const CliRun r = cli({"evolve", "--n", "100", "--protocol", "bare", "--steps", "1", "--ramp", "linear:0.5,1.5",
                     "--out", scratch("coarse")});
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST(Cli, SpectrumGapTable) {
  const fs::path dir = scratch("spectrum");
  const CliRun r = cli({"spectrum", "--n", "100", "--h-min", "0.5", "--h-max", "1.5", "--h-points", "11", "--out", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir / "gaps.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "h,gap01,gap23,gap45");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
}

TEST(Cli, DecomposeWritesBandsAndTerms) {
  const fs::path dir = scratch("decompose");
  const CliRun r = cli({"decompose", "--n", "6", "--field", "0.9", "--out", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read_file(dir / "decomposition.json"));
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0]["terms"][0]["label"], "(SxSy+SySx)");
  EXPECT_TRUE(fs::exists(dir / "bands.csv"));
}

TEST(Cli, OptimizeAndFitSmall) {
  const fs::path dir = scratch("optimize");
  CliRun r = cli({"optimize", "--n", "10", "--bands", "1", "--out", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "schedule_N10_k1.csv"));
  EXPECT_TRUE(fs::exists(dir / "trajectory_N10_k1.csv"));
  EXPECT_GT(min_fidelity(dir / "trajectory_N10_k1.csv"), 0.99);

  const fs::path fdir = scratch("fit");
  r = cli({"fit", "--n", "10", "--harmonics", "3", "--out", fdir});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fits = nlohmann::json::parse(read_file(fdir / "fits.json"));
  ASSERT_EQ(fits.size(), 3u);
  EXPECT_LE(fits[2]["discrepancy"].get<double>(), 0.01);
  EXPECT_TRUE(fs::exists(fdir / "discrepancy.csv"));
}

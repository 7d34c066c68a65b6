#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gfsim/experiments.hpp"

using namespace gfsim;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "gfsim_test_cli";
  std::filesystem::create_directories(dir);
  return dir / name;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(GFSIM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

TEST(Presets, AllResolve) {
  for (const auto& name : preset_names()) {
    const auto s = preset(name);
    EXPECT_NO_THROW(s.config.config.validate()) << name;
    EXPECT_EQ(s.preset, name);
  }
  EXPECT_THROW(preset("fig9"), ConfigError);
}

TEST(Commands, NamesRoundTrip) {
  for (const auto& [cmd, name] : command_names()) EXPECT_EQ(parse_command(name), cmd);
  EXPECT_THROW(parse_command("walk"), ConfigError);
}

TEST(Spectrum, AscendingEigenvaluesAndNormalizedWeights) {
  const auto t = run(preset("fig2"));
  ASSERT_EQ(t.rows.size(), 10u);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (r > 0) EXPECT_LE(t.rows[r - 1][3], t.rows[r][3]);
    double w = 0.0;
    for (std::size_t k = 0; k < 10; ++k) w += t.rows[r][4 + k];
    EXPECT_NEAR(w, 1.0, 1e-12);
  }
  EXPECT_GE(t.metadata["doublet"]["purity"].get<double>(), 0.99);
}

TEST(ResonantWalk, PresetAgreesBeforeBoundary) {
  const auto t = run(preset("fig1"));
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_LE(t.metadata["max_deviation_before_boundary"].get<double>(), 1e-10);
  for (const auto& row : t.rows) {
    double total = 0.0;
    for (std::size_t k = 1; k <= 10; ++k) total += row[k];
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(ResonantWalk, CouplingPhaseIsGaugedAway) {
  auto s = preset("fig1");
  s.times = {0.0, 5.0, 10.0, 20.0};
  auto phased = s;
  phased.config.config.coupling_phase = 0.7;
  const auto a = run(s), b = run(phased);
  const auto dev = a.column("max_abs_deviation");
  for (std::size_t r = 0; r < a.rows.size(); ++r) EXPECT_NEAR(a.rows[r][dev], b.rows[r][dev], 1e-12);
}

TEST(ResonantWalk, RefusesDetunedArrays) {
  auto s = preset("fig2");
  s.command = Command::resonant_walk;
  EXPECT_THROW(run(s), RegimeError);
}

TEST(Transfer, MidChainPairReachesPlanPeak) {
  const auto t = run(preset("fig3b"));
  EXPECT_EQ(t.rows.size(), 2001u);
  EXPECT_GE(t.metadata["peak_probability"].get<double>(), 0.99);
  EXPECT_NEAR(t.metadata["peak_time_relative_to_plan"].get<double>(), 1.0, 0.01);
  for (const auto& row : t.rows) EXPECT_LE(row[1] + row[2] + row[3], 1.0 + 1e-12);
}

TEST(Transfer, ResonantConfigHasNoPlan) {
  ExperimentSpec s;
  s.command = Command::transfer;
  s.config = resonant_config(6, 0.0013);
  s.pairs = {{1, 6}};
  s.grid = TimeGrid{0.0, 1e4, 101};
  const auto t = run(s);
  EXPECT_TRUE(t.metadata["plan"].is_null());
  EXPECT_LT(t.metadata["peak_probability"].get<double>(), 0.99);
}

TEST(Transfer, PairMustMatchSwitchingProfile) {
  auto s = preset("fig3b");
  s.pairs = {{1, 3}};
  EXPECT_THROW(run(s), ConfigError);
  s.pairs = {{4, 2}};
  EXPECT_NO_THROW(run(s));
}

TEST(Plan, DocumentHasPlanFields) {
  auto s = preset("fig3b");
  s.command = Command::plan;
  const auto t = run(s);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.document["source"], 2);
  EXPECT_EQ(t.document["transfer_time"].get<double>(), t.rows[0][t.column("transfer_time")]);
  EXPECT_TRUE(t.document.contains("metadata"));
}

TEST(Qubit, FixedStatesAtOptimalPhase) {
  const auto t = run(preset("fig4"));
  EXPECT_EQ(t.columns.size(), 9u);
  EXPECT_TRUE(t.metadata["eta_is_optimal"].get<bool>());
  for (const auto& st : t.metadata["states"]) {
    EXPECT_GT(st["fidelity_at_transfer_time"].get<double>(), 0.99);
    EXPECT_LE(st["closed_form_sup_deviation"].get<double>(), 0.02);
  }
}

TEST(Qubit, NeedsSwitchingProfile) {
  ExperimentSpec s;
  s.command = Command::qubit;
  s.config = resonant_config(6, 0.0013);
  s.pairs = {{1, 4}};
  EXPECT_THROW(run(s), ConfigError);
}

TEST(Dissipation, SeedRequiredAndDeterministic) {
  auto s = preset("fig5");
  s.pairs = {{1, 3}};
  s.samples = 8;
  s.grid = TimeGrid{1e-2, 1e-1, 2};
  const auto a = run(s), b = run(s);
  EXPECT_EQ(a.rows, b.rows);
  ASSERT_EQ(a.rows.size(), 3u);
  EXPECT_EQ(a.rows[0][2], 0.0);
  EXPECT_GT(a.rows[0][3], 0.99);
  s.seed.reset();
  EXPECT_THROW(run(s), ConfigError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("--version"), 0);
  EXPECT_EQ(cli("--preset fig2"), 0);
  EXPECT_EQ(cli(""), 2);
  EXPECT_EQ(cli("--preset fig9"), 2);
  EXPECT_EQ(cli("--preset fig2 --format xml"), 2);
  EXPECT_EQ(cli("--preset fig2 --no-such-flag"), 2);
  EXPECT_EQ(cli("plan --config /nonexistent.json"), 2);
  EXPECT_EQ(cli("--preset fig5 --grid 1:0:3"), 2);
  EXPECT_EQ(cli("resonant-walk --preset fig2"), 3);

  const auto cfg = scratch("strong.json");
  std::ofstream(cfg) << R"({"n_sites": 6, "frequencies": {"preset": "switching", "m": 1, "n": 5}, "J": 0.3})";
  EXPECT_EQ(cli("plan --config " + cfg.string()), 3);
  const auto bad = scratch("bad.json");
  std::ofstream(bad) << R"({"n_sites": 6, "frequencies": [1, 1], "J": 0.1})";
  EXPECT_EQ(cli("spectrum --config " + bad.string()), 2);
}

TEST(Cli, OutputIsDeterministic) {
  const auto a = scratch("a.csv"), b = scratch("b.csv");
  ASSERT_EQ(cli("--preset fig4 --out " + a.string()), 0);
  ASSERT_EQ(cli("--preset fig4 --out " + b.string()), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  std::ifstream in(a);
  const auto t = read_csv(in);
  EXPECT_EQ(t.metadata["preset"], "fig4");
  EXPECT_EQ(t.rows.size(), 2001u);
}

TEST(Cli, JsonFormatAndOverrides) {
  const auto out = scratch("q.json");
  ASSERT_EQ(cli("--preset fig4 --format json --alpha 0.6 --beta 0,0.8 --grid 0:1000:11 --out " + out.string()), 0);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["rows"].size(), 11u);
  EXPECT_EQ(j["columns"].size(), 3u);
  EXPECT_EQ(j["metadata"]["states"][0]["beta"][1].get<double>(), 0.8);
}

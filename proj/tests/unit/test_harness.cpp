#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wfl/config.hpp"
#include "wfl/errors.hpp"
#include "wfl/harness.hpp"
#include "wfl/selftest.hpp"

using namespace wfl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wfl_test_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

StudyConfig tiny_short_time() {
  StudyConfig c = parse_config(nlohmann::json::parse(R"({
    "seed": 7, "trials": 100, "grid": {"L": 40, "n": 128},
    "noise": {"M": 4},
    "solver": {"eps": 0.01},
    "short_time": {"T_min": 0.1, "T_max": 0.4, "points": 2, "steps": 32}
  })"));
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WFL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST(Config, DefaultsFollowTheEtaRule) {
  const StudyConfig c = default_config();
  EXPECT_NEAR(c.sim.eta, c.sim.noise.H - 0.15, 1e-15);
  EXPECT_NEAR(c.eta_ceiling(), c.sim.noise.H, 1e-15);
  const StudyConfig l = parse_config(nlohmann::json::parse(R"({"noise": {"driver": "lfsm", "H": 0.9, "alpha": 1.5}})"));
  EXPECT_NEAR(l.sim.eta, 0.9 - 1.0 / 1.5 - 0.1, 1e-12);
  EXPECT_NEAR(l.eta_ceiling(), 0.9 - 1.0 / 1.5, 1e-12);
}

TEST(Config, UnknownAndIllTypedKeys) {
  try {
    parse_config(nlohmann::json::parse(R"({"grid": {"nn": 3}})"));
    FAIL() << "no error";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("grid.nn"), std::string::npos);
  }
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"bogus": 1})")), ParameterError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"solver": {"eps": "big"}})")), ParameterError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"grid": {"n": 100}})")), ParameterError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"noise": {"driver": "levy"}})")), ParameterError);
  EXPECT_THROW(load_config("/nonexistent/wfl.json"), ParameterError);
}

TEST(Config, RoundTripAndHash) {
  const StudyConfig a = tiny_short_time();
  const StudyConfig b = parse_config(a.to_json());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  StudyConfig c = a;
  c.sim.eps = 0.02;
  EXPECT_NE(a.hash(), c.hash());
}

TEST(Config, SchemaMatchesTheParser) {
  const fs::path dir = WFL_CONFIG_DIR;
  const auto schema = nlohmann::json::parse(slurp(dir / "schema.json"));
  const auto resolved = default_config().to_json();
  for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it) {
    const auto& props = it.value();
    if (props.contains("properties")) {
      for (auto k = props["properties"].begin(); k != props["properties"].end(); ++k) {
        nlohmann::json probe = nlohmann::json::object();
        probe[it.key()] = nlohmann::json::object();
        probe[it.key()][k.key()] = nullptr; // null means "use the default"
        EXPECT_NO_THROW(parse_config(probe)) << it.key() << "." << k.key();
        EXPECT_TRUE(resolved[it.key()].contains(k.key())) << it.key() << "." << k.key();
      }
    }
  }
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() == "schema.json") continue;
    EXPECT_NO_THROW(load_config(e.path())) << e.path();
  }
}

TEST(Harness, LogGrid) {
  const auto g = log_grid(0.05, 1.0, 8);
  ASSERT_EQ(g.size(), 8u);
  EXPECT_DOUBLE_EQ(g.front(), 0.05);
  EXPECT_NEAR(g.back(), 1.0, 1e-15);
  for (std::size_t i = 2; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
  EXPECT_THROW(log_grid(0.0, 1.0, 3), ParameterError);
}

TEST(Harness, ParallelForCoversEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 5) throw DegenerateInputError("boom");
               }),
               DegenerateInputError);
}

TEST(Harness, TrialSeedsAreDistinct) {
  EXPECT_NE(trial_seed(1, "short_time", 0, 0), trial_seed(1, "long_time", 0, 0));
  EXPECT_NE(trial_seed(1, "short_time", 0, 0), trial_seed(1, "short_time", 1, 0));
  EXPECT_NE(trial_seed(1, "short_time", 0, 0), trial_seed(1, "short_time", 0, 1));
  EXPECT_NE(trial_seed(1, "short_time", 0, 0), trial_seed(2, "short_time", 0, 0));
  EXPECT_EQ(trial_seed(3, "tails", 2, 9), trial_seed(3, "tails", 2, 9));
}

TEST(Harness, ShortTimeIsIndependentOfThreadCount) {
  StudyConfig c = tiny_short_time();
  c.threads = 1;
  StudyReport r1 = run_short_time_study(c);
  c.threads = 3;
  StudyReport r3 = run_short_time_study(c);
  r1.timestamp.clear();
  r3.timestamp.clear();
  EXPECT_EQ(r1.to_json().dump(), r3.to_json().dump());
  ASSERT_EQ(r1.verdicts.size(), 1u);
  EXPECT_EQ(r1.cells.size(), 2u);
  EXPECT_TRUE(r1.prefactors.contains("C_S_hat"));
}

TEST(Harness, WrittenCsvIsByteIdentical) {
  const StudyConfig c = tiny_short_time();
  const fs::path a = scratch("a"), b = scratch("b");
  run_short_time_study(c).write(a);
  run_short_time_study(c).write(b);
  for (const char* rel : {"short_time/summary.csv", "short_time/T_00/summary.csv", "short_time/T_01/summary.csv"}) {
    ASSERT_TRUE(fs::exists(a / rel)) << rel;
    EXPECT_EQ(slurp(a / rel), slurp(b / rel)) << rel;
  }
  const auto j = nlohmann::json::parse(slurp(a / "short_time/report.json"));
  for (const char* key : {"config", "provenance", "timestamp", "verdicts"}) EXPECT_TRUE(j.contains(key)) << key;
  for (const char* key : {"config_hash", "master_seed", "version"}) EXPECT_TRUE(j["provenance"].contains(key)) << key;
}

TEST(Harness, StudyPreconditions) {
  StudyConfig c = tiny_short_time();
  c.trials = 10;
  EXPECT_THROW(run_short_time_study(c), ParameterError);
  c = tiny_short_time();
  c.sim.a = 0.3;
  EXPECT_THROW(run_long_time_study(c), ParameterError);
  c = tiny_short_time();
  c.sim.eta = 0.8;
  EXPECT_THROW(run_long_time_study(c), ParameterError);
  c = tiny_short_time();
  c.tails.paths = 999;
  EXPECT_THROW(run_tails_study(c), ParameterError);
  c = tiny_short_time();
  c.bounds.calibration = 20;
  EXPECT_THROW(run_bounds_study(c), ParameterError);
}

TEST(Harness, SimulationWritesRunAndSnapshots) {
  StudyConfig c = tiny_short_time();
  c.sim.T = 0.25;
  c.sim.steps = 32;
  c.sim.diag_stride = 1;
  const StudyReport r = run_simulation(c, 4);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.cells[0].rows.size(), 33u);
  ASSERT_EQ(r.blobs.size(), 2u);
  EXPECT_EQ(r.blobs[0].second.rows, 9u);
  const fs::path out = scratch("sim");
  r.write(out);
  EXPECT_TRUE(fs::exists(out / "simulate/run/summary.csv"));
  EXPECT_TRUE(fs::exists(out / "simulate/run/snapshots.wfl1"));
  const io::Wfl1 back = io::read_wfl1(out / "simulate/run/snapshots.wfl1");
  EXPECT_EQ(back.data, r.blobs[0].second.data);
}

TEST(Selftest, AllChecksPass) {
  for (const auto& r : run_selftest()) EXPECT_TRUE(r.pass) << r.name << ": " << r.detail;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("selftest"), 0);
  EXPECT_EQ(run_cli("simulate --config /nonexistent/wfl.json"), 2);
  EXPECT_EQ(run_cli("simulate --no-such-flag"), 2);
  EXPECT_EQ(run_cli(""), 2);

  const fs::path dir = scratch("cli");
  std::ofstream(dir / "bad.json") << R"({"grid": {"nn": 1}})";
  EXPECT_EQ(run_cli("simulate --config " + (dir / "bad.json").string()), 2);
  std::ofstream(dir / "ok.json") << R"({"grid": {"n": 128}, "noise": {"M": 4}, "solver": {"T": 0.25, "steps": 32}})";
  EXPECT_EQ(run_cli("simulate --config " + (dir / "ok.json").string() + " --out-dir " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out/simulate/report.json"));
}

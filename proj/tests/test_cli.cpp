#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "support/util.hpp"

namespace fs = std::filesystem;
using tempest::testing::TempDir;
using tempest::testing::slurp;
using tempest::testing::spit;

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const fs::path& dir,
                  const std::string& env_prefix = "") {
  fs::path log = dir / "cli.log";
  std::string cmd = "cd " + dir.string() + " && " + env_prefix + " " + TEMPEST_CLI_PATH + " " +
                    args + " > " + log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.output = slurp(log);
  return result;
}

// Small corpus: 4 cities, 10 train days; keeps every invocation quick.
const char* kSmallConfig = R"({
  "seed": 7,
  "cities": [
    {"name": "june", "lat": 36.0, "lon": -86.0},
    {"name": "avon", "lat": 36.0, "lon": -98.0},
    {"name": "bram", "lat": 36.0, "lon": -96.67},
    {"name": "cole", "lat": 36.0, "lon": -95.33}
  ],
  "train_start": "2018-08-22",
  "test_start": "2018-09-01",
  "test_end": "2018-09-08",
  "model": {"variant": "rfr", "params": {"n_trees": 20}},
  "synth": {"days": 10},
  "experiment": {"weeks_max": 1, "test_sizes": [20, 40]}
})";

}  // namespace

TEST_CASE("synth is deterministic and seed-sensitive") {
  TempDir dir("cli-synth");
  spit(dir.path() / "config.json", kSmallConfig);

  auto r1 = run_cli("--config config.json synth --out a", dir.path());
  REQUIRE(r1.exit_code == 0);
  auto r2 = run_cli("--config config.json synth --out b", dir.path());
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(dir.path() / "a" / "observations.csv") ==
        slurp(dir.path() / "b" / "observations.csv"));
  CHECK(r1.output.find("content hash") != std::string::npos);

  auto r3 = run_cli("--config config.json synth --out c --seed 8", dir.path());
  REQUIRE(r3.exit_code == 0);
  CHECK(slurp(dir.path() / "a" / "observations.csv") !=
        slurp(dir.path() / "c" / "observations.csv"));
}

TEST_CASE("fixture-backed fetch reproduces the synthetic corpus") {
  TempDir dir("cli-fetch");
  spit(dir.path() / "config.json", kSmallConfig);

  auto synth = run_cli("--config config.json synth --fixtures --out gen", dir.path());
  REQUIRE(synth.exit_code == 0);

  auto fetch = run_cli("--config config.json fetch --out fetched",
                       dir.path(), "TEMPEST_FIXTURE_DIR=gen/fixtures");
  REQUIRE(fetch.exit_code == 0);
  CHECK(slurp(dir.path() / "gen" / "observations.csv") ==
        slurp(dir.path() / "fetched" / "observations.csv"));
}

TEST_CASE("fetch reports missing (city, day) pairs and exits 2") {
  TempDir dir("cli-missing");
  spit(dir.path() / "config.json", kSmallConfig);
  auto synth = run_cli("--config config.json synth --fixtures --out gen", dir.path());
  REQUIRE(synth.exit_code == 0);
  fs::remove(dir.path() / "gen" / "fixtures" / "avon" / "2018-09-02.json");

  auto fetch = run_cli("--config config.json fetch --out fetched", dir.path(),
                       "TEMPEST_FIXTURE_DIR=gen/fixtures");
  CHECK(fetch.exit_code == 2);
  CHECK(fetch.output.find("avon, 2018-09-02") != std::string::npos);
}

TEST_CASE("live without a base url fails before any network activity") {
  TempDir dir("cli-live");
  spit(dir.path() / "config.json", kSmallConfig);
  auto r = run_cli("--config config.json fetch --live --out x", dir.path());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("base_url") != std::string::npos);
}

TEST_CASE("config validation failures exit 1") {
  TempDir dir("cli-config");
  spit(dir.path() / "bad.json", R"({"sede": 7})");
  auto r = run_cli("--config bad.json synth", dir.path());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("unknown config key") != std::string::npos);

  spit(dir.path() / "bad2.json", R"({"scaler_scope": "both"})");
  auto r2 = run_cli("--config bad2.json synth", dir.path());
  CHECK(r2.exit_code == 1);

  auto r3 = run_cli("frobnicate", dir.path());
  CHECK(r3.exit_code == 1);
}

TEST_CASE("train then predict cross-checks rmse and enforces the schema hash") {
  TempDir dir("cli-train");
  spit(dir.path() / "config.json", kSmallConfig);

  REQUIRE(run_cli("--config config.json synth --out run", dir.path()).exit_code == 0);
  REQUIRE(run_cli("--config config.json build --out run", dir.path()).exit_code == 0);
  auto train1 = run_cli("--config config.json train --out run", dir.path());
  REQUIRE(train1.exit_code == 0);

  auto predict = run_cli("--config config.json predict --out run", dir.path());
  REQUIRE(predict.exit_code == 0);
  auto rmse_pos = predict.output.find("rmse ");
  REQUIRE(rmse_pos != std::string::npos);
  std::string rmse_line = predict.output.substr(rmse_pos, 13);

  auto evaluate = run_cli("--config config.json evaluate --out run", dir.path());
  REQUIRE(evaluate.exit_code == 0);
  CHECK(evaluate.output.find(rmse_line) != std::string::npos);
  CHECK(fs::exists(dir.path() / "run" / "report.json"));

  // identical retrain -> identical artifact bytes
  std::string artifact = slurp(dir.path() / "run" / "model.json");
  REQUIRE(run_cli("--config config.json train --out run", dir.path()).exit_code == 0);
  CHECK(slurp(dir.path() / "run" / "model.json") == artifact);

  // tampered schema -> refusal with both hashes printed, exit 2
  fs::path schema = dir.path() / "run" / "schema.json";
  std::string schema_text = slurp(schema);
  auto pos = schema_text.find("\"Clear\"");
  REQUIRE(pos != std::string::npos);
  schema_text.replace(pos, 7, "\"Dusty\"");
  spit(schema, schema_text);
  auto refused = run_cli("--config config.json predict --out run", dir.path());
  CHECK(refused.exit_code == 2);
  CHECK(refused.output.find("schema hash mismatch") != std::string::npos);
  CHECK(refused.output.find("trained against") != std::string::npos);
}

TEST_CASE("experiment all twice in clean directories is byte-identical") {
  TempDir dir("cli-exp");
  spit(dir.path() / "config.json", kSmallConfig);

  auto r1 = run_cli("--config config.json experiment all --out e1", dir.path());
  REQUIRE(r1.exit_code == 0);
  auto r2 = run_cli("--config config.json experiment all --out e2", dir.path());
  REQUIRE(r2.exit_code == 0);

  for (const char* name : {"cities.csv", "weeks.csv", "models.csv", "testsize.csv",
                           "report.json"}) {
    CHECK(slurp(dir.path() / "e1" / name) == slurp(dir.path() / "e2" / name));
    CHECK(!slurp(dir.path() / "e1" / name).empty());
  }
  for (const char* name :
       {"cities.svg", "weeks.svg", "models.svg", "testsize.svg", "residuals_scatter.svg",
        "residuals_hist_one_city.svg", "residuals_hist_all_cities.svg", "config.echo.json"}) {
    CHECK(fs::exists(dir.path() / "e1" / name));
  }
}

TEST_CASE("svr non-convergence escalates to exit 3 when configured fatal") {
  TempDir dir("cli-nonconv");
  spit(dir.path() / "config.json", R"({
    "seed": 7,
    "cities": [
      {"name": "june", "lat": 36.0, "lon": -86.0},
      {"name": "avon", "lat": 36.0, "lon": -98.0}
    ],
    "train_start": "2018-08-22",
    "test_start": "2018-09-01",
    "test_end": "2018-09-08",
    "model": {"variant": "svr", "params": {"max_iter": 2}},
    "svr_nonconvergence_fatal": true,
    "synth": {"days": 10}
  })");
  REQUIRE(run_cli("--config config.json synth --out run", dir.path()).exit_code == 0);
  REQUIRE(run_cli("--config config.json build --out run", dir.path()).exit_code == 0);
  auto r = run_cli("--config config.json train --out run", dir.path());
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("did not converge") != std::string::npos);
}

TEST_CASE("default --days 70 spans enough history for the nine-week curve") {
  TempDir dir("cli-span");
  auto r = run_cli("synth --days 70 --out gen", dir.path());
  REQUIRE(r.exit_code == 0);
  // 70 train + 7 test + 1 horizon day; the 9-week curve needs 9*7+7+1 = 71.
  CHECK(r.output.find("(78 days)") != std::string::npos);
}

TEST_CASE("scaler scope flag switches the fitting rows") {
  TempDir dir("cli-scope");
  spit(dir.path() / "config.json", kSmallConfig);
  REQUIRE(run_cli("--config config.json synth --out run", dir.path()).exit_code == 0);
  REQUIRE(run_cli("--config config.json build --out run", dir.path()).exit_code == 0);
  REQUIRE(run_cli("--config config.json train --out run", dir.path()).exit_code == 0);
  std::string train_scope = slurp(dir.path() / "run" / "schema.json");
  REQUIRE(
      run_cli("--config config.json train --out run --scaler-scope union", dir.path())
          .exit_code == 0);
  std::string union_scope = slurp(dir.path() / "run" / "schema.json");
  CHECK(train_scope != union_scope);  // different mu/sigma
  std::string echo = slurp(dir.path() / "run" / "config.echo.json");
  CHECK(echo.find("\"scaler_scope\": \"union\"") != std::string::npos);
}

TEST_CASE("single experiment subcommand emits its csv and svg") {
  TempDir dir("cli-exp-one");
  spit(dir.path() / "config.json", kSmallConfig);
  auto r = run_cli("--config config.json experiment cities --out e", dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(dir.path() / "e" / "cities.csv"));
  CHECK(fs::exists(dir.path() / "e" / "cities.svg"));
  auto text = slurp(dir.path() / "e" / "cities.csv");
  CHECK(text.find("x,rmse,fingerprint") != std::string::npos);
  CHECK(text.find("# paper") != std::string::npos);
}

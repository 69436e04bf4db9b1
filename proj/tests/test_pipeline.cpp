#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "carboncast/config.hpp"
#include "carboncast/errors.hpp"
#include "carboncast/pipeline.hpp"

using namespace carboncast;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("pipeline");

namespace {

const char* kTinyConfig = R"(
[data]
source = synth
[synth]
t = 120
[backtest]
first_estimation_end = 2017-12
last_origin = 2018-09
horizons = 3
models = rw bar(1) bfavar(1,1)
density = true
draws = 500
extend_origins = false
[score]
fluctuation_window = 5
fluctuation_horizons = 1
fluctuation_pairs = bfavar(1,1):rw
[run]
seed = 7
)";

std::string write_config(const std::string& text, const std::string& path) {
  std::ofstream out(path);
  out << text;
  return path;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(CARBONCAST_CLI_PATH) + " " + args + " > cli_out.txt 2> cli_err.txt";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config parsing") {
  Config cfg = Config::parse_string("[run]\nseed = 9 # comment\n\n[backtest]\nhorizons = 4\n");
  CHECK(cfg.get_int("run", "seed", 0) == 9);
  CHECK(cfg.get_int("backtest", "horizons", 0) == 4);
  CHECK(cfg.get_int("backtest", "missing", 12) == 12);
  CHECK_THROWS_AS(Config::parse_string("[run\nseed = 1\n"), config_error);
  CHECK_THROWS_AS(Config::parse_string("[run]\nnot a kv line\n"), config_error);

  Config bad = Config::parse_string("[run]\nbogus_key = 1\n");
  CHECK_THROWS_AS(bad.validate_known_keys(), config_error);
  Config badsec = Config::parse_string("[nosuch]\nseed = 1\n");
  CHECK_THROWS_AS(badsec.validate_known_keys(), config_error);

  Config b = Config::parse_string("[backtest]\ndensity = yes\nstore_draws = off\n");
  CHECK(b.get_bool("backtest", "density", false));
  CHECK_FALSE(b.get_bool("backtest", "store_draws", true));
  CHECK_THROWS_AS(b.get_bool("backtest", "density", false) &&
                      Config::parse_string("[backtest]\ndensity = maybe\n")
                          .get_bool("backtest", "density", false),
                  config_error);
}

TEST_CASE("reserved flags are rejected loudly") {
  Config cfg = Config::parse_string("[minnesota]\nstrict_minnesota = true\n");
  CHECK_THROWS_AS(PipelineConfig::from_config(cfg), config_error);
  Config cfg2 = Config::parse_string("[score]\nwindow_se = true\n");
  CHECK_THROWS_AS(PipelineConfig::from_config(cfg2), config_error);
}

TEST_CASE("pipeline run produces a complete, reproducible run directory") {
  write_config(kTinyConfig, "tiny.cfg");
  Config cfg = Config::parse_file("tiny.cfg");
  PipelineConfig pc = PipelineConfig::from_config(cfg);
  pc.out_dir = "tiny_run_a";
  auto a = run_pipeline(pc, cfg.canonical_text());
  CHECK(fs::exists(fs::path(a.run_dir) / "records.csv"));
  CHECK(fs::exists(fs::path(a.run_dir) / "scores.csv"));
  CHECK(fs::exists(fs::path(a.run_dir) / "manifest.json"));
  CHECK(fs::exists(fs::path(a.run_dir) / "demand_pressure.csv"));
  CHECK(fs::exists(fs::path(a.run_dir) / "report_relative_rmsfe_price.csv"));
  CHECK(fs::exists(fs::path(a.run_dir) / "factors.csv"));
  CHECK(fs::exists(fs::path(a.run_dir) / "emissions_monthly.csv"));
  CHECK(fs::exists(fs::path(a.run_dir) / "fluctuation_bfavar1-1_vs_rw_h1.csv"));

  PipelineConfig pc2 = PipelineConfig::from_config(cfg);
  pc2.out_dir = "tiny_run_b";
  auto b = run_pipeline(pc2, cfg.canonical_text());
  CHECK(a.content_hash == b.content_hash);

  // different seed changes the content
  PipelineConfig pc3 = PipelineConfig::from_config(cfg);
  pc3.out_dir = "tiny_run_c";
  pc3.seed = 8;
  pc3.plan.seed = 8;
  pc3.synth.seed = 8;
  auto c = run_pipeline(pc3, cfg.canonical_text());
  CHECK(a.content_hash != c.content_hash);

  fs::remove_all("tiny_run_a");
  fs::remove_all("tiny_run_b");
  fs::remove_all("tiny_run_c");
  fs::remove("tiny.cfg");
}

TEST_CASE("report tables have one row per horizon and a best column") {
  write_config(kTinyConfig, "tiny2.cfg");
  Config cfg = Config::parse_file("tiny2.cfg");
  PipelineConfig pc = PipelineConfig::from_config(cfg);
  pc.out_dir = "tiny_run_report";
  run_pipeline(pc, cfg.canonical_text());

  std::ifstream in(fs::path(pc.out_dir) / "report_relative_rmsfe_price.csv");
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "horizon,bar(1),\"bfavar(1,1)\",rw,best");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);  // one per horizon
  in.close();
  fs::remove_all("tiny_run_report");
  fs::remove("tiny2.cfg");
}

TEST_CASE("report on an incomplete run dir fails") {
  fs::create_directories("empty_run");
  CHECK_THROWS_AS(report_stage("empty_run"), data_error);
  fs::remove_all("empty_run");
}

TEST_CASE("cli exit codes") {
  // exit 2: config error (unsupported ARIMA order)
  write_config("[backtest]\nmodels = arima(2,1,2)\n", "bad_order.cfg");
  CHECK(run_cli("backtest --config bad_order.cfg --out cli_run_x") == 2);

  // exit 2: malformed config
  write_config("[backtest\nmodels = rw\n", "broken.cfg");
  CHECK(run_cli("run --config broken.cfg") == 2);

  // exit 3: missing data directory
  write_config("[data]\nsource = /nonexistent/dir\n", "nodata.cfg");
  CHECK(run_cli("backtest --config nodata.cfg --out cli_run_y") == 3);

  fs::remove("bad_order.cfg");
  fs::remove("broken.cfg");
  fs::remove("nodata.cfg");
  fs::remove_all("cli_run_x");
  fs::remove_all("cli_run_y");
  fs::remove("cli_out.txt");
  fs::remove("cli_err.txt");
}

TEST_CASE("cli runs the tiny pipeline end to end") {
  write_config(kTinyConfig, "tiny3.cfg");
  int rc = run_cli("run --config tiny3.cfg --out cli_tiny_run");
  CHECK(rc == 0);
  CHECK(fs::exists("cli_tiny_run/manifest.json"));
  std::ifstream in("cli_tiny_run/manifest.json");
  nlohmann::json manifest = nlohmann::json::parse(in);
  CHECK(manifest.contains("content_hash"));
  CHECK(manifest["seed"].get<std::uint64_t>() == 7);
  fs::remove_all("cli_tiny_run");
  fs::remove("tiny3.cfg");
  fs::remove("cli_out.txt");
  fs::remove("cli_err.txt");
}

TEST_SUITE_END();

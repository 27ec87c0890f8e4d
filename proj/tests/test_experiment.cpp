#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "adasample/experiment.hpp"
#include "adasample/problems.hpp"

using namespace adasample;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "adasample_test_experiment";
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string expect_config_error(const ExperimentConfig& cfg) {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  ExperimentConfig cfg;
  CHECK(expect_config_error(cfg).empty());

  auto c = cfg;
  c.problem = "shell";
  CHECK(expect_config_error(c) == "problem");
  c = cfg;
  c.algorithm = "adam";
  CHECK(expect_config_error(c) == "algorithm");
  c = cfg;
  c.alpha = -1;
  CHECK(expect_config_error(c) == "alpha");
  c = cfg;
  c.theta = 0;
  CHECK(expect_config_error(c) == "theta");
  c = cfg;
  c.s0 = 1;
  CHECK(expect_config_error(c) == "s0");
  c = cfg;
  c.algorithm = "cvar-extended";
  c.beta = 1.0;
  CHECK(expect_config_error(c) == "beta");
  c.beta = 0.0;
  CHECK(expect_config_error(c) == "beta");
  c = cfg;
  c.algorithm = "sqp";
  CHECK(expect_config_error(c) == "algorithm");
  c.problem = "sphere";
  CHECK(expect_config_error(c).empty());
  c = cfg;
  c.fixed_sample_size = 100;
  CHECK(expect_config_error(c) == "fixed-sample-size");
  c.algorithm = "spgd-fixed";
  CHECK(expect_config_error(c).empty());
}

TEST_CASE("default output path honours the environment variable") {
  ExperimentConfig cfg;
  cfg.output_path = "/tmp/x.csv";
  CHECK(cfg.resolved_output_path() == "/tmp/x.csv");
  cfg.output_path.clear();
  ::setenv(kOutputDirEnv, "/some/dir", 1);
  CHECK(cfg.resolved_output_path() == "/some/dir/basic_spgd_seed42.csv");
  ::unsetenv(kOutputDirEnv);
  CHECK(cfg.resolved_output_path() == "./basic_spgd_seed42.csv");
}

TEST_CASE("basic spgd experiment writes CSV and sidecar") {
  ExperimentConfig cfg;
  cfg.theta = 0.5;
  cfg.max_iters = 150;
  cfg.max_sample_size = 20000;  // keeps the test quick; the cap does not change the row count
  cfg.output_path = (scratch_dir() / "basic.csv").string();
  const auto result = run_experiment(cfg);

  std::ifstream in(result.csv_path);
  const auto records = read_run_csv(in);
  CHECK(records.size() == 150);
  for (const auto& r : records) CHECK(r.error_norm.has_value());

  const auto meta = nlohmann::json::parse(read_file(result.metadata_path));
  CHECK(meta["config"]["problem"] == "basic");
  CHECK(meta["status"] == "max-iterations");
  CHECK(meta["parameters"]["a"]["values"].size() == kBasicDim);
  CHECK(meta["final_x"].size() == kBasicDim);

  SUBCASE("rerun gives a byte-identical CSV") {
    auto again = cfg;
    again.output_path = (scratch_dir() / "basic_again.csv").string();
    run_experiment(again);
    CHECK(read_file(again.output_path) == read_file(cfg.output_path));
  }
  SUBCASE("compare against itself") {
    const auto rep = compare_runs(result.csv_path, result.csv_path, {0.0, 0.0});
    CHECK(rep.passed);
    CHECK(rep.final_objective_delta == 0.0);
    CHECK(*rep.final_error_delta == 0.0);
  }
}

TEST_CASE("fixed-size baseline") {
  ExperimentConfig cfg;
  cfg.algorithm = "spgd-fixed";
  cfg.fixed_sample_size = 1000;
  cfg.max_iters = 20;
  cfg.output_path = (scratch_dir() / "fixed.csv").string();
  const auto result = run_experiment(cfg);
  for (const auto& r : result.log.records) {
    CHECK(r.sample_size == 1000);
    CHECK_FALSE(r.rho.has_value());
  }
}

TEST_CASE("frozen parameters replay the same run") {
  ExperimentConfig cfg;
  cfg.seed = 7;
  cfg.max_iters = 15;
  const std::string params = (scratch_dir() / "params.txt").string();
  export_parameters(cfg, params);

  cfg.output_path = (scratch_dir() / "direct.csv").string();
  run_experiment(cfg);
  auto replay = cfg;
  replay.params_path = params;
  replay.output_path = (scratch_dir() / "replay.csv").string();
  run_experiment(replay);
  CHECK(read_file(replay.output_path) == read_file(cfg.output_path));

  replay.problem = "portfolio";
  CHECK_THROWS_AS(run_experiment(replay), ConfigError);
}

TEST_CASE("cvar and sqp experiments") {
  ExperimentConfig cfg;
  cfg.problem = "portfolio";
  cfg.algorithm = "cvar-nested";
  cfg.beta = 0.9;
  cfg.alpha = 2.0;
  cfg.theta = 4.0;
  cfg.max_iters = 20;
  cfg.output_path = (scratch_dir() / "nested.csv").string();
  const auto nested = run_experiment(cfg);
  for (const auto& r : nested.log.records) CHECK(r.t_aux.has_value());
  const auto meta = nlohmann::json::parse(read_file(nested.metadata_path));
  CHECK(meta.contains("generation_seed"));
  CHECK(meta["final_t"].is_number());

  ExperimentConfig sqp;
  sqp.problem = "sphere";
  sqp.algorithm = "sqp";
  sqp.alpha = 0.05;
  sqp.max_iters = 40;
  sqp.output_path = (scratch_dir() / "sqp.csv").string();
  const auto result = run_experiment(sqp);
  CHECK(result.log.records.size() == 40);
}

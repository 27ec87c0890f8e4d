#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "adasample/run_log.hpp"

namespace adasample {

/// Invalid experiment configuration; field() names the offending setting.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Environment variable naming the directory used when no output path is given.
inline constexpr const char* kOutputDirEnv = "ADASAMPLE_OUTPUT_DIR";

struct ExperimentConfig {
  std::string problem = "basic";      // basic | portfolio | sphere
  std::string algorithm = "spgd";     // spgd | spgd-fixed | sqp | cvar-extended | cvar-nested
  double alpha = 0.025;
  double theta = 1.0;
  double beta = 0.0;
  double epsilon = 0.1;
  std::int64_t s0 = 10;
  std::int64_t max_iters = 150;
  std::uint64_t seed = 42;
  std::int64_t max_sample_size = 1'000'000;
  std::optional<std::int64_t> fixed_sample_size;
  std::optional<std::int64_t> gradient_eval_budget;
  double stationarity_tol = 1e-8;
  /// Constant fill for the starting point; problem default when empty.
  std::optional<double> x0;
  /// Frozen parameters to load instead of drawing them from the seed.
  std::string params_path;
  std::string output_path;
  bool record_timing = false;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  /// output_path, or a default name inside $ADASAMPLE_OUTPUT_DIR (or the working directory).
  std::string resolved_output_path() const;
};

struct ExperimentResult {
  RunLog log;
  std::string csv_path;
  std::string metadata_path;
};

/// Builds the problem, runs the configured driver, writes the run CSV and a
/// JSON sidecar (config, frozen parameters, final status) next to it.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes the frozen parameters of cfg.problem / cfg.seed as a flat table.
void export_parameters(const ExperimentConfig& cfg, const std::string& path);

}  // namespace adasample

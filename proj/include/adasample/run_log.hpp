#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace adasample {

/// One optimizer iteration as written to the run CSV.
struct RunRecord {
  std::int64_t iteration = 0;
  std::int64_t sample_size = 0;
  std::int64_t cumulative_grad_evals = 0;
  double objective_estimate = 0.0;
  std::optional<double> error_norm;
  std::optional<double> rho;
  std::optional<double> t_aux;
  std::optional<double> wall_time_ms;
};

enum class RunStatus {
  kMaxIterations,
  kStationary,
  kGradientBudget,
  kSampleBudgetExhausted,
};

std::string to_string(RunStatus status);

struct RunLog {
  std::vector<RunRecord> records;
  RunStatus status = RunStatus::kMaxIterations;
  Eigen::VectorXd final_x;
  std::optional<double> final_t;
  /// Auxiliary variable used at iteration 0 (CVaR drivers).
  std::optional<double> initial_t;
  /// <grad G(x_k), d_k> + G(x_k) for every accepted SQP step.
  std::vector<double> linearized_residuals;
};

/// Column order of the run CSV.
inline constexpr const char* kRunCsvHeader =
    "iteration,sample_size,cumulative_grad_evals,objective_estimate,error_norm,rho,t_aux,wall_time_ms";

void write_run_csv(std::ostream& os, const std::vector<RunRecord>& records);
/// Throws std::invalid_argument when the header differs from kRunCsvHeader.
std::vector<RunRecord> read_run_csv(std::istream& is);

struct CompareTolerances {
  /// Largest accepted |final objective a - final objective b| / max(|b|, tiny).
  double objective_rel_tol = 0.0;
  /// Largest accepted |final error a - final error b|; ignored if either has no error column.
  std::optional<double> error_abs_tol;
};

struct AlignedPoint {
  std::int64_t grad_evals = 0;
  double objective_a = 0.0;
  /// Run b's objective linearly interpolated in cumulative gradient evaluations.
  std::optional<double> objective_b;
};

struct ComparisonReport {
  std::vector<AlignedPoint> aligned;
  double final_objective_a = 0.0;
  double final_objective_b = 0.0;
  double final_objective_delta = 0.0;
  double final_objective_rel_delta = 0.0;
  std::optional<double> final_error_a;
  std::optional<double> final_error_b;
  std::optional<double> final_error_delta;
  std::int64_t final_sample_size_a = 0;
  std::int64_t final_sample_size_b = 0;
  bool passed = false;

  void write(std::ostream& os) const;
};

ComparisonReport compare_runs(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                              const CompareTolerances& tol);
/// Reads both CSVs, then compares.
ComparisonReport compare_runs(const std::string& csv_a, const std::string& csv_b, const CompareTolerances& tol);

}  // namespace adasample

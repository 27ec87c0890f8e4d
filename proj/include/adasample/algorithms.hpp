#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

#include "adasample/adaptive_tests.hpp"
#include "adasample/geometry.hpp"
#include "adasample/problems.hpp"
#include "adasample/run_log.hpp"
#include "adasample/stochastic_model.hpp"

namespace adasample {

struct OptimizerConfig {
  double alpha = 0.025;
  std::int64_t max_iters = 150;
  TestConfig test;
  Eigen::Index initial_sample_size = 10;
  std::uint64_t seed = 0;
  /// false: keep |S_k| = initial_sample_size and skip the sample-size test.
  bool adaptive = true;
  /// Stop once the cumulative gradient evaluations reach this count.
  std::optional<std::int64_t> gradient_eval_budget;
  ProjectionOptions projection;
  bool record_timing = false;
  /// Realizations materialized at a time while streaming a sample set.
  Eigen::Index chunk_size = 4096;

  void validate() const;
};

struct StepResult {
  Eigen::VectorXd x_next;
  Eigen::VectorXd reduced_grad;
  GradientStats stats;
};

/// x_next = P(x - alpha g), reduced gradient (x - x_next) / alpha.
std::pair<Eigen::VectorXd, Eigen::VectorXd> projected_step(const ConstraintSetd& set, const ConstVectorRef& x,
                                                           const ConstVectorRef& grad, double alpha,
                                                           const ProjectionOptions& opts = {});

/// One SPGD step on a fixed sample set.
StepResult spgd_step(const StochasticProblem& problem, const ConstraintSetd& set, const ConstVectorRef& x,
                     const SampleSet& samples, double alpha, const ProjectionOptions& opts = {});

/// Adaptive-sampling SPGD: fresh samples every iteration, size grown by the
/// norm test. x0 is projected onto the set before the first iteration.
RunLog run_spgd_adaptive(const StochasticProblem& problem, const ConstraintSetd& set, const ConstVectorRef& x0,
                         const OptimizerConfig& cfg);

/// Minimizer of <grad_F, d> + ||d||^2 / (2 alpha) s.t. <grad_G, d> + G = 0.
Eigen::VectorXd sqp_direction(const ConstVectorRef& grad_f, const ConstVectorRef& grad_g, double g_value,
                              double alpha);

/// Adaptive-sampling SQP for a single equality constraint G(x) = 0. A failing
/// test enlarges the current sample set in place before the step is taken.
RunLog run_sqp_adaptive(const StochasticProblem& problem, const EqualityConstraint& constraint,
                        const ConstVectorRef& x0, const OptimizerConfig& cfg);

/// Adaptive SPGD over (x, t) on the smoothed CVaR objective with constraint
/// set C x R. beta == 0 runs the risk-neutral problem instead. Without t0 the
/// auxiliary variable starts at the mean of f(x0; xi) over the first sample set.
RunLog run_cvar_extended(const StochasticProblem& problem, const ConstraintSetd& set, const ConstVectorRef& x0,
                         double beta, double epsilon, const OptimizerConfig& cfg,
                         std::optional<double> t0 = std::nullopt);

struct NestedEstimate {
  /// t + mean((f_i - t)_+^eps) / (1 - beta) with t from quantile_solve.
  double objective = 0.0;
  double t = 0.0;
  /// Per-sample logistic((f_i - t) / eps) grad f_i. Its mean times 1 / (1 - beta)
  /// is the gradient of `objective`, since t is stationary in the objective.
  GradientStats stats;
};

NestedEstimate nested_quantile_estimate(const StochasticProblem& problem, const ConstVectorRef& x,
                                        const SampleSet& samples, double beta, double epsilon);

/// Adaptive SPGD on x only, re-solving the smoothed quantile t on every sample
/// set and stepping along mean(logistic((f_i - t) / eps) grad f_i).
RunLog run_nested_quantile(const StochasticProblem& problem, const ConstraintSetd& set, const ConstVectorRef& x0,
                           double beta, double epsilon, const OptimizerConfig& cfg);

}  // namespace adasample

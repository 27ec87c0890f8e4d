#include "adasample/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "adasample/risk.hpp"

namespace adasample {

void OptimizerConfig::validate() const {
  if (!(alpha > 0)) throw std::invalid_argument("OptimizerConfig: alpha must be positive");
  if (max_iters < 0) throw std::invalid_argument("OptimizerConfig: max_iters must be non-negative");
  if (adaptive) {
    test.validate();
    if (initial_sample_size < test.min_sample_size) {
      throw std::invalid_argument("OptimizerConfig: initial_sample_size below the test minimum");
    }
  } else if (initial_sample_size < 1) {
    throw std::invalid_argument("OptimizerConfig: fixed sample size must be at least 1");
  }
  if (chunk_size < 1) throw std::invalid_argument("OptimizerConfig: chunk_size must be positive");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> projected_step(const ConstraintSetd& set, const ConstVectorRef& x,
                                                           const ConstVectorRef& grad, double alpha,
                                                           const ProjectionOptions& opts) {
  Eigen::VectorXd x_next = project(set, x - alpha * grad, opts).point;
  Eigen::VectorXd reduced = (x - x_next) / alpha;
  return {std::move(x_next), std::move(reduced)};
}

StepResult spgd_step(const StochasticProblem& problem, const ConstraintSetd& set, const ConstVectorRef& x,
                     const SampleSet& samples, double alpha, const ProjectionOptions& opts) {
  StepResult r;
  r.stats = sample_gradient(problem, x, samples);
  std::tie(r.x_next, r.reduced_grad) = projected_step(set, x, r.stats.mean_grad, alpha, opts);
  return r;
}

namespace {

using Clock = std::chrono::steady_clock;

/// Visits realizations first .. first + n - 1 of one iteration, chunk by chunk.
template <typename Fn>
void for_each_realization(const StochasticProblem& problem, std::uint64_t seed, std::uint32_t iteration,
                          Eigen::Index first, Eigen::Index n, Eigen::Index chunk, Fn&& fn) {
  for (Eigen::Index offset = 0; offset < n; offset += chunk) {
    const Eigen::Index m = std::min(chunk, n - offset);
    const SampleSet block =
        draw_samples(problem, m, iteration, seed, static_cast<std::uint32_t>(first + offset));
    for (Eigen::Index j = 0; j < m; ++j) fn(first + offset + j, block[j]);
  }
}

struct SampledEvaluation {
  GradientStats stats;
  double objective = 0.0;
  std::optional<double> t_aux;
};

using Evaluator = std::function<SampledEvaluation(const Eigen::VectorXd& x, std::uint32_t iteration, Eigen::Index n)>;

// Two passes over the same realizations: costs first (for t), then the weighted gradients.
template <typename Visit>
NestedEstimate nested_estimate(const StochasticProblem& problem, const ConstVectorRef& x, Eigen::Index size,
                               double beta, double epsilon, Visit&& visit) {
  Eigen::VectorXd values(size);
  visit([&](Eigen::Index i, const auto& xi) { values(i) = problem.eval_f(x, xi); });
  NestedEstimate est;
  est.t = quantile_solve(values, beta, epsilon);

  GradientAccumulator acc(problem.dim);
  Eigen::VectorXd g(problem.dim);
  visit([&](Eigen::Index i, const auto& xi) {
    problem.eval_grad(x, xi, g);
    acc.add(smooth_plus_deriv(values(i) - est.t, epsilon) * g);
  });
  double excess = 0.0;
  for (Eigen::Index i = 0; i < size; ++i) excess += smooth_plus(values(i) - est.t, epsilon);
  est.stats = acc.stats();
  est.objective = est.t + excess / (static_cast<double>(size) * (1.0 - beta));
  return est;
}

/// Plain sample-average evaluation of f and grad f over a streamed sample set.
SampledEvaluation evaluate_average(const StochasticProblem& problem, const OptimizerConfig& cfg,
                                   const Eigen::VectorXd& x, std::uint32_t iteration, Eigen::Index n) {
  GradientAccumulator acc(problem.dim);
  Eigen::VectorXd g(problem.dim);
  double f_sum = 0.0;
  for_each_realization(problem, cfg.seed, iteration, 0, n, cfg.chunk_size, [&](Eigen::Index, const auto& xi) {
    f_sum += problem.eval_f(x, xi);
    problem.eval_grad(x, xi, g);
    acc.add(g);
  });
  return {acc.stats(), f_sum / static_cast<double>(n), std::nullopt};
}

std::optional<double> elapsed_ms(const OptimizerConfig& cfg, Clock::time_point start) {
  if (!cfg.record_timing) return std::nullopt;
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Shared loop of the projected-gradient drivers.
RunLog run_projected_driver(const ConstraintSetd& set, const ConstVectorRef& x0, const OptimizerConfig& cfg,
                            const Evaluator& evaluate, const std::optional<Eigen::VectorXd>& known_optimum) {
  cfg.validate();
  if (x0.size() != set.dim()) throw std::invalid_argument("driver: x0 has the wrong dimension");
  const auto start = Clock::now();

  RunLog log;
  Eigen::VectorXd x = project(set, x0, cfg.projection).point;
  Eigen::Index size = cfg.initial_sample_size;
  std::int64_t evals = 0;

  for (std::int64_t k = 0; k < cfg.max_iters; ++k) {
    const auto eval = evaluate(x, static_cast<std::uint32_t>(k), size);
    auto [x_next, reduced] = projected_step(set, x, eval.stats.mean_grad, cfg.alpha, cfg.projection);
    evals += size;

    RunRecord rec;
    rec.iteration = k;
    rec.sample_size = size;
    rec.cumulative_grad_evals = evals;
    rec.objective_estimate = eval.objective;
    if (known_optimum) rec.error_norm = (x.head(known_optimum->size()) - *known_optimum).norm();
    rec.t_aux = eval.t_aux;

    const double threshold = cfg.test.stationarity_tol * (1.0 + x.norm());
    const bool stationary = reduced.norm() <= threshold;
    if (cfg.adaptive && !stationary) {
      const TestOutcome outcome = norm_test(eval.stats, reduced, cfg.test);
      rec.rho = outcome.rho;
      size = outcome.next_size;
    }
    rec.wall_time_ms = elapsed_ms(cfg, start);
    log.records.push_back(rec);
    x = std::move(x_next);

    if (stationary) {
      log.status = RunStatus::kStationary;
      break;
    }
    if (cfg.gradient_eval_budget && evals >= *cfg.gradient_eval_budget) {
      log.status = RunStatus::kGradientBudget;
      break;
    }
  }
  log.final_x = x;
  return log;
}

}  // namespace

RunLog run_spgd_adaptive(const StochasticProblem& problem, const ConstraintSetd& set, const ConstVectorRef& x0,
                         const OptimizerConfig& cfg) {
  if (set.dim() != problem.dim) throw std::invalid_argument("run_spgd_adaptive: set and problem dimensions differ");
  const Evaluator evaluate = [&](const Eigen::VectorXd& x, std::uint32_t k, Eigen::Index n) {
    return evaluate_average(problem, cfg, x, k, n);
  };
  return run_projected_driver(set, x0, cfg, evaluate, problem.known_optimum);
}

Eigen::VectorXd sqp_direction(const ConstVectorRef& grad_f, const ConstVectorRef& grad_g, double g_value,
                              double alpha) {
  if (grad_f.size() != grad_g.size()) throw std::invalid_argument("sqp_direction: dimension mismatch");
  if (!(alpha > 0)) throw std::invalid_argument("sqp_direction: alpha must be positive");
  const double gg = grad_g.squaredNorm();
  if (gg == 0.0) {
    if (g_value != 0.0) throw std::invalid_argument("sqp_direction: inconsistent linearization (zero constraint gradient)");
    return -alpha * grad_f;
  }
  const double lambda = (g_value - alpha * grad_g.dot(grad_f)) / (alpha * gg);
  return -alpha * (grad_f + lambda * grad_g);
}

RunLog run_sqp_adaptive(const StochasticProblem& problem, const EqualityConstraint& constraint,
                        const ConstVectorRef& x0, const OptimizerConfig& cfg) {
  cfg.validate();
  if (x0.size() != problem.dim) throw std::invalid_argument("run_sqp_adaptive: x0 has the wrong dimension");
  const auto start = Clock::now();
  const double alpha = cfg.alpha;

  RunLog log;
  Eigen::VectorXd x = x0;
  Eigen::Index size = cfg.initial_sample_size;
  std::int64_t evals = 0;
  Eigen::VectorXd g(problem.dim);

  for (std::int64_t k = 0; k < cfg.max_iters; ++k) {
    const auto iteration = static_cast<std::uint32_t>(k);
    const double g_value = constraint.value(x);
    const Eigen::VectorXd g_grad = constraint.gradient(x);

    GradientAccumulator reduced_acc(problem.dim);
    double f_sum = 0.0;
    Eigen::Index drawn = 0;
    const auto extend_to = [&](Eigen::Index n) {
      for_each_realization(problem, cfg.seed, iteration, drawn, n - drawn, cfg.chunk_size,
                           [&](Eigen::Index, const auto& xi) {
                             f_sum += problem.eval_f(x, xi);
                             problem.eval_grad(x, xi, g);
                             reduced_acc.add(-sqp_direction(g, g_grad, g_value, alpha) / alpha);
                           });
      evals += n - drawn;
      drawn = n;
    };
    extend_to(size);

    RunRecord rec;
    rec.iteration = k;
    if (problem.known_optimum) rec.error_norm = (x - *problem.known_optimum).norm();

    bool stationary = false;
    bool exhausted = false;
    while (true) {
      const Eigen::VectorXd& reduced = reduced_acc.mean();
      if (reduced.norm() <= cfg.test.stationarity_tol * (1.0 + x.norm())) {
        stationary = true;
        break;
      }
      if (!cfg.adaptive) break;
      const TestOutcome outcome = sqp_norm_test(reduced_acc.scatter(), drawn, reduced, cfg.test);
      rec.rho = outcome.rho;
      if (outcome.passed) break;
      if (drawn >= cfg.test.max_sample_size) {
        exhausted = true;
        break;
      }
      extend_to(outcome.next_size);
    }
    size = drawn;

    rec.sample_size = size;
    rec.cumulative_grad_evals = evals;
    rec.objective_estimate = f_sum / static_cast<double>(size);
    rec.wall_time_ms = elapsed_ms(cfg, start);
    log.records.push_back(rec);

    if (exhausted) {
      log.status = RunStatus::kSampleBudgetExhausted;
      break;
    }
    const Eigen::VectorXd d = -alpha * reduced_acc.mean();
    log.linearized_residuals.push_back(g_grad.dot(d) + g_value);
    x += d;
    if (stationary) {
      log.status = RunStatus::kStationary;
      break;
    }
    if (cfg.gradient_eval_budget && evals >= *cfg.gradient_eval_budget) {
      log.status = RunStatus::kGradientBudget;
      break;
    }
  }
  log.final_x = x;
  return log;
}

RunLog run_cvar_extended(const StochasticProblem& problem, const ConstraintSetd& set, const ConstVectorRef& x0,
                         double beta, double epsilon, const OptimizerConfig& cfg, std::optional<double> t0) {
  if (beta == 0.0) return run_spgd_adaptive(problem, set, x0, cfg);
  if (set.dim() != problem.dim) throw std::invalid_argument("run_cvar_extended: set and problem dimensions differ");

  const ExtendedProblem extended = extend_problem(problem, beta, epsilon);
  const StochasticProblem lifted = extended.as_problem();
  const auto lifted_set = ConstraintSetd::product({set, ConstraintSetd::whole(1)});
  const Eigen::Index n = problem.dim;

  Eigen::VectorXd z(n + 1);
  z.head(n) = project(set, x0, cfg.projection).point;
  if (!t0) {
    const SampleSet first = draw_samples(problem, cfg.initial_sample_size, 0, cfg.seed);
    t0 = sample_objective(problem, z.head(n), first);
  }
  z(n) = *t0;

  const Evaluator evaluate = [&](const Eigen::VectorXd& zk, std::uint32_t k, Eigen::Index size) {
    auto eval = evaluate_average(lifted, cfg, zk, k, size);
    eval.t_aux = zk(n);
    return eval;
  };
  // The risk-neutral optimum says nothing about the CVaR minimizer, so no error column.
  RunLog log = run_projected_driver(lifted_set, z, cfg, evaluate, std::nullopt);
  log.initial_t = t0;
  log.final_t = log.final_x(n);
  log.final_x = Eigen::VectorXd(log.final_x.head(n));
  return log;
}

NestedEstimate nested_quantile_estimate(const StochasticProblem& problem, const ConstVectorRef& x,
                                       const SampleSet& samples, double beta, double epsilon) {
  if (!(beta > 0 && beta < 1)) throw std::invalid_argument("nested_quantile_estimate: beta must lie in (0, 1)");
  if (!(epsilon > 0)) throw std::invalid_argument("nested_quantile_estimate: epsilon must be positive");
  const auto visit = [&](auto&& fn) {
    for (Eigen::Index i = 0; i < samples.size(); ++i) fn(i, samples[i]);
  };
  return nested_estimate(problem, x, samples.size(), beta, epsilon, visit);
}

RunLog run_nested_quantile(const StochasticProblem& problem, const ConstraintSetd& set, const ConstVectorRef& x0,
                           double beta, double epsilon, const OptimizerConfig& cfg) {
  if (!(beta > 0 && beta < 1)) throw std::invalid_argument("run_nested_quantile: beta must lie in (0, 1)");
  if (!(epsilon > 0)) throw std::invalid_argument("run_nested_quantile: epsilon must be positive");
  if (set.dim() != problem.dim) throw std::invalid_argument("run_nested_quantile: set and problem dimensions differ");

  const Evaluator evaluate = [&](const Eigen::VectorXd& x, std::uint32_t k, Eigen::Index size) {
    const auto visit = [&](auto&& fn) { for_each_realization(problem, cfg.seed, k, 0, size, cfg.chunk_size, fn); };
    const NestedEstimate est = nested_estimate(problem, x, size, beta, epsilon, visit);
    return SampledEvaluation{est.stats, est.objective, est.t};
  };
  RunLog log = run_projected_driver(set, x0, cfg, evaluate, std::nullopt);
  if (!log.records.empty()) {
    log.initial_t = log.records.front().t_aux;
    log.final_t = log.records.back().t_aux;
  }
  return log;
}

}  // namespace adasample

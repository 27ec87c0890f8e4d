#include "adasample/stochastic_model.hpp"

#include <stdexcept>

namespace adasample {

void draw_realization(const StochasticProblem& problem, std::uint64_t base_seed, std::uint32_t iteration,
                      std::uint32_t index, VectorRef xi) {
  CounterStream stream(base_seed, StreamDomain::kSamples, iteration, index);
  problem.sample_xi(stream, xi);
}

SampleSet draw_samples(const StochasticProblem& problem, Eigen::Index n, std::uint32_t iteration,
                       std::uint64_t base_seed, std::uint32_t first_index) {
  if (n < 1) throw std::invalid_argument("draw_samples: n must be at least 1");
  SampleSet set;
  set.seed_info = SeedInfo{base_seed, iteration, first_index};
  set.realizations.resize(problem.xi_dim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    draw_realization(problem, base_seed, iteration, first_index + static_cast<std::uint32_t>(j),
                     set.realizations.col(j));
  }
  return set;
}

void append_samples(const StochasticProblem& problem, SampleSet& set, Eigen::Index extra) {
  if (extra < 1) return;
  const Eigen::Index old = set.size();
  set.realizations.conservativeResize(problem.xi_dim, old + extra);
  const auto& info = set.seed_info;
  for (Eigen::Index j = old; j < old + extra; ++j) {
    draw_realization(problem, info.base_seed, info.iteration, info.first_index + static_cast<std::uint32_t>(j),
                     set.realizations.col(j));
  }
}

double sample_objective(const StochasticProblem& problem, const ConstVectorRef& x, const SampleSet& samples) {
  if (samples.size() == 0) throw std::invalid_argument("sample_objective: empty sample set");
  if (x.size() != problem.dim) throw std::invalid_argument("sample_objective: dimension mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < samples.size(); ++i) sum += problem.eval_f(x, samples[i]);
  return sum / static_cast<double>(samples.size());
}

GradientStats GradientAccumulator::stats() const {
  GradientStats s;
  s.mean_grad = mean_;
  s.n = n_;
  if (n_ >= 2) {
    const auto n = static_cast<double>(n_);
    s.variance_stat = scatter() / ((n - 1.0) * n);
  }
  return s;
}

GradientStats sample_gradient(const StochasticProblem& problem, const ConstVectorRef& x, const SampleSet& samples) {
  if (samples.size() == 0) throw std::invalid_argument("sample_gradient: empty sample set");
  if (x.size() != problem.dim) throw std::invalid_argument("sample_gradient: dimension mismatch");
  GradientAccumulator acc(problem.dim);
  Eigen::VectorXd g(problem.dim);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    problem.eval_grad(x, samples[i], g);
    acc.add(g);
  }
  return acc.stats();
}

}  // namespace adasample

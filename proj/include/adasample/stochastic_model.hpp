#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>

#include "adasample/random.hpp"

namespace adasample {

using ConstVectorRef = Eigen::Ref<const Eigen::VectorXd>;
using VectorRef = Eigen::Ref<Eigen::VectorXd>;

/// Evaluator bundle for min E[f(x; xi)].
///
/// Gradients are written into a caller-provided buffer so that large sample
/// sets do not allocate per realization.
struct StochasticProblem {
  Eigen::Index dim = 0;
  /// Length of one realization xi.
  Eigen::Index xi_dim = 0;
  std::function<void(CounterStream&, VectorRef xi)> sample_xi;
  std::function<double(const ConstVectorRef& x, const ConstVectorRef& xi)> eval_f;
  std::function<void(const ConstVectorRef& x, const ConstVectorRef& xi, VectorRef grad)> eval_grad;
  std::optional<Eigen::VectorXd> known_optimum;
  std::optional<double> known_optimal_value;

  Eigen::VectorXd grad(const ConstVectorRef& x, const ConstVectorRef& xi) const {
    Eigen::VectorXd g(dim);
    eval_grad(x, xi, g);
    return g;
  }
};

struct SeedInfo {
  std::uint64_t base_seed = 0;
  std::uint32_t iteration = 0;
  /// Sample index of the first column; realization j has index first_index + j.
  std::uint32_t first_index = 0;
};

/// Ordered i.i.d. realizations, one per column, with the stream coordinates
/// that regenerate them.
struct SampleSet {
  Eigen::MatrixXd realizations;
  SeedInfo seed_info;

  Eigen::Index size() const { return realizations.cols(); }
  auto operator[](Eigen::Index i) const { return realizations.col(i); }
};

/// Realization `index` of iteration `iteration`; a pure function of its arguments.
void draw_realization(const StochasticProblem& problem, std::uint64_t base_seed, std::uint32_t iteration,
                      std::uint32_t index, VectorRef xi);

/// Draws n realizations with indices first_index .. first_index + n - 1.
SampleSet draw_samples(const StochasticProblem& problem, Eigen::Index n, std::uint32_t iteration,
                       std::uint64_t base_seed, std::uint32_t first_index = 0);

/// Appends `extra` fresh realizations, continuing the index sequence of `set`.
void append_samples(const StochasticProblem& problem, SampleSet& set, Eigen::Index extra);

/// Sample average (1/|S|) sum f(x; xi_i).
double sample_objective(const StochasticProblem& problem, const ConstVectorRef& x, const SampleSet& samples);

struct GradientStats {
  Eigen::VectorXd mean_grad;
  /// sum ||g_i - mean||^2 / ((n - 1) n); empty when n < 2.
  std::optional<double> variance_stat;
  Eigen::Index n = 0;
};

/// Streaming mean and scatter of per-sample vectors, accumulated in index order.
class GradientAccumulator {
 public:
  explicit GradientAccumulator(Eigen::Index dim) : mean_(Eigen::VectorXd::Zero(dim)), delta_(dim) {}

  void add(const ConstVectorRef& g) {
    ++n_;
    delta_ = g - mean_;
    mean_ += delta_ / static_cast<double>(n_);
    scatter_ += delta_.dot(g - mean_);
  }

  Eigen::Index count() const { return n_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  /// sum ||g_i - mean||^2
  double scatter() const { return std::max(scatter_, 0.0); }

  GradientStats stats() const;

 private:
  Eigen::Index n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd delta_;
  double scatter_ = 0.0;
};

/// Mean gradient over S plus the unbiased variance statistic of the mean.
GradientStats sample_gradient(const StochasticProblem& problem, const ConstVectorRef& x, const SampleSet& samples);

}  // namespace adasample

#include "adasample/risk.hpp"

namespace adasample {

ExtendedProblem extend_problem(const StochasticProblem& base, double beta, double epsilon) {
  if (!(beta > 0 && beta < 1)) throw std::invalid_argument("extend_problem: beta must lie in (0, 1)");
  if (!(epsilon > 0)) throw std::invalid_argument("extend_problem: epsilon must be positive");
  return ExtendedProblem{base, beta, epsilon};
}

StochasticProblem ExtendedProblem::as_problem() const {
  StochasticProblem p;
  p.dim = base.dim + 1;
  p.xi_dim = base.xi_dim;
  p.sample_xi = base.sample_xi;

  const Eigen::Index n = base.dim;
  const double scale = 1.0 / (1.0 - beta);
  const double eps = epsilon;
  auto f = base.eval_f;
  auto grad = base.eval_grad;

  p.eval_f = [=](const ConstVectorRef& z, const ConstVectorRef& xi) {
    const double t = z(n);
    return t + scale * smooth_plus(f(z.head(n), xi) - t, eps);
  };
  p.eval_grad = [=](const ConstVectorRef& z, const ConstVectorRef& xi, VectorRef out) {
    const double t = z(n);
    const double weight = scale * smooth_plus_deriv(f(z.head(n), xi) - t, eps);
    grad(z.head(n), xi, out.head(n));
    out.head(n) *= weight;
    out(n) = 1.0 - weight;
  };
  return p;
}

}  // namespace adasample

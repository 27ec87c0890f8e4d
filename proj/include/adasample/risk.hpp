#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "adasample/stochastic_model.hpp"

namespace adasample {

/// Softplus smoothing of max(y, 0): y + eps * ln(1 + exp(-y / eps)).
template <typename Scalar>
Scalar smooth_plus(Scalar y, Scalar epsilon) {
  const Scalar z = y / epsilon;
  if (z >= Scalar(0)) return y + epsilon * std::log1p(std::exp(-z));
  return epsilon * std::log1p(std::exp(z));
}

/// Logistic function 1 / (1 + exp(-z)).
template <typename Scalar>
Scalar logistic(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// d/dy smooth_plus(y, eps) = logistic(y / eps).
template <typename Scalar>
Scalar smooth_plus_deriv(Scalar y, Scalar epsilon) {
  return logistic(y / epsilon);
}

/// The (value, derivative) pair that replaces max(., 0) in the risk functionals.
template <typename Scalar>
struct SoftplusRegret {
  Scalar epsilon;

  Scalar value(Scalar y) const { return smooth_plus(y, epsilon); }
  Scalar deriv(Scalar y) const { return smooth_plus_deriv(y, epsilon); }
};

struct Expectation {};
struct SmoothedCVaR {
  double beta;
  double epsilon;
};

/// Risk functional applied to the random cost.
struct RiskSpec {
  std::variant<Expectation, SmoothedCVaR> kind;

  static RiskSpec expectation() { return RiskSpec{Expectation{}}; }
  static RiskSpec smoothed_cvar(double beta, double epsilon) {
    if (!(beta >= 0 && beta < 1)) throw std::invalid_argument("RiskSpec: beta must lie in [0, 1)");
    if (!(epsilon > 0)) throw std::invalid_argument("RiskSpec: epsilon must be positive");
    return RiskSpec{SmoothedCVaR{beta, epsilon}};
  }
  bool is_expectation() const { return std::holds_alternative<Expectation>(kind); }
};

namespace detail {

template <typename Derived>
std::vector<typename Derived::Scalar> sorted_copy(const Eigen::DenseBase<Derived>& values) {
  std::vector<typename Derived::Scalar> v(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) v[i] = values(i);
  std::sort(v.begin(), v.end());
  return v;
}

template <typename Scalar>
void check_level(Scalar beta, Eigen::Index n) {
  if (n == 0) throw std::invalid_argument("risk: empty value list");
  if (!(beta >= Scalar(0) && beta < Scalar(1))) throw std::invalid_argument("risk: beta must lie in [0, 1)");
}

}  // namespace detail

/// Empirical beta-quantile inf{t : F_N(t) >= beta}: the ceil(beta N)-th order
/// statistic (1-indexed, at least the first).
template <typename Derived>
typename Derived::Scalar var_empirical(const Eigen::DenseBase<Derived>& values, typename Derived::Scalar beta) {
  using Scalar = typename Derived::Scalar;
  detail::check_level(beta, values.size());
  const auto sorted = detail::sorted_copy(values);
  const auto n = static_cast<Scalar>(sorted.size());
  // beta * N is often meant to be an integer; absorb the rounding of the product.
  const Scalar scaled = beta * n * (Scalar(1) - Scalar(4) * std::numeric_limits<Scalar>::epsilon());
  auto k = static_cast<std::size_t>(std::ceil(scaled));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

/// Empirical CVaR via the dual objective t + mean((v - t)_+) / (1 - beta),
/// minimized exactly over the order statistics.
template <typename Derived>
typename Derived::Scalar cvar_empirical(const Eigen::DenseBase<Derived>& values, typename Derived::Scalar beta) {
  using Scalar = typename Derived::Scalar;
  detail::check_level(beta, values.size());
  const auto sorted = detail::sorted_copy(values);
  const std::size_t n = sorted.size();
  std::vector<Scalar> suffix(n + 1, Scalar(0));
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + sorted[i];

  const Scalar scale = Scalar(1) / ((Scalar(1) - beta) * static_cast<Scalar>(n));
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const Scalar t = sorted[j];
    // Values at index >= j exceed or equal t; the rest contribute nothing.
    const Scalar excess = suffix[j] - static_cast<Scalar>(n - j) * t;
    best = std::min(best, t + scale * excess);
  }
  return best;
}

/// Root of mean(logistic((v_i - t) / eps)) = 1 - beta by bisection.
///
/// The left side is continuous and strictly decreasing in t; the bracket
/// [min(v) - eps B, max(v) + eps B] with B = ln(N / min(beta, 1 - beta)) has a
/// sign change. tol <= 0 bisects to machine precision.
template <typename Derived>
typename Derived::Scalar quantile_solve(const Eigen::DenseBase<Derived>& values, typename Derived::Scalar beta,
                                        typename Derived::Scalar epsilon, typename Derived::Scalar tol = 0) {
  using Scalar = typename Derived::Scalar;
  if (values.size() == 0) throw std::invalid_argument("quantile_solve: empty value list");
  if (!(beta > Scalar(0) && beta < Scalar(1))) throw std::invalid_argument("quantile_solve: beta must lie in (0, 1)");
  if (!(epsilon > Scalar(0))) throw std::invalid_argument("quantile_solve: epsilon must be positive");

  const auto n = static_cast<Scalar>(values.size());
  const Scalar target = Scalar(1) - beta;
  const auto excess_mass = [&](Scalar t) {
    Scalar sum = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i) sum += logistic((values(i) - t) / epsilon);
    return sum / n - target;
  };

  const Scalar bracket = epsilon * std::log(n / std::min(beta, Scalar(1) - beta));
  Scalar lo = values.minCoeff() - bracket;
  Scalar hi = values.maxCoeff() + bracket;
  for (int it = 0; it < 2200; ++it) {
    const Scalar mid = lo + (hi - lo) / Scalar(2);
    if (mid <= lo || mid >= hi || hi - lo <= tol) break;
    const Scalar f = excess_mass(mid);
    if (f == Scalar(0)) return mid;
    if (f > Scalar(0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Both ends are within one ulp; return the one with the smaller residual.
  return std::abs(excess_mass(lo)) <= std::abs(excess_mass(hi)) ? lo : hi;
}

/// Smoothed CVaR: t* + mean((v - t*)_+^eps) / (1 - beta) with t* from quantile_solve.
template <typename Derived>
typename Derived::Scalar smoothed_cvar(const Eigen::DenseBase<Derived>& values, typename Derived::Scalar beta,
                                       typename Derived::Scalar epsilon) {
  using Scalar = typename Derived::Scalar;
  const Scalar t = quantile_solve(values, beta, epsilon);
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) sum += smooth_plus(values(i) - t, epsilon);
  return t + sum / (static_cast<Scalar>(values.size()) * (Scalar(1) - beta));
}

/// Smoothed CVaR objective over (x, t): per-sample value
/// t + (f(x; xi) - t)_+^eps / (1 - beta). The last coordinate is t.
struct ExtendedProblem {
  StochasticProblem base;
  double beta = 0.0;
  double epsilon = 0.0;

  Eigen::Index dim() const { return base.dim + 1; }
  /// The extended objective as a plain problem on R^(n+1).
  StochasticProblem as_problem() const;
};

ExtendedProblem extend_problem(const StochasticProblem& base, double beta, double epsilon);

}  // namespace adasample

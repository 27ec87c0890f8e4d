#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>

#include "adasample/geometry.hpp"
#include "adasample/stochastic_model.hpp"

namespace adasample {

/// Frozen coefficients of the separable quadratic
/// f(x; xi) = sum_l a_l (x_l - b_l xi_l)^2, xi_l ~ Unif(0, 1), on x >= 0.
struct BasicExample {
  Eigen::VectorXd a;  // Unif(1, 2)
  Eigen::VectorXd b;  // Unif(-1, 1)
  std::uint64_t seed = 0;
};

/// Frozen market model xi = A + B u, u ~ N(0, I), with loss f(x; xi) = -<xi, x>
/// over {x >= 0, sum x = 1, <A, x> >= return_threshold}.
struct PortfolioProblem {
  Eigen::VectorXd A;  // Unif(0.9, 1.2)
  Eigen::MatrixXd B;  // Unif(0, 0.1)
  double return_threshold = 1.05;
  /// Seed requested by the caller.
  std::uint64_t seed = 0;
  /// Seed actually used after redraws for a feasible return constraint.
  std::uint64_t generation_seed = 0;
  int redraws = 0;
};

/// Smooth scalar equality constraint G(x) = 0.
struct EqualityConstraint {
  std::function<double(const ConstVectorRef&)> value;
  std::function<Eigen::VectorXd(const ConstVectorRef&)> gradient;
};

/// Linear cost with Gaussian noise on the unit sphere:
/// f(x; xi) = <c + xi, x>, xi ~ N(0, sigma^2 I), G(x) = ||x||^2 - 1.
struct SphereExample {
  Eigen::VectorXd c;
  double sigma = 0.5;
  std::uint64_t seed = 0;
};

template <typename Params>
struct ProblemInstance {
  Params params;
  StochasticProblem problem;
  ConstraintSetd set;
};

struct SphereInstance {
  SphereExample params;
  StochasticProblem problem;
  EqualityConstraint constraint;
};

inline constexpr Eigen::Index kBasicDim = 20;
inline constexpr Eigen::Index kPortfolioDim = 100;

/// Componentwise max(0, b_l / 2), the minimizer of the basic example.
Eigen::VectorXd basic_optimum(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

BasicExample draw_basic_parameters(std::uint64_t seed, Eigen::Index dim = kBasicDim);
ProblemInstance<BasicExample> make_basic_example(const BasicExample& params);
ProblemInstance<BasicExample> make_basic_example(std::uint64_t seed);

PortfolioProblem draw_portfolio_parameters(std::uint64_t seed, Eigen::Index dim = kPortfolioDim,
                                           double return_threshold = 1.05);
ProblemInstance<PortfolioProblem> make_portfolio(const PortfolioProblem& params);
ProblemInstance<PortfolioProblem> make_portfolio(std::uint64_t seed);

SphereExample draw_sphere_parameters(std::uint64_t seed, Eigen::Index dim = 5, double sigma = 0.5);
SphereInstance make_sphere_example(const SphereExample& params);
SphereInstance make_sphere_example(std::uint64_t seed);

/// Flat parameter table: one "name,index,value" row per scalar, matrices in
/// row-major order, values printed with round-trip precision.
using ParameterTable = std::map<std::string, Eigen::MatrixXd>;

void write_parameter_table(std::ostream& os, const std::string& problem, std::uint64_t seed,
                           const ParameterTable& table);
/// Parses a table written by write_parameter_table; returns the problem name.
std::string read_parameter_table(std::istream& is, std::uint64_t& seed, ParameterTable& table);

ParameterTable to_table(const BasicExample& p);
ParameterTable to_table(const PortfolioProblem& p);
ParameterTable to_table(const SphereExample& p);
BasicExample basic_from_table(const ParameterTable& t, std::uint64_t seed);
PortfolioProblem portfolio_from_table(const ParameterTable& t, std::uint64_t seed);
SphereExample sphere_from_table(const ParameterTable& t, std::uint64_t seed);

}  // namespace adasample

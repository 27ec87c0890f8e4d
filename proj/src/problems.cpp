#include "adasample/problems.hpp"

#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "adasample/random.hpp"
#include "adasample/text_format.hpp"

namespace adasample {

namespace {

// Stream iteration tags so each problem family draws from its own parameter stream.
constexpr std::uint32_t kBasicTag = 1;
constexpr std::uint32_t kPortfolioTag = 2;
constexpr std::uint32_t kSphereTag = 3;

}  // namespace

Eigen::VectorXd basic_optimum(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("basic_optimum: a and b differ in length");
  return (0.5 * b).cwiseMax(0.0);
}

BasicExample draw_basic_parameters(std::uint64_t seed, Eigen::Index dim) {
  CounterStream stream(seed, StreamDomain::kParameters, kBasicTag, 0);
  BasicExample p;
  p.seed = seed;
  p.a.resize(dim);
  p.b.resize(dim);
  for (Eigen::Index l = 0; l < dim; ++l) p.a(l) = stream.uniform(1.0, 2.0);
  for (Eigen::Index l = 0; l < dim; ++l) p.b(l) = stream.uniform(-1.0, 1.0);
  return p;
}

ProblemInstance<BasicExample> make_basic_example(const BasicExample& params) {
  if (params.a.size() != params.b.size() || params.a.size() == 0) {
    throw std::invalid_argument("make_basic_example: a and b must have equal nonzero length");
  }
  const Eigen::Index n = params.a.size();
  const Eigen::VectorXd a = params.a;
  const Eigen::VectorXd b = params.b;

  StochasticProblem p;
  p.dim = n;
  p.xi_dim = n;
  p.sample_xi = [n](CounterStream& s, VectorRef xi) {
    for (Eigen::Index l = 0; l < n; ++l) xi(l) = s.uniform();
  };
  p.eval_f = [a, b](const ConstVectorRef& x, const ConstVectorRef& xi) {
    return (a.array() * (x.array() - b.array() * xi.array()).square()).sum();
  };
  p.eval_grad = [a, b](const ConstVectorRef& x, const ConstVectorRef& xi, VectorRef g) {
    g = (2.0 * a.array() * (x.array() - b.array() * xi.array())).matrix();
  };
  p.known_optimum = basic_optimum(a, b);
  // E[f(x*)] = sum a_l (x*_l^2 - x*_l b_l + b_l^2 / 3) with E xi = 1/2, E xi^2 = 1/3.
  const Eigen::ArrayXd xs = p.known_optimum->array();
  p.known_optimal_value = (a.array() * (xs.square() - xs * b.array() + b.array().square() / 3.0)).sum();

  return {params, std::move(p), ConstraintSetd::non_negative_orthant(n)};
}

ProblemInstance<BasicExample> make_basic_example(std::uint64_t seed) {
  return make_basic_example(draw_basic_parameters(seed));
}

PortfolioProblem draw_portfolio_parameters(std::uint64_t seed, Eigen::Index dim, double return_threshold) {
  PortfolioProblem p;
  p.seed = seed;
  p.return_threshold = return_threshold;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const std::uint64_t gen_seed = seed + static_cast<std::uint64_t>(attempt);
    CounterStream stream(gen_seed, StreamDomain::kParameters, kPortfolioTag, 0);
    p.A.resize(dim);
    p.B.resize(dim, dim);
    for (Eigen::Index l = 0; l < dim; ++l) p.A(l) = stream.uniform(0.9, 1.2);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) p.B(i, j) = stream.uniform(0.0, 0.1);
    }
    p.generation_seed = gen_seed;
    p.redraws = attempt;
    // The best single asset is a feasibility witness for the return constraint.
    if (p.A.maxCoeff() >= return_threshold) return p;
  }
  throw std::runtime_error("draw_portfolio_parameters: no feasible draw found");
}

ProblemInstance<PortfolioProblem> make_portfolio(const PortfolioProblem& params) {
  const Eigen::Index n = params.A.size();
  if (n == 0 || params.B.rows() != n || params.B.cols() != n) {
    throw std::invalid_argument("make_portfolio: A must be n and B n x n");
  }
  if (params.A.maxCoeff() < params.return_threshold) {
    throw std::invalid_argument("make_portfolio: return constraint is infeasible for this A");
  }
  const Eigen::VectorXd A = params.A;
  const Eigen::MatrixXd B = params.B;

  StochasticProblem p;
  p.dim = n;
  p.xi_dim = n;
  p.sample_xi = [A, B, n](CounterStream& s, VectorRef xi) {
    thread_local Eigen::VectorXd u;
    u.resize(n);
    for (Eigen::Index l = 0; l < n; ++l) u(l) = s.normal();
    xi = A;
    xi.noalias() += B * u;
  };
  p.eval_f = [](const ConstVectorRef& x, const ConstVectorRef& xi) { return -xi.dot(x); };
  p.eval_grad = [](const ConstVectorRef&, const ConstVectorRef& xi, VectorRef g) { g = -xi; };

  // Simplex first, return halfspace second; Dykstra handles the pair.
  auto set = ConstraintSetd::intersection(
      {ConstraintSetd::unit_simplex(n), ConstraintSetd::halfspace(A, params.return_threshold)});
  return {params, std::move(p), std::move(set)};
}

ProblemInstance<PortfolioProblem> make_portfolio(std::uint64_t seed) {
  return make_portfolio(draw_portfolio_parameters(seed));
}

SphereExample draw_sphere_parameters(std::uint64_t seed, Eigen::Index dim, double sigma) {
  CounterStream stream(seed, StreamDomain::kParameters, kSphereTag, 0);
  SphereExample p;
  p.seed = seed;
  p.sigma = sigma;
  p.c.resize(dim);
  for (Eigen::Index l = 0; l < dim; ++l) p.c(l) = stream.normal();
  return p;
}

SphereInstance make_sphere_example(const SphereExample& params) {
  const Eigen::Index n = params.c.size();
  if (n == 0 || !(params.c.squaredNorm() > 0)) throw std::invalid_argument("make_sphere_example: c must be nonzero");
  const Eigen::VectorXd c = params.c;
  const double sigma = params.sigma;

  StochasticProblem p;
  p.dim = n;
  p.xi_dim = n;
  p.sample_xi = [n, sigma](CounterStream& s, VectorRef xi) {
    for (Eigen::Index l = 0; l < n; ++l) xi(l) = sigma * s.normal();
  };
  p.eval_f = [c](const ConstVectorRef& x, const ConstVectorRef& xi) { return (c + xi).dot(x); };
  p.eval_grad = [c](const ConstVectorRef&, const ConstVectorRef& xi, VectorRef g) { g = c + xi; };
  p.known_optimum = Eigen::VectorXd(-c / c.norm());
  p.known_optimal_value = -c.norm();

  EqualityConstraint g;
  g.value = [](const ConstVectorRef& x) { return x.squaredNorm() - 1.0; };
  g.gradient = [](const ConstVectorRef& x) { return Eigen::VectorXd(2.0 * x); };
  return {params, std::move(p), std::move(g)};
}

SphereInstance make_sphere_example(std::uint64_t seed) { return make_sphere_example(draw_sphere_parameters(seed)); }

void write_parameter_table(std::ostream& os, const std::string& problem, std::uint64_t seed,
                           const ParameterTable& table) {
  os << "# problem " << problem << '\n';
  os << "# seed " << seed << '\n';
  for (const auto& [name, m] : table) os << "# shape " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  os << "name,index,value\n";
  for (const auto& [name, m] : table) {
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << name << ',' << k++ << ',' << format_double(m(i, j)) << '\n';
    }
  }
}

std::string read_parameter_table(std::istream& is, std::uint64_t& seed, ParameterTable& table) {
  std::string problem;
  std::string line;
  bool header_seen = false;
  table.clear();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "problem") {
        ls >> problem;
      } else if (key == "seed") {
        ls >> seed;
      } else if (key == "shape") {
        std::string name;
        Eigen::Index rows = 0, cols = 0;
        if (!(ls >> name >> rows >> cols) || rows < 0 || cols < 0) {
          throw std::invalid_argument("parameter table: malformed shape line");
        }
        table[name] = Eigen::MatrixXd::Constant(rows, cols, std::numeric_limits<double>::quiet_NaN());
      }
      continue;
    }
    if (!header_seen) {
      if (line != "name,index,value") throw std::invalid_argument("parameter table: missing header");
      header_seen = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::invalid_argument("parameter table: malformed row '" + line + "'");
    }
    const std::string name = line.substr(0, c1);
    const auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("parameter table: no shape for '" + name + "'");
    const auto index = static_cast<Eigen::Index>(parse_double(line.substr(c1 + 1, c2 - c1 - 1)));
    auto& m = it->second;
    if (index < 0 || index >= m.size()) throw std::invalid_argument("parameter table: index out of range");
    m(index / m.cols(), index % m.cols()) = parse_double(line.substr(c2 + 1));
  }
  for (const auto& [name, m] : table) {
    if (m.hasNaN()) throw std::invalid_argument("parameter table: missing entries for '" + name + "'");
  }
  if (problem.empty()) throw std::invalid_argument("parameter table: missing problem line");
  return problem;
}

namespace {

const Eigen::MatrixXd& lookup(const ParameterTable& t, const std::string& name) {
  const auto it = t.find(name);
  if (it == t.end()) throw std::invalid_argument("parameter table: missing '" + name + "'");
  return it->second;
}

Eigen::VectorXd as_vector(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd row_major = m.transpose();
  return Eigen::Map<const Eigen::VectorXd>(row_major.data(), row_major.size());
}

}  // namespace

ParameterTable to_table(const BasicExample& p) { return {{"a", p.a}, {"b", p.b}}; }

ParameterTable to_table(const PortfolioProblem& p) {
  return {{"A", p.A},
          {"B", p.B},
          {"return_threshold", Eigen::MatrixXd::Constant(1, 1, p.return_threshold)},
          {"generation_seed", Eigen::MatrixXd::Constant(1, 1, static_cast<double>(p.generation_seed))}};
}

ParameterTable to_table(const SphereExample& p) {
  return {{"c", p.c}, {"sigma", Eigen::MatrixXd::Constant(1, 1, p.sigma)}};
}

BasicExample basic_from_table(const ParameterTable& t, std::uint64_t seed) {
  return BasicExample{as_vector(lookup(t, "a")), as_vector(lookup(t, "b")), seed};
}

PortfolioProblem portfolio_from_table(const ParameterTable& t, std::uint64_t seed) {
  PortfolioProblem p;
  p.A = as_vector(lookup(t, "A"));
  p.B = lookup(t, "B");
  p.return_threshold = lookup(t, "return_threshold")(0, 0);
  p.seed = seed;
  const auto gs = t.find("generation_seed");
  p.generation_seed = gs == t.end() ? seed : static_cast<std::uint64_t>(gs->second(0, 0));
  p.redraws = static_cast<int>(p.generation_seed - seed);
  return p;
}

SphereExample sphere_from_table(const ParameterTable& t, std::uint64_t seed) {
  return SphereExample{as_vector(lookup(t, "c")), lookup(t, "sigma")(0, 0), seed};
}

}  // namespace adasample

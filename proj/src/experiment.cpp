#include "adasample/experiment.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "adasample/algorithms.hpp"
#include "adasample/problems.hpp"
#include "adasample/text_format.hpp"

namespace adasample {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  if (problem != "basic" && problem != "portfolio" && problem != "sphere") {
    throw ConfigError("problem", "expected basic, portfolio or sphere, got '" + problem + "'");
  }
  const bool known_algorithm = algorithm == "spgd" || algorithm == "spgd-fixed" || algorithm == "sqp" ||
                               algorithm == "cvar-extended" || algorithm == "cvar-nested";
  if (!known_algorithm) throw ConfigError("algorithm", "unknown algorithm '" + algorithm + "'");
  if (!(alpha > 0)) throw ConfigError("alpha", "must be positive");
  if (!(theta > 0)) throw ConfigError("theta", "must be positive");
  if (!(epsilon > 0)) throw ConfigError("epsilon", "must be positive");
  if (max_iters < 0) throw ConfigError("max-iters", "must be non-negative");
  if (s0 < 2) throw ConfigError("s0", "must be at least 2");
  if (max_sample_size < s0) throw ConfigError("max-sample-size", "must be at least s0");
  if (max_sample_size > 0xFFFFFFFFLL) throw ConfigError("max-sample-size", "must fit in 32 bits");
  if (fixed_sample_size && *fixed_sample_size < 1) throw ConfigError("fixed-sample-size", "must be at least 1");
  if (fixed_sample_size && algorithm != "spgd-fixed") {
    throw ConfigError("fixed-sample-size", "only meaningful with --algorithm spgd-fixed");
  }
  if (!(stationarity_tol >= 0)) throw ConfigError("stationarity-tol", "must be non-negative");

  const bool cvar = algorithm == "cvar-extended" || algorithm == "cvar-nested";
  if (cvar && !(beta > 0 && beta < 1)) throw ConfigError("beta", "cvar algorithms need 0 < beta < 1");
  if (!cvar && beta != 0.0) throw ConfigError("beta", "only the cvar algorithms accept a nonzero beta");
  if (algorithm == "sqp" && problem != "sphere") {
    throw ConfigError("algorithm", "sqp needs an equality-constrained problem (sphere)");
  }
  if (problem == "sphere" && algorithm != "sqp") {
    throw ConfigError("problem", "the sphere problem is defined by an equality constraint; use --algorithm sqp");
  }
}

std::string ExperimentConfig::resolved_output_path() const {
  if (!output_path.empty()) return output_path;
  fs::path dir = ".";
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') dir = env;
  return (dir / (problem + "_" + algorithm + "_seed" + std::to_string(seed) + ".csv")).string();
}

namespace {

nlohmann::json table_to_json(const ParameterTable& table) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, m] : table) {
    std::vector<double> flat;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    }
    j[name] = {{"rows", m.rows()}, {"cols", m.cols()}, {"values", flat}};
  }
  return j;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j = {{"problem", c.problem},
                      {"algorithm", c.algorithm},
                      {"alpha", c.alpha},
                      {"theta", c.theta},
                      {"beta", c.beta},
                      {"epsilon", c.epsilon},
                      {"s0", c.s0},
                      {"max_iters", c.max_iters},
                      {"seed", c.seed},
                      {"max_sample_size", c.max_sample_size},
                      {"stationarity_tol", c.stationarity_tol}};
  j["fixed_sample_size"] = c.fixed_sample_size ? nlohmann::json(*c.fixed_sample_size) : nlohmann::json(nullptr);
  j["gradient_eval_budget"] =
      c.gradient_eval_budget ? nlohmann::json(*c.gradient_eval_budget) : nlohmann::json(nullptr);
  j["x0"] = c.x0 ? nlohmann::json(*c.x0) : nlohmann::json(nullptr);
  j["params_path"] = c.params_path;
  return j;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Reads cfg.params_path; `seed` receives the seed recorded in the file.
ParameterTable load_table(const ExperimentConfig& cfg, std::uint64_t& seed) {
  std::ifstream in(cfg.params_path);
  if (!in) throw ConfigError("params", "cannot open '" + cfg.params_path + "'");
  ParameterTable table;
  seed = cfg.seed;
  const std::string problem = read_parameter_table(in, seed, table);
  if (problem != cfg.problem) {
    throw ConfigError("params", "file holds parameters for '" + problem + "', not '" + cfg.problem + "'");
  }
  return table;
}

OptimizerConfig optimizer_config(const ExperimentConfig& cfg) {
  OptimizerConfig opt;
  opt.alpha = cfg.alpha;
  opt.max_iters = cfg.max_iters;
  opt.seed = cfg.seed;
  opt.test.theta = cfg.theta;
  opt.test.max_sample_size = cfg.max_sample_size;
  opt.test.stationarity_tol = cfg.stationarity_tol;
  opt.gradient_eval_budget = cfg.gradient_eval_budget;
  opt.record_timing = cfg.record_timing;
  opt.initial_sample_size = cfg.s0;
  if (cfg.algorithm == "spgd-fixed") {
    opt.adaptive = false;
    opt.initial_sample_size = cfg.fixed_sample_size.value_or(cfg.s0);
  }
  return opt;
}

RunLog run_on_set(const ExperimentConfig& cfg, const StochasticProblem& problem, const ConstraintSetd& set,
                  const Eigen::VectorXd& x0) {
  const OptimizerConfig opt = optimizer_config(cfg);
  if (cfg.algorithm == "cvar-extended") return run_cvar_extended(problem, set, x0, cfg.beta, cfg.epsilon, opt);
  if (cfg.algorithm == "cvar-nested") return run_nested_quantile(problem, set, x0, cfg.beta, cfg.epsilon, opt);
  return run_spgd_adaptive(problem, set, x0, opt);
}

}  // namespace

void export_parameters(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (cfg.problem == "basic") {
    write_parameter_table(out, "basic", cfg.seed, to_table(draw_basic_parameters(cfg.seed)));
  } else if (cfg.problem == "portfolio") {
    write_parameter_table(out, "portfolio", cfg.seed, to_table(draw_portfolio_parameters(cfg.seed)));
  } else if (cfg.problem == "sphere") {
    write_parameter_table(out, "sphere", cfg.seed, to_table(draw_sphere_parameters(cfg.seed)));
  } else {
    throw ConfigError("problem", "unknown problem '" + cfg.problem + "'");
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const bool from_file = !cfg.params_path.empty();
  std::uint64_t file_seed = cfg.seed;
  ParameterTable table;
  if (from_file) table = load_table(cfg, file_seed);

  ExperimentResult result;
  nlohmann::json meta;
  meta["config"] = config_to_json(cfg);

  if (cfg.problem == "basic") {
    const BasicExample params = from_file ? basic_from_table(table, file_seed) : draw_basic_parameters(cfg.seed);
    const auto inst = make_basic_example(params);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(inst.problem.dim, cfg.x0.value_or(1.0));
    result.log = run_on_set(cfg, inst.problem, inst.set, x0);
    meta["parameters"] = table_to_json(to_table(params));
    meta["known_optimum"] = to_std(*inst.problem.known_optimum);
  } else if (cfg.problem == "portfolio") {
    const PortfolioProblem params =
        from_file ? portfolio_from_table(table, file_seed) : draw_portfolio_parameters(cfg.seed);
    const auto inst = make_portfolio(params);
    const double fill = cfg.x0.value_or(1.0 / static_cast<double>(inst.problem.dim));
    result.log = run_on_set(cfg, inst.problem, inst.set, Eigen::VectorXd::Constant(inst.problem.dim, fill));
    meta["parameters"] = table_to_json(to_table(params));
    meta["generation_seed"] = params.generation_seed;
    meta["redraws"] = params.redraws;
  } else {
    const SphereExample params = from_file ? sphere_from_table(table, file_seed) : draw_sphere_parameters(cfg.seed);
    const auto inst = make_sphere_example(params);
    const auto n = static_cast<double>(inst.problem.dim);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(inst.problem.dim, cfg.x0.value_or(1.0 / std::sqrt(n)));
    result.log = run_sqp_adaptive(inst.problem, inst.constraint, x0, optimizer_config(cfg));
    meta["parameters"] = table_to_json(to_table(params));
    meta["known_optimum"] = to_std(*inst.problem.known_optimum);
    meta["final_constraint_value"] = inst.constraint.value(result.log.final_x);
  }

  meta["status"] = to_string(result.log.status);
  meta["iterations"] = result.log.records.size();
  meta["final_x"] = to_std(result.log.final_x);
  meta["initial_t"] = result.log.initial_t ? nlohmann::json(*result.log.initial_t) : nlohmann::json(nullptr);
  meta["final_t"] = result.log.final_t ? nlohmann::json(*result.log.final_t) : nlohmann::json(nullptr);

  result.csv_path = cfg.resolved_output_path();
  result.metadata_path = result.csv_path + ".meta.json";
  if (const auto parent = fs::path(result.csv_path).parent_path(); !parent.empty()) fs::create_directories(parent);

  std::ofstream csv(result.csv_path);
  if (!csv) throw std::runtime_error("cannot write " + result.csv_path);
  write_run_csv(csv, result.log.records);
  std::ofstream side(result.metadata_path);
  if (!side) throw std::runtime_error("cannot write " + result.metadata_path);
  side << meta.dump(2) << '\n';
  return result;
}

}  // namespace adasample

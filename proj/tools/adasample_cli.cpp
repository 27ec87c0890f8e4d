// adasample: run adaptive-sampling experiments, compare run logs, export
// frozen problem parameters and estimate descent-condition quantities.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "adasample/adaptive_tests.hpp"
#include "adasample/experiment.hpp"
#include "adasample/problems.hpp"
#include "adasample/run_log.hpp"

namespace {

using adasample::ExperimentConfig;

void add_run_options(CLI::App& run, ExperimentConfig& cfg, std::string& fixed_text, std::string& budget_text,
                     std::string& x0_text) {
  run.add_option("--problem", cfg.problem, "basic | portfolio | sphere")->capture_default_str();
  run.add_option("--algorithm", cfg.algorithm, "spgd | spgd-fixed | sqp | cvar-extended | cvar-nested")
      ->capture_default_str();
  run.add_option("--alpha", cfg.alpha, "step size")->capture_default_str();
  run.add_option("--theta", cfg.theta, "norm-test parameter")->capture_default_str();
  run.add_option("--beta", cfg.beta, "CVaR level (cvar-* only)")->capture_default_str();
  run.add_option("--epsilon", cfg.epsilon, "smoothing width")->capture_default_str();
  run.add_option("--s0", cfg.s0, "initial sample size")->capture_default_str();
  run.add_option("--max-iters", cfg.max_iters, "iteration limit")->capture_default_str();
  run.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  run.add_option("--max-sample-size", cfg.max_sample_size, "cap on |S_k|")->capture_default_str();
  run.add_option("--fixed-sample-size", fixed_text, "sample size for spgd-fixed");
  run.add_option("--budget", budget_text, "stop after this many gradient evaluations");
  run.add_option("--stationarity-tol", cfg.stationarity_tol)->capture_default_str();
  run.add_option("--x0", x0_text, "constant fill of the starting point");
  run.add_option("--params", cfg.params_path, "load frozen parameters written by 'params'");
  run.add_option("--output", cfg.output_path, std::string("CSV path (default: $") + adasample::kOutputDirEnv +
                                                   "/<problem>_<algorithm>_seed<seed>.csv)");
  run.add_flag("--timing", cfg.record_timing, "fill the wall_time_ms column");
}

template <typename T>
std::optional<T> parse_optional(const std::string& text, const std::string& field) {
  if (text.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    T value{};
    if constexpr (std::is_floating_point_v<T>) value = std::stod(text, &used);
    else value = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw adasample::ConfigError(field, "cannot parse '" + text + "'");
  }
}

int run_command(ExperimentConfig cfg, const std::string& fixed_text, const std::string& budget_text,
                const std::string& x0_text) {
  cfg.fixed_sample_size = parse_optional<std::int64_t>(fixed_text, "fixed-sample-size");
  cfg.gradient_eval_budget = parse_optional<std::int64_t>(budget_text, "budget");
  cfg.x0 = parse_optional<double>(x0_text, "x0");
  const auto result = adasample::run_experiment(cfg);
  std::cout << "wrote " << result.csv_path << " (" << result.log.records.size() << " iterations, "
            << adasample::to_string(result.log.status) << ")\n";
  return EXIT_SUCCESS;
}

// CLI11 only reads config files attached to the root app, so `run --config FILE`
// is expanded here: the file's entries become flags placed before the user's own,
// and take-last lets the command line override them.
std::vector<std::string> expand_run_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args.front() != "run") return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigTOML().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty()) throw CLI::ConfigError("run --config: sections are not supported (" + item.fullname() + ")");
    if (item.inputs.size() == 1 && (item.inputs.front() == "true" || item.inputs.front() == "false")) {
      if (item.inputs.front() == "true") injected.push_back("--" + item.name);
      continue;
    }
    for (const auto& value : item.inputs) {
      injected.push_back("--" + item.name);
      injected.push_back(value);
    }
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-sampling stochastic optimization experiments"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string fixed_text, budget_text, x0_text;
  auto* run = app.add_subcommand("run", "run one experiment and write its CSV log");
  run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  run->add_option("--config", config_path, "key = value configuration file; flags override it");
  add_run_options(*run, cfg, fixed_text, budget_text, x0_text);

  std::string csv_a, csv_b, report_path;
  double rel_tol = 0.02;
  std::string error_tol_text;
  auto* compare = app.add_subcommand("compare", "align two run logs by gradient evaluations");
  compare->add_option("csv_a", csv_a)->required();
  compare->add_option("csv_b", csv_b)->required();
  compare->add_option("--rel-tol", rel_tol, "relative tolerance on the final objective")->capture_default_str();
  compare->add_option("--error-tol", error_tol_text, "absolute tolerance on the final error_norm");
  compare->add_option("--report", report_path, "write the comparison table here instead of stdout");

  ExperimentConfig pcfg;
  std::string params_out;
  auto* params = app.add_subcommand("params", "export the frozen parameters of a problem");
  params->add_option("--problem", pcfg.problem)->capture_default_str();
  params->add_option("--seed", pcfg.seed)->capture_default_str();
  params->add_option("--output", params_out)->required();

  std::uint64_t dseed = 42;
  double dfill = 1.0;
  adasample::DiagnosticOptions dopts;
  std::string diag_out;
  auto* diagnose = app.add_subcommand("diagnose", "estimate descent-condition quantities on the basic example");
  diagnose->add_option("--seed", dseed)->capture_default_str();
  diagnose->add_option("--x0", dfill, "constant fill of the evaluation point")->capture_default_str();
  diagnose->add_option("--sample-size", dopts.sample_size)->capture_default_str();
  diagnose->add_option("--resamples", dopts.resamples)->capture_default_str();
  diagnose->add_option("--reference-size", dopts.reference_size)->capture_default_str();
  diagnose->add_option("--alpha", dopts.alpha)->capture_default_str();
  diagnose->add_option("--output", diag_out);

  try {
    auto args = expand_run_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return run_command(cfg, fixed_text, budget_text, x0_text);

    if (*compare) {
      adasample::CompareTolerances tol{rel_tol, parse_optional<double>(error_tol_text, "error-tol")};
      const auto rep = adasample::compare_runs(csv_a, csv_b, tol);
      if (report_path.empty()) {
        rep.write(std::cout);
      } else {
        std::ofstream os(report_path);
        rep.write(os);
      }
      return rep.passed ? EXIT_SUCCESS : 2;
    }

    if (*params) {
      adasample::export_parameters(pcfg, params_out);
      return EXIT_SUCCESS;
    }

    if (*diagnose) {
      const auto inst = adasample::make_basic_example(dseed);
      dopts.seed = dseed;
      const Eigen::VectorXd x = Eigen::VectorXd::Constant(inst.problem.dim, dfill);
      const auto rep = adasample::condition_diagnostic(inst.problem, inst.set, x, dopts);
      if (diag_out.empty()) {
        rep.write_csv(std::cout);
      } else {
        std::ofstream os(diag_out);
        rep.write_csv(os);
      }
      return EXIT_SUCCESS;
    }
  } catch (const adasample::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return EXIT_FAILURE;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return EXIT_FAILURE;
}

#include "adasample/run_log.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "adasample/text_format.hpp"

namespace adasample {

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kMaxIterations:
      return "max-iterations";
    case RunStatus::kStationary:
      return "stationary";
    case RunStatus::kGradientBudget:
      return "gradient-budget";
    case RunStatus::kSampleBudgetExhausted:
      return "sample-budget-exhausted";
  }
  return "unknown";
}

namespace {

void put_optional(std::ostream& os, const std::optional<double>& v) {
  if (v) os << format_double(*v);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ls(line);
  while (std::getline(ls, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

std::int64_t parse_count(const std::string& s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  return v;
}

}  // namespace

void write_run_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << kRunCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.iteration << ',' << r.sample_size << ',' << r.cumulative_grad_evals << ','
       << format_double(r.objective_estimate) << ',';
    put_optional(os, r.error_norm);
    os << ',';
    put_optional(os, r.rho);
    os << ',';
    put_optional(os, r.t_aux);
    os << ',';
    put_optional(os, r.wall_time_ms);
    os << '\n';
  }
}

std::vector<RunRecord> read_run_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("run CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunCsvHeader) throw std::invalid_argument("run CSV: schema mismatch in header '" + line + "'");

  std::vector<RunRecord> records;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 8) throw std::invalid_argument("run CSV: expected 8 fields in '" + line + "'");
    RunRecord r;
    r.iteration = parse_count(f[0]);
    r.sample_size = parse_count(f[1]);
    r.cumulative_grad_evals = parse_count(f[2]);
    r.objective_estimate = parse_double(f[3]);
    r.error_norm = parse_optional(f[4]);
    r.rho = parse_optional(f[5]);
    r.t_aux = parse_optional(f[6]);
    r.wall_time_ms = parse_optional(f[7]);
    records.push_back(r);
  }
  return records;
}

namespace {

std::optional<double> interpolate_objective(const std::vector<RunRecord>& run, std::int64_t evals) {
  if (run.empty() || evals < run.front().cumulative_grad_evals || evals > run.back().cumulative_grad_evals) {
    return std::nullopt;
  }
  const auto it = std::lower_bound(run.begin(), run.end(), evals,
                                   [](const RunRecord& r, std::int64_t e) { return r.cumulative_grad_evals < e; });
  if (it->cumulative_grad_evals == evals || it == run.begin()) return it->objective_estimate;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = static_cast<double>(evals - lo.cumulative_grad_evals) /
                   static_cast<double>(hi.cumulative_grad_evals - lo.cumulative_grad_evals);
  return lo.objective_estimate + w * (hi.objective_estimate - lo.objective_estimate);
}

}  // namespace

ComparisonReport compare_runs(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                              const CompareTolerances& tol) {
  if (a.empty() || b.empty()) throw std::invalid_argument("compare_runs: both runs need at least one record");
  ComparisonReport rep;
  for (const auto& r : a) rep.aligned.push_back({r.cumulative_grad_evals, r.objective_estimate,
                                                 interpolate_objective(b, r.cumulative_grad_evals)});
  rep.final_objective_a = a.back().objective_estimate;
  rep.final_objective_b = b.back().objective_estimate;
  rep.final_objective_delta = rep.final_objective_a - rep.final_objective_b;
  const double denom = std::max(std::abs(rep.final_objective_b), 1e-300);
  rep.final_objective_rel_delta = std::abs(rep.final_objective_delta) / denom;
  rep.final_error_a = a.back().error_norm;
  rep.final_error_b = b.back().error_norm;
  if (rep.final_error_a && rep.final_error_b) rep.final_error_delta = *rep.final_error_a - *rep.final_error_b;
  rep.final_sample_size_a = a.back().sample_size;
  rep.final_sample_size_b = b.back().sample_size;

  rep.passed = rep.final_objective_rel_delta <= tol.objective_rel_tol;
  if (tol.error_abs_tol && rep.final_error_delta) {
    rep.passed = rep.passed && std::abs(*rep.final_error_delta) <= *tol.error_abs_tol;
  }
  return rep;
}

ComparisonReport compare_runs(const std::string& csv_a, const std::string& csv_b, const CompareTolerances& tol) {
  std::ifstream fa(csv_a);
  if (!fa) throw std::runtime_error("cannot open " + csv_a);
  std::ifstream fb(csv_b);
  if (!fb) throw std::runtime_error("cannot open " + csv_b);
  return compare_runs(read_run_csv(fa), read_run_csv(fb), tol);
}

void ComparisonReport::write(std::ostream& os) const {
  os << "grad_evals,objective_a,objective_b_interp,delta\n";
  for (const auto& p : aligned) {
    os << p.grad_evals << ',' << format_double(p.objective_a) << ',';
    if (p.objective_b) os << format_double(*p.objective_b) << ',' << format_double(p.objective_a - *p.objective_b);
    else os << ',';
    os << '\n';
  }
  os << "\nfinal_objective_a," << format_double(final_objective_a) << '\n';
  os << "final_objective_b," << format_double(final_objective_b) << '\n';
  os << "final_objective_delta," << format_double(final_objective_delta) << '\n';
  os << "final_objective_rel_delta," << format_double(final_objective_rel_delta) << '\n';
  os << "final_error_a,";
  if (final_error_a) os << format_double(*final_error_a);
  os << "\nfinal_error_b,";
  if (final_error_b) os << format_double(*final_error_b);
  os << "\nfinal_error_delta,";
  if (final_error_delta) os << format_double(*final_error_delta);
  os << "\nfinal_sample_size_a," << final_sample_size_a << '\n';
  os << "final_sample_size_b," << final_sample_size_b << '\n';
  os << "result," << (passed ? "pass" : "fail") << '\n';
}

}  // namespace adasample

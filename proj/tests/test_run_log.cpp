#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "adasample/run_log.hpp"
#include "adasample/text_format.hpp"

using namespace adasample;

namespace {

std::vector<RunRecord> sample_records() {
  std::vector<RunRecord> out;
  std::int64_t evals = 0;
  for (int k = 0; k < 5; ++k) {
    RunRecord r;
    r.iteration = k;
    r.sample_size = 10 * (k + 1);
    evals += r.sample_size;
    r.cumulative_grad_evals = evals;
    r.objective_estimate = 1.0 / (k + 1.0) + 1e-17 * k;
    if (k % 2 == 0) r.error_norm = std::exp(-k / 3.0);
    if (k > 0) r.rho = 0.1 * k;
    r.t_aux = k == 3 ? std::optional<double>(-2.5e-300) : std::nullopt;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("double formatting round-trips") {
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
    CHECK(parse_double(format_double(v)) == v);
  }
  for (double v : {0.0, -0.0, 1e-310, std::numeric_limits<double>::max(), 0.1}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK_THROWS(parse_double("1.0x"));
  CHECK_THROWS(parse_double(""));
}

TEST_CASE("run CSV write/read") {
  const auto records = sample_records();
  std::stringstream ss;
  write_run_csv(ss, records);
  std::string header;
  std::getline(ss, header);
  CHECK(header == kRunCsvHeader);
  ss.seekg(0);
  const auto back = read_run_csv(ss);
  REQUIRE(back.size() == records.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back[k].iteration == records[k].iteration);
    CHECK(back[k].sample_size == records[k].sample_size);
    CHECK(back[k].cumulative_grad_evals == records[k].cumulative_grad_evals);
    CHECK(back[k].objective_estimate == records[k].objective_estimate);
    CHECK(back[k].error_norm == records[k].error_norm);
    CHECK(back[k].rho == records[k].rho);
    CHECK(back[k].t_aux == records[k].t_aux);
    CHECK_FALSE(back[k].wall_time_ms.has_value());
  }

  std::stringstream wrong("iteration,sample_size,objective\n0,1,2\n");
  CHECK_THROWS_AS(read_run_csv(wrong), std::invalid_argument);
  std::stringstream short_row(std::string(kRunCsvHeader) + "\n0,1,2\n");
  CHECK_THROWS_AS(read_run_csv(short_row), std::invalid_argument);
}

TEST_CASE("comparing runs") {
  const auto a = sample_records();
  SUBCASE("a run against itself") {
    const auto rep = compare_runs(a, a, {1e-12, 0.0});
    CHECK(rep.final_objective_delta == 0.0);
    CHECK(rep.final_objective_rel_delta == 0.0);
    CHECK(rep.passed);
    for (const auto& p : rep.aligned) {
      REQUIRE(p.objective_b.has_value());
      CHECK(*p.objective_b == p.objective_a);
    }
  }
  SUBCASE("interpolation in gradient evaluations") {
    std::vector<RunRecord> b(2);
    b[0].cumulative_grad_evals = 0;
    b[0].objective_estimate = 0.0;
    b[1].cumulative_grad_evals = 120;
    b[1].objective_estimate = 1.2;
    const auto rep = compare_runs(a, b, {10.0, std::nullopt});
    CHECK(*rep.aligned[0].objective_b == doctest::Approx(0.1));  // evals = 10
    CHECK(*rep.aligned[2].objective_b == doctest::Approx(0.6));  // evals = 60
    CHECK_FALSE(rep.aligned.back().objective_b.has_value());
  }
  SUBCASE("tolerance decides pass/fail") {
    auto b = a;
    b.back().objective_estimate *= 1.05;
    CHECK_FALSE(compare_runs(a, b, {0.02, std::nullopt}).passed);
    CHECK(compare_runs(a, b, {0.06, std::nullopt}).passed);
    std::ostringstream os;
    compare_runs(a, b, {0.02, std::nullopt}).write(os);
    CHECK(os.str().find("result,fail") != std::string::npos);
  }
  CHECK_THROWS_AS(compare_runs(a, std::vector<RunRecord>{}, {0.1, std::nullopt}), std::invalid_argument);
}

TEST_CASE("status names") {
  CHECK(to_string(RunStatus::kMaxIterations) == "max-iterations");
  CHECK(to_string(RunStatus::kStationary) == "stationary");
  CHECK(to_string(RunStatus::kGradientBudget) == "gradient-budget");
  CHECK(to_string(RunStatus::kSampleBudgetExhausted) == "sample-budget-exhausted");
}

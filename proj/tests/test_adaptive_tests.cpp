#include <doctest.h>

#include <random>
#include <sstream>

#include "adasample/adaptive_tests.hpp"
#include "adasample/problems.hpp"
#include "test_support.hpp"

using namespace adasample;
using Vec = Eigen::VectorXd;

namespace {

GradientStats stats_with(double variance_stat, Eigen::Index n) {
  GradientStats s;
  s.variance_stat = variance_stat;
  s.n = n;
  return s;
}

}  // namespace

TEST_CASE("norm test formula and update rule") {
  TestConfig cfg;
  cfg.theta = 0.5;
  const Vec r = Vec::Constant(3, 2.0);  // ||R||^2 = 12
  const double threshold = cfg.theta * cfg.theta * 12.0;

  auto out = norm_test(stats_with(0.0, 10), r, cfg);
  CHECK(out.rho == 0.0);
  CHECK(out.passed);
  CHECK(out.next_size == 10);

  out = norm_test(stats_with(threshold, 10), r, cfg);
  CHECK(out.rho == doctest::Approx(1.0));
  CHECK(out.passed);
  CHECK(out.next_size == 10);

  out = norm_test(stats_with(2 * threshold, 10), r, cfg);
  CHECK(out.rho == doctest::Approx(2.0));
  CHECK_FALSE(out.passed);
  CHECK(out.next_size == 20);

  out = norm_test(stats_with(1.01 * threshold, 10), r, cfg);
  CHECK(out.next_size == 11);  // ceil(10.1)
}

TEST_CASE("norm test guards") {
  TestConfig cfg;
  CHECK_THROWS_AS(norm_test(stats_with(1.0, 10), Vec::Zero(3), cfg), StationarityReached);
  CHECK_THROWS_AS(norm_test(stats_with(1.0, 10), Vec::Constant(3, 1e-10), cfg), StationarityReached);
  GradientStats single;
  single.n = 1;
  CHECK_THROWS_AS(norm_test(single, Vec::Ones(3), cfg), std::invalid_argument);

  TestConfig bad;
  bad.theta = 0;
  CHECK_THROWS(bad.validate());
  bad = TestConfig{};
  bad.min_sample_size = 1;
  CHECK_THROWS(bad.validate());
  bad = TestConfig{};
  bad.max_sample_size = 1;
  CHECK_THROWS(bad.validate());
  CHECK_NOTHROW(TestConfig{}.validate());
}

TEST_CASE("sample-size cap") {
  TestConfig cfg;
  cfg.max_sample_size = 50;
  const auto out = outcome_from_rho(1e9, 10, cfg);
  CHECK(out.next_size == 50);
  CHECK_FALSE(out.passed);
  // Already at the cap and failing: size stays put.
  CHECK(outcome_from_rho(3.0, 50, cfg).next_size == 50);
}

TEST_CASE("rho monotonicity and ratchet over random inputs") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::uniform_int_distribution<Eigen::Index> size(2, 5000);
  for (int trial = 0; trial < 500; ++trial) {
    const double v = u(rng);
    const Vec r = testing_support::normal_vector(rng, 4);
    TestConfig cfg;
    cfg.theta = u(rng);
    const Eigen::Index n = size(rng);
    const auto base = norm_test(stats_with(v, n), r, cfg);

    TestConfig larger_theta = cfg;
    larger_theta.theta *= 1.1;
    CHECK(norm_test(stats_with(v, n), r, larger_theta).rho < base.rho);
    CHECK(norm_test(stats_with(v, n), 1.1 * r, cfg).rho < base.rho);
    CHECK(norm_test(stats_with(1.1 * v, n), r, cfg).rho > base.rho);

    CHECK(base.next_size >= n);
    CHECK((base.next_size == n) == base.passed);
    CHECK(base.passed == (base.rho <= 1.0));
  }
}

TEST_CASE("SQP norm test") {
  TestConfig cfg;
  cfg.theta = 0.7;
  const Vec mean = (Vec(3) << 1.0, -2.0, 0.5).finished();

  SUBCASE("identical directions pass with rho 0") {
    const std::vector<Vec> same(6, mean);
    const auto out = sqp_norm_test(same, mean, cfg);
    CHECK(out.rho == 0.0);
    CHECK(out.passed);
  }
  SUBCASE("symmetric pair") {
    const Vec v = (Vec(3) << 0.3, 0.1, -0.2).finished();
    const auto out = sqp_norm_test({mean + v, mean - v}, mean, cfg);
    CHECK(out.rho == doctest::Approx(v.squaredNorm() / (cfg.theta * cfg.theta * mean.squaredNorm())).epsilon(1e-13));
  }
  SUBCASE("random instances against a direct evaluation") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + trial % 17;
      std::vector<Vec> rs;
      Vec m = Vec::Zero(5);
      for (int i = 0; i < n; ++i) {
        rs.push_back(testing_support::normal_vector(rng, 5));
        m += rs.back();
      }
      m /= n;
      double num = 0;
      for (const auto& r : rs) num += (r - m).squaredNorm();
      const double expected = num / (cfg.theta * cfg.theta * (n - 1.0) * n * m.squaredNorm());
      CHECK(std::abs(sqp_norm_test(rs, m, cfg).rho - expected) <= 1e-12 * std::max(1.0, expected));
      CHECK(std::abs(sqp_norm_test(num, n, m, cfg).rho - expected) <= 1e-12 * std::max(1.0, expected));
    }
  }
  CHECK_THROWS_AS(sqp_norm_test(std::vector<Vec>{mean}, mean, cfg), std::invalid_argument);
  CHECK_THROWS_AS(sqp_norm_test(std::vector<Vec>{mean, mean}, Vec::Zero(3), cfg), StationarityReached);
}

TEST_CASE("condition diagnostics on the basic example") {
  const auto inst = make_basic_example(41);
  const Vec x = Vec::Constant(inst.problem.dim, 0.8);

  DiagnosticOptions opts;
  opts.sample_size = 10;
  opts.resamples = 2000;
  opts.reference_size = 100'000;
  opts.seed = 5;

  SUBCASE("unconstrained: reduced error equals full-gradient error") {
    const auto rep = condition_diagnostic(inst.problem, ConstraintSetd::whole(inst.problem.dim), x, opts);
    const auto& full = rep.at("full_grad_error_sq");
    const auto& red = rep.at("reduced_grad_error_sq");
    CHECK(std::abs(full.estimate - red.estimate) <= 4 * full.std_error);
    CHECK(rep.reduced_error_dominated);
  }
  SUBCASE("full-gradient error scales as 1 / |S|") {
    const auto set = ConstraintSetd::whole(inst.problem.dim);
    const auto a = condition_diagnostic(inst.problem, set, x, opts);
    opts.sample_size = 20;
    const auto b = condition_diagnostic(inst.problem, set, x, opts);
    const double ratio = b.at("full_grad_error_sq").estimate / a.at("full_grad_error_sq").estimate;
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.05));
  }
  SUBCASE("affine set: the projected mapping is unbiased") {
    // Needs reference_size >> sample_size * resamples so that the reference
    // gradient's own error stays well below the resampling noise.
    opts.resamples = 1000;
    opts.reference_size = 1'000'000;
    const auto plane = ConstraintSetd::hyperplane(Vec::Ones(inst.problem.dim), 3.0);
    const Vec xp = project(plane, x).point;
    const auto rep = condition_diagnostic(inst.problem, plane, xp, opts);
    const auto& bias = rep.at("projection_bias_norm");
    CHECK(bias.estimate <= 4 * bias.std_error);
  }
  SUBCASE("orthant: implied theta bounds the sampled reduced gradient") {
    const auto rep = condition_diagnostic(inst.problem, inst.set, x, opts);
    CHECK(rep.norm_condition_implied);
    CHECK(rep.reduced_error_dominated);
    const double theta = rep.implied_theta;
    const double nu_sq = 2 * theta + theta * theta;
    const auto& sampled = rep.at("sampled_reduced_norm_sq");
    CHECK(sampled.estimate - 4 * sampled.std_error <= (1 + nu_sq) * rep.at("reduced_grad_norm_sq").estimate);
    std::ostringstream os;
    rep.write_csv(os);
    CHECK(os.str().rfind("quantity,estimate,std_error\n", 0) == 0);
  }
  SUBCASE("input checks") {
    opts.resamples = 50;
    CHECK_THROWS_AS(condition_diagnostic(inst.problem, inst.set, x, opts), std::invalid_argument);
    opts.resamples = 200;
    opts.reference_size = 999;
    CHECK_THROWS_AS(condition_diagnostic(inst.problem, inst.set, x, opts), std::invalid_argument);
  }
}

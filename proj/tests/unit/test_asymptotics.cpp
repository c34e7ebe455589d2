#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qportfolio/asymptotics.hpp"
#include "qportfolio/errors.hpp"
#include "qportfolio/qalgebra.hpp"
#include "qportfolio/rng.hpp"

using namespace qportfolio;

namespace {

MultivariateQGaussian market_model() {
  return MultivariateQGaussian(Deformation(1.3), {1.001, 1.002}, {0.02, 0.03});
}

SimulationRun make_run(int horizon, long long paths, std::uint64_t seed) {
  SimulationRun run{market_model(), Portfolio({0.4, 0.6}), std::nullopt, horizon, paths, seed, 2};
  return run;
}

}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("follow the leader chases the best cumulative asset") {
  const Competitor ftl = follow_the_leader(3);
  CHECK_FALSE(ftl.is_fixed());
  const Portfolio day0 = ftl.choose(Matrix(0, 3), 3);
  CHECK(day0.weights()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  Matrix history(2, 3);
  history(0, 0) = 1.0; history(0, 1) = 1.2; history(0, 2) = 0.9;
  history(1, 0) = 1.0; history(1, 1) = 1.1; history(1, 2) = 1.5;
  const Portfolio later = ftl.choose(history, 3);
  CHECK(later.weights()[1] == 0.0);
  CHECK(later.weights()[2] == 1.0);  // 0.9 * 1.5 = 1.35 > 1.2 * 1.1 = 1.32

  // Ties resolve to the lowest index.
  Matrix tie(1, 3, 1.0);
  CHECK(ftl.choose(tie, 3).weights()[0] == 1.0);
}

TEST_CASE("fixed and causal competitors validate dimensions") {
  const Competitor fixed = Competitor::fixed(Portfolio({0.5, 0.5}), "half");
  CHECK(fixed.is_fixed());
  CHECK(fixed.name() == "half");
  CHECK_THROWS_AS(fixed.choose(Matrix(0, 3), 3), std::invalid_argument);
  CHECK_THROWS_AS(Competitor::causal(nullptr, "empty"), std::invalid_argument);
}

TEST_CASE("simulate_market is deterministic per seed and path") {
  const MultivariateQGaussian model = market_model();
  const std::vector<Matrix> a = simulate_market(model, 5, 3, 99);
  const std::vector<Matrix> b = simulate_market(model, 5, 3, 99);
  REQUIRE(a.size() == 3);
  CHECK(a[0].rows() == 5);
  CHECK(a[0].cols() == 2);
  for (int p = 0; p < 3; ++p) CHECK(a[p].data() == b[p].data());
  for (const Matrix& path : a) {
    for (double v : path.data()) CHECK(v >= 0.0);
  }
  const std::vector<Matrix> c = simulate_market(model, 5, 3, 100);
  CHECK(a[0].data() != c[0].data());
}

TEST_CASE("SimulationRun validation") {
  SimulationRun run = make_run(10, 10, 1);
  CHECK_NOTHROW(run.validate());
  run.horizon = 2;
  CHECK_THROWS_AS(run.validate(), std::invalid_argument);
  run = make_run(10, 1, 1);
  CHECK_THROWS_AS(run.validate(), std::invalid_argument);
  run = make_run(10, 10, 1);
  run.threads = 0;
  CHECK_THROWS_AS(run.validate(), std::invalid_argument);
  run = make_run(10, 10, 1);
  run.b_star = Portfolio({1.0});
  CHECK_THROWS_AS(run.validate(), std::invalid_argument);
}

TEST_CASE("the q-wealth rate is the mean of the per-day q-logs") {
  // ln_q of a q-product telescopes exactly into the sum of ln_q factors.
  const Deformation q(1.5);
  RngStream rng(8);
  QProductAccumulator acc(q);
  double sum = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = std::exp(0.02 * rng.normal());
    acc.multiply(x);
    sum += q_log(q, x);
  }
  CHECK(acc.log_value() == doctest::Approx(sum).epsilon(1e-9));
}

TEST_CASE("check_lln concentrates on the quadrature rate") {
  SimulationRun run = make_run(400, 400, 17);
  IntegratorSpec spec;
  spec.method = IntegrationMethod::cubature_nd;
  spec.rel_tol = 1e-10;
  spec.abs_tol = 1e-14;
  const GrowthRateEstimate w_star = growth_q_rate(run.b_star, run.model, spec);
  const LlnReport report = check_lln(run, w_star);
  REQUIRE(report.checkpoints.size() == 2);  // n = 100 and the horizon
  CHECK(report.checkpoints[0].n == 100);
  CHECK(report.checkpoints[1].n == 400);
  CHECK(report.w_star == w_star.value);
  CHECK(report.final_gap < 3.0 * report.checkpoints.back().se_mean + 1e-6);
  CHECK(report.checkpoints[1].mean_abs_dev < report.checkpoints[0].mean_abs_dev);
  CHECK(report.deviation_shrinks);
  CHECK(report.checkpoints[0].p10 < report.checkpoints[0].p90);

  // Thread count must not change any statistic.
  SimulationRun serial = run;
  serial.threads = 1;
  const LlnReport again = check_lln(serial, w_star);
  CHECK(again.checkpoints[1].mean_rate == report.checkpoints[1].mean_rate);
  CHECK(again.checkpoints[0].se_mean == report.checkpoints[0].se_mean);
}

TEST_CASE("markov bound holds with the optimal portfolio as reference") {
  SimulationRun run = make_run(60, 800, 23);
  run.competitor = Competitor::fixed(Portfolio({0.9, 0.1}), "tilted");
  const std::vector<double> lambdas{1.5, 2.0, 5.0};
  const MarkovReport report = check_markov_bound(run, lambdas);
  REQUIRE(report.rows.size() == 3);
  for (const MarkovRow& row : report.rows) {
    CHECK(row.bound == doctest::Approx(1.0 / row.lambda).epsilon(1e-14));
    CHECK(row.frequency >= 0.0);
    CHECK(row.frequency <= 1.0);
  }
  // Identical competitor and reference: the ratio is exactly 1, never above
  // any lambda > 1.
  SimulationRun same = make_run(60, 100, 23);
  same.competitor = Competitor::fixed(same.b_star, "self");
  const MarkovReport trivial = check_markov_bound(same, std::vector<double>{2.0});
  CHECK(trivial.rows[0].frequency == 0.0);
  CHECK(trivial.mean_wealth_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(trivial.all_pass);

  CHECK_THROWS_AS(check_markov_bound(same, std::vector<double>{0.5}), std::invalid_argument);
  CHECK_THROWS_AS(check_markov_bound(same, std::vector<double>{}), std::invalid_argument);
  SimulationRun no_comp = make_run(60, 100, 23);
  CHECK_THROWS_AS(check_markov_bound(no_comp, lambdas), std::invalid_argument);
}

TEST_CASE("finite-n bound sees no violations from an identical competitor") {
  SimulationRun run = make_run(300, 100, 5);
  run.competitor = Competitor::fixed(run.b_star, "self");
  const FiniteNBoundReport report = check_finite_n_bound(run, 10);
  CHECK(report.total_violations == 0);
  CHECK(report.violating_path_fraction == 0.0);
  CHECK(report.within_budget);
  double budget = 0.0;
  for (int n = 10; n <= 300; ++n) budget += 1.0 / (static_cast<double>(n) * n);
  CHECK(report.budget == doctest::Approx(budget).epsilon(1e-14));

  CHECK_THROWS_AS(check_finite_n_bound(run, 0), std::invalid_argument);
  CHECK_THROWS_AS(check_finite_n_bound(run, 301), std::invalid_argument);
  SimulationRun no_comp = make_run(300, 100, 5);
  CHECK_THROWS_AS(check_finite_n_bound(no_comp, 10), std::invalid_argument);
}

TEST_CASE("finite-n bound needs q > 1/2") {
  SimulationRun run{MultivariateQGaussian(Deformation(0.4), {1.0, 1.0}, {0.05, 0.05}),
                    Portfolio({0.5, 0.5}),
                    Competitor::fixed(Portfolio({0.5, 0.5}), "half"),
                    20,
                    10,
                    3,
                    1};
  CHECK_THROWS_AS(check_finite_n_bound(run, 5), std::domain_error);
}

}  // TEST_SUITE

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qportfolio/errors.hpp"
#include "qportfolio/optimizer.hpp"
#include "qportfolio/rng.hpp"

using namespace qportfolio;

namespace {

IntegratorSpec quad_spec() {
  IntegratorSpec spec;
  spec.method = IntegrationMethod::cubature_nd;
  spec.rel_tol = 1e-9;
  spec.abs_tol = 1e-13;
  return spec;
}

DEConfig small_de(std::uint64_t seed) {
  DEConfig de;
  de.seed = seed;
  de.max_generations = 400;
  return de;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("Portfolio invariants") {
  CHECK_THROWS_AS(Portfolio({0.5, 0.6}), std::domain_error);
  CHECK_THROWS_AS(Portfolio({1.5, -0.5}), std::domain_error);
  CHECK_THROWS_AS(Portfolio({}), std::invalid_argument);
  const Portfolio u = Portfolio::uniform(4);
  CHECK(u.weights()[3] == 0.25);
  CHECK(u.factor(std::vector<double>{1.0, 2.0, 3.0, 4.0}) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(u.factor(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("quadrature and Monte Carlo growth rates agree") {
  const MultivariateQGaussian model(Deformation(1.4), {1.002, 0.999}, {0.02, 0.03});
  const Portfolio b({0.6, 0.4});
  const GrowthRateEstimate quad = growth_q_rate(b, model, quad_spec());
  CHECK(quad.converged);
  CHECK(quad.std_error == 0.0);
  CHECK(quad.error_estimate < 1e-8);

  IntegratorSpec mc;
  mc.method = IntegrationMethod::monte_carlo;
  mc.mc_samples = 400000;
  mc.seed = 7;
  const GrowthRateEstimate sampled = growth_q_rate(b, model, mc);
  CHECK(sampled.error_estimate == 0.0);
  CHECK(sampled.std_error > 0.0);
  CHECK(std::abs(sampled.value - quad.value) < 4.0 * sampled.std_error);
  CHECK(sampled.evaluations == 400000);
}

TEST_CASE("growth quadrature reduction matches a direct 2-d cubature") {
  // Same integrand, integrated without the portfolio-factor reduction:
  // E[ln_q(b.x)] over the nonnegative orthant, normalized by the orthant mass.
  const MultivariateQGaussian model(Deformation(1.3), {1.001, 1.0005}, {0.02, 0.025});
  const Portfolio b({0.35, 0.65});
  const GrowthRateEstimate reduced = growth_q_rate(b, model, quad_spec());

  IntegratorSpec direct_spec = quad_spec();
  direct_spec.max_evaluations = 20'000'000;
  const ScalarField weighted = [&](std::span<const double> x) {
    const double v = b.factor(x);
    if (!(v > 0.0)) return 0.0;
    return q_log(model.q(), v) * density(model, x);
  };
  const ScalarField mass = [&](std::span<const double> x) { return density(model, x); };
  const Region orthant = Region::box({{0.0, 2.0}, {0.0, 2.0}});  // bulk dead center
  const double num = integrate(weighted, orthant, direct_spec).value;
  const double den = integrate(mass, orthant, direct_spec).value;
  CHECK(std::abs(reduced.value - num / den) < 1e-6);
}

TEST_CASE("symmetric assets are held in equal weights") {
  const MultivariateQGaussian model(Deformation(1.5), {1.001, 1.001}, {0.05, 0.05});
  const OptimalPortfolioResult result = optimal_portfolio(model, quad_spec(), small_de(19));
  CHECK(result.portfolio.weights()[0] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(result.portfolio.weights()[1] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(result.rate.converged);
}

TEST_CASE("optimum beats a coarse simplex grid") {
  const MultivariateQGaussian model(Deformation(1.3), {1.004, 0.999}, {0.03, 0.02});
  const IntegratorSpec spec = quad_spec();
  const OptimalPortfolioResult result = optimal_portfolio(model, spec, small_de(23));
  double best_grid = -1e300;
  double best_b = -1.0;
  for (int k = 0; k <= 20; ++k) {
    const double w = k / 20.0;
    const GrowthRateEstimate g = growth_q_rate(Portfolio({w, 1.0 - w}), model, spec);
    if (g.value > best_grid) {
      best_grid = g.value;
      best_b = w;
    }
  }
  CHECK(result.rate.value >= best_grid - 1e-9);
  CHECK(result.portfolio.weights()[0] == doctest::Approx(best_b).epsilon(0.06));
}

TEST_CASE("optimal portfolio is equivariant under asset permutation") {
  const MultivariateQGaussian model(Deformation(1.35), {1.003, 0.9995, 1.001},
                                    {0.025, 0.018, 0.032});
  const MultivariateQGaussian permuted(Deformation(1.35), {1.001, 1.003, 0.9995},
                                       {0.032, 0.025, 0.018});
  const OptimalPortfolioResult a = optimal_portfolio(model, quad_spec(), small_de(31));
  const OptimalPortfolioResult b = optimal_portfolio(permuted, quad_spec(), small_de(31));
  // Permuted axes are (2, 0, 1) of the original.  Both runs converge to the
  // same (unique) concave optimum, up to the polish resolution.
  CHECK(b.portfolio.weights()[0] == doctest::Approx(a.portfolio.weights()[2]).epsilon(1e-3));
  CHECK(b.portfolio.weights()[1] == doctest::Approx(a.portfolio.weights()[0]).epsilon(1e-3));
  CHECK(b.portfolio.weights()[2] == doctest::Approx(a.portfolio.weights()[1]).epsilon(1e-3));
}

TEST_CASE("monte carlo and quadrature optimizers land on the same portfolio") {
  const MultivariateQGaussian model(Deformation(1.4), {1.0025, 1.0005}, {0.02, 0.025});
  const OptimalPortfolioResult quad = optimal_portfolio(model, quad_spec(), small_de(41));
  IntegratorSpec mc;
  mc.method = IntegrationMethod::monte_carlo;
  mc.mc_samples = 200000;
  mc.seed = 17;
  const OptimalPortfolioResult sampled = optimal_portfolio(model, mc, small_de(41));
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(sampled.portfolio.weights()[i] - quad.portfolio.weights()[i]) < 0.05);
  }
  CHECK(sampled.rate.std_error > 0.0);
}

TEST_CASE("certificate: no random portfolio beats the optimum") {
  const MultivariateQGaussian model(Deformation(1.3), {1.002, 1.0, 0.9995},
                                    {0.02, 0.03, 0.025});
  const IntegratorSpec spec = quad_spec();
  const OptimalPortfolioResult result = optimal_portfolio(model, spec, small_de(47));
  RngStream rng(404);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> w(3);
    double sum = 0.0;
    for (double& v : w) {
      v = -std::log(1.0 - rng.uniform());
      sum += v;
    }
    for (double& v : w) v /= sum;
    const GrowthRateEstimate g = growth_q_rate(Portfolio(w), model, spec);
    CHECK(g.value <= result.rate.value + 1e-6 + g.error_estimate + result.rate.error_estimate);
  }
}

TEST_CASE("market sample draws stay in the orthant and reproduce") {
  const MultivariateQGaussian model(Deformation(1.5), {1.0, 1.0}, {0.3, 0.4});
  double rejection = 0.0;
  const Matrix a = draw_market_sample(model, 5000, 77, &rejection);
  CHECK(a.rows() == 5000);
  CHECK(rejection > 0.0);  // wide sigmas put real mass below zero
  CHECK(rejection < 0.5);
  for (double v : a.data()) CHECK(v >= 0.0);
  const Matrix b = draw_market_sample(model, 5000, 77);
  CHECK(a.data() == b.data());

  const double rate = sample_growth_q_rate(Portfolio({0.5, 0.5}), model.q(), a);
  double expected = 0.0;
  for (int r = 0; r < a.rows(); ++r) expected += q_log(model.q(), 0.5 * a(r, 0) + 0.5 * a(r, 1));
  CHECK(rate == doctest::Approx(expected / 5000.0).epsilon(1e-12));
}

TEST_CASE("growth rate rejects dimension mismatches") {
  const MultivariateQGaussian model(Deformation(1.4), {1.0, 1.0}, {0.02, 0.02});
  CHECK_THROWS_AS(growth_q_rate(Portfolio({1.0}), model, quad_spec()), std::invalid_argument);
}

}  // TEST_SUITE

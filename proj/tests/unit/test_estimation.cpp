#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qportfolio/errors.hpp"
#include "qportfolio/estimation.hpp"
#include "qportfolio/rng.hpp"

using namespace qportfolio;

namespace {

Matrix draw_observations(const MultivariateQGaussian& model, int n, std::uint64_t seed) {
  RngStream rng(seed);
  Matrix out(n, model.dim());
  for (int r = 0; r < n; ++r) sample(model, rng, out.row(r));
  return out;
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("fit recovers the generating parameters") {
  const MultivariateQGaussian truth(Deformation(1.5), {1.001, 1.002}, {0.02, 0.03});
  const Matrix obs = draw_observations(truth, 4000, 2024);
  FitConfig config;
  config.de.seed = 5;
  const FitResult fit = fit_mle(obs, config);
  CHECK(fit.converged);
  CHECK(fit.model.q().q() == doctest::Approx(1.5).epsilon(0.1));
  CHECK(fit.model.mu()[0] == doctest::Approx(1.001).epsilon(0.003));
  CHECK(fit.model.mu()[1] == doctest::Approx(1.002).epsilon(0.003));
  CHECK(fit.model.sigma()[0] == doctest::Approx(0.02).epsilon(0.15));
  CHECK(fit.model.sigma()[1] == doctest::Approx(0.03).epsilon(0.15));
  // The fitted likelihood cannot fall below the truth's own score.
  CHECK(fit.log_likelihood >= log_likelihood(truth, obs) - 1e-6);
  // Trace is the running best.
  for (std::size_t g = 1; g < fit.trace.size(); ++g) CHECK(fit.trace[g] >= fit.trace[g - 1]);
}

TEST_CASE("fit is deterministic for a fixed seed") {
  const MultivariateQGaussian truth(Deformation(1.4), {1.0, 1.0}, {0.02, 0.02});
  const Matrix obs = draw_observations(truth, 500, 7);
  FitConfig config;
  config.de.seed = 11;
  config.de.max_generations = 200;
  const FitResult a = fit_mle(obs, config);
  const FitResult b = fit_mle(obs, config);
  CHECK(a.model.q().q() == b.model.q().q());
  CHECK(std::vector<double>(a.model.mu().begin(), a.model.mu().end()) ==
        std::vector<double>(b.model.mu().begin(), b.model.mu().end()));
  CHECK(a.log_likelihood == b.log_likelihood);

  FitConfig threaded = config;
  threaded.de.threads = 4;
  const FitResult c = fit_mle(obs, threaded);
  CHECK(a.log_likelihood == c.log_likelihood);
  CHECK(a.model.q().q() == c.model.q().q());
}

TEST_CASE("scaling the data scales the fitted location and width") {
  const MultivariateQGaussian truth(Deformation(1.4), {1.0, 1.0}, {0.03, 0.04});
  const Matrix obs = draw_observations(truth, 400, 12);
  const double c = 1.7;
  Matrix scaled(obs.rows(), obs.cols());
  for (int r = 0; r < obs.rows(); ++r) {
    for (int k = 0; k < obs.cols(); ++k) scaled(r, k) = c * obs(r, k);
  }
  FitConfig base;
  base.de.seed = 3;
  base.de.max_generations = 120;  // both runs hit the cap: identical DE paths
  base.de.tolerance = 1e-15;
  FitConfig rescaled = base;
  rescaled.mu_bounds = {base.mu_bounds.first * c, base.mu_bounds.second * c};
  rescaled.sigma_bounds = {base.sigma_bounds.first * c, base.sigma_bounds.second * c};

  const FitResult f1 = fit_mle(obs, base);
  const FitResult f2 = fit_mle(scaled, rescaled);
  CHECK(f2.model.q().q() == doctest::Approx(f1.model.q().q()).epsilon(1e-9));
  for (int i = 0; i < 2; ++i) {
    CHECK(f2.model.mu()[i] == doctest::Approx(c * f1.model.mu()[i]).epsilon(1e-9));
    CHECK(f2.model.sigma()[i] == doctest::Approx(c * f1.model.sigma()[i]).epsilon(1e-9));
  }
  // Densities pick up the Jacobian: LL shifts by -n d ln c exactly.
  CHECK(f2.log_likelihood ==
        doctest::Approx(f1.log_likelihood - 400 * 2 * std::log(c)).epsilon(1e-9));
}

TEST_CASE("fit rejects unusable inputs") {
  const MultivariateQGaussian truth(Deformation(1.4), {1.0}, {0.05});
  const Matrix tiny = draw_observations(truth, 29, 1);
  FitConfig config;
  CHECK_THROWS_AS(fit_mle(tiny, config), DataError);

  Matrix constant(40, 2);
  RngStream rng(2);
  for (int r = 0; r < 40; ++r) {
    constant(r, 0) = 1.0 + 0.01 * rng.normal();
    constant(r, 1) = 1.0;  // no variation: the width is unidentifiable
  }
  CHECK_THROWS_WITH_AS(fit_mle(constant, config),
                       doctest::Contains("column 1"), DataError);

  PriceRelativeSeries series;
  series.tickers = {"AAA", "BBB"};
  for (int r = 0; r < 40; ++r) series.dates.push_back("2020-01-" + std::to_string(10 + r));
  series.relatives = constant;
  CHECK_THROWS_WITH_AS(fit_mle(series, config), doctest::Contains("ticker BBB"), DataError);
}

TEST_CASE("FitConfig validation") {
  FitConfig config;
  CHECK_NOTHROW(config.validate(2));
  config.q_bounds = {0.9, 2.0};
  CHECK_THROWS_AS(config.validate(2), std::invalid_argument);
  config = FitConfig{};
  config.q_bounds = {1.2, 3.0};
  CHECK_THROWS_AS(config.validate(2), std::invalid_argument);
  config = FitConfig{};
  config.mu_bounds = {1.2, 0.8};
  CHECK_THROWS_AS(config.validate(2), std::invalid_argument);
  config = FitConfig{};
  config.mu_bounds_per_axis = {{0.9, 1.1}};  // wrong size for d = 2
  CHECK_THROWS_AS(config.validate(2), std::invalid_argument);
}

TEST_CASE("gaussian baseline moment-matches the sample") {
  RngStream rng(42);
  Matrix obs(200, 2);
  for (int r = 0; r < 200; ++r) {
    obs(r, 0) = 1.0 + 0.02 * rng.normal();
    obs(r, 1) = 1.001 + 0.03 * rng.normal();
  }
  const MultivariateQGaussian base = fit_gaussian_baseline(obs);
  CHECK(base.q().classical());
  for (int k = 0; k < 2; ++k) {
    double mean = 0.0;
    for (int r = 0; r < 200; ++r) mean += obs(r, k);
    mean /= 200.0;
    double var = 0.0;
    for (int r = 0; r < 200; ++r) var += (obs(r, k) - mean) * (obs(r, k) - mean);
    var /= 199.0;
    CHECK(base.mu()[k] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(base.sigma()[k] * base.sigma()[k] / 2.0 == doctest::Approx(var).epsilon(1e-12));
  }
}

TEST_CASE("gaussianize preserves the variance below q = 5/3") {
  const MultivariateQGaussian model(Deformation(1.5), {1.0, 1.0}, {0.02, 0.03});
  const MultivariateQGaussian flat = gaussianize(model);
  CHECK(flat.q().classical());
  for (int k = 0; k < 2; ++k) {
    CHECK(qgaussian_variance(flat.q(), flat.sigma()[k]) ==
          doctest::Approx(qgaussian_variance(model.q(), model.sigma()[k])).epsilon(1e-12));
  }
  // Above 5/3 the variance does not exist; sigma is passed through.
  const MultivariateQGaussian heavy(Deformation(1.8), {1.0}, {0.02});
  const MultivariateQGaussian heavy_flat = gaussianize(heavy);
  CHECK(heavy_flat.q().classical());
  CHECK(heavy_flat.sigma()[0] == 0.02);
}

}  // TEST_SUITE

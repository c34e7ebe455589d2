#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qportfolio/matrix.hpp"
#include "qportfolio/numerics.hpp"
#include "qportfolio/qgaussian.hpp"

namespace qportfolio {

// Long-only portfolio on the closed simplex: weights >= 0, sum = 1 (checked
// to 1e-10 at construction).
class Portfolio {
 public:
  explicit Portfolio(std::vector<double> weights);
  static Portfolio uniform(int dim);

  int dim() const noexcept { return static_cast<int>(w_.size()); }
  std::span<const double> weights() const noexcept { return w_; }

  // Daily portfolio factor b . x for the price-relative vector x.
  double factor(std::span<const double> x) const;

 private:
  std::vector<double> w_;
};

struct GrowthRateEstimate {
  double value = 0.0;
  double std_error = 0.0;        // Monte Carlo standard error; 0 for quadrature
  IntegratorSpec method;         // echo of the spec the estimate was computed with
  double error_estimate = 0.0;   // quadrature error bound; 0 for Monte Carlo
  bool converged = false;
  long long evaluations = 0;
  // Fraction of the model's mass (quadrature) or draws (MC) discarded by the
  // nonnegative-market restriction; the estimate conditions on x >= 0.
  double rejection_fraction = 0.0;
};

// Expected q-growth rate  E[ ln_q( b . X ) ]  with X distributed as the
// model conditioned on the nonnegative orthant.
//   - monte_carlo: rejection-samples the model (seeded by spec.seed) and
//     averages ln_q(b . x) over spec.mc_samples kept draws.
//   - cubature_nd / adaptive_quadrature_1d: integrates ln_q(b.x) f(x) over
//     the orthant in per-axis standardized coordinates, dividing by the
//     orthant mass; the domain is pre-split around the density bulk so the
//     adaptive rule cannot overlook a narrow peak.
GrowthRateEstimate growth_q_rate(const Portfolio& portfolio, const MultivariateQGaussian& model,
                                 const IntegratorSpec& spec);

// Exact rejection sample of `count` market vectors (rows) from the model
// conditioned on x >= 0.  rejection_fraction (if non-null) receives the
// discarded fraction.
Matrix draw_market_sample(const MultivariateQGaussian& model, long long count,
                          std::uint64_t seed, double* rejection_fraction = nullptr);

// Sample-average q-growth rate of a portfolio on a fixed market sample; the
// Monte Carlo objective evaluated by the optimizer, exposed so oracles can
// score arbitrary portfolios on exactly the same draws.
double sample_growth_q_rate(const Portfolio& portfolio, Deformation q, const Matrix& sample);

struct OptimalPortfolioResult {
  Portfolio portfolio;
  GrowthRateEstimate rate;     // growth rate of the returned portfolio
  DEResult optimizer;          // DE diagnostics (trace, convergence)
  long long polish_steps = 0;  // projected-gradient refinement iterations
};

// Maximize the growth-q-rate over the simplex.  DE searches u in [0,1]^d
// mapped through w_i = u_i / sum_j u_j (the all-zero corner maps to the
// uniform portfolio); a deterministic projected-gradient polish then runs on
// the simplex itself, which also makes the result equivariant under asset
// permutations.  The objective is evaluated per spec.method: monte_carlo
// draws ONE market sample up front (spec.seed) and scores every candidate on
// it; the quadrature methods integrate each candidate.
OptimalPortfolioResult optimal_portfolio(const MultivariateQGaussian& model,
                                         const IntegratorSpec& spec, const DEConfig& de_config);

}  // namespace qportfolio

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qportfolio/market_data.hpp"
#include "qportfolio/numerics.hpp"
#include "qportfolio/qgaussian.hpp"

namespace qportfolio {

// Maximum-likelihood fit of the product-form multivariate q-Gaussian by one
// joint differential-evolution run over (q, mu_1..mu_d, sigma_1..sigma_d).
struct FitConfig {
  // The q upper bound is additionally clipped to the normalizability limit
  // 1 + 2/d (minus a small margin) at fit time.
  std::pair<double, double> q_bounds{1.01, 2.2};
  // Defaults sized for daily price relatives; override for other scales.
  std::pair<double, double> mu_bounds{0.8, 1.2};
  std::pair<double, double> sigma_bounds{1e-4, 0.5};
  // Optional per-axis overrides (size d when set).
  std::vector<std::pair<double, double>> mu_bounds_per_axis;
  std::vector<std::pair<double, double>> sigma_bounds_per_axis;

  // Likelihood surfaces over (q, mu, sigma) collapse slower than the
  // low-dimensional simplex searches, so fits default to a higher
  // generation cap than a bare DEConfig.
  DEConfig de = fit_de_defaults();
  static DEConfig fit_de_defaults() {
    DEConfig config;
    config.max_generations = 1500;
    return config;
  }

  void validate(int dim) const;  // throws std::invalid_argument
};

struct FitResult {
  MultivariateQGaussian model;
  double log_likelihood;
  bool converged;
  std::vector<double> trace;  // best log-likelihood per DE generation
};

FitResult fit_mle(const Matrix& observations, const FitConfig& config);
FitResult fit_mle(const PriceRelativeSeries& data, const FitConfig& config);

// Moment-matched classical baseline on the same data: q pinned to the
// classical limit, per-axis mu = sample mean, sigma chosen so the Gaussian
// variance sigma^2/2 equals the sample variance.
MultivariateQGaussian fit_gaussian_baseline(const Matrix& observations);

// The same variance-preserving classicalization applied to an already
// fitted model (only defined for q < 5/3, where the model variance exists;
// for q >= 5/3 sigma is kept as-is).
MultivariateQGaussian gaussianize(const MultivariateQGaussian& model);

}  // namespace qportfolio

#include "qportfolio/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "qportfolio/errors.hpp"

namespace qportfolio {

namespace {

constexpr double k_inf = std::numeric_limits<double>::infinity();

// Margin keeping the DE search strictly inside the normalizability region
// q < 1 + 2/d (the likelihood is -inf outside anyway; the margin keeps the
// constant finite for every candidate, so the objective stays smooth).
constexpr double k_q_margin = 1e-6;

// The classical limit approached from above, so the resulting model still
// satisfies the 1 < q < 3 sampling precondition.
constexpr double k_classical_q = 1.0 + 1e-8;

std::pair<double, double> axis_bounds(const std::pair<double, double>& uniform,
                                      const std::vector<std::pair<double, double>>& per_axis,
                                      int axis) {
  return per_axis.empty() ? uniform : per_axis[static_cast<std::size_t>(axis)];
}

}  // namespace

void FitConfig::validate(int dim) const {
  if (dim < 1) throw std::invalid_argument("FitConfig: dimension must be >= 1");
  auto check_pair = [](const std::pair<double, double>& b, const char* what) {
    if (!std::isfinite(b.first) || !std::isfinite(b.second) || !(b.first < b.second)) {
      throw std::invalid_argument(std::string("FitConfig: ") + what +
                                  " bounds need finite lo < hi");
    }
  };
  check_pair(q_bounds, "q");
  if (!(q_bounds.first > 1.0) || !(q_bounds.second < 3.0)) {
    throw std::invalid_argument("FitConfig: q bounds must lie inside (1, 3)");
  }
  check_pair(mu_bounds, "mu");
  check_pair(sigma_bounds, "sigma");
  if (!(sigma_bounds.first > 0.0)) {
    throw std::invalid_argument("FitConfig: sigma lower bound must be > 0");
  }
  if (!mu_bounds_per_axis.empty() && static_cast<int>(mu_bounds_per_axis.size()) != dim) {
    throw std::invalid_argument("FitConfig: mu_bounds_per_axis size must equal dimension");
  }
  if (!sigma_bounds_per_axis.empty() && static_cast<int>(sigma_bounds_per_axis.size()) != dim) {
    throw std::invalid_argument("FitConfig: sigma_bounds_per_axis size must equal dimension");
  }
  for (const auto& b : mu_bounds_per_axis) check_pair(b, "per-axis mu");
  for (const auto& b : sigma_bounds_per_axis) {
    check_pair(b, "per-axis sigma");
    if (!(b.first > 0.0)) {
      throw std::invalid_argument("FitConfig: per-axis sigma lower bound must be > 0");
    }
  }
  de.validate();
}

namespace {

// Shared body for both overloads; `names` (when non-empty) labels columns in
// the degenerate-data error.
FitResult fit_mle_impl(const Matrix& observations, const FitConfig& config,
                       std::span<const std::string> names) {
  const int d = observations.cols();
  config.validate(d);
  if (observations.rows() < 30) {
    throw DataError("fit_mle: need at least 30 observations, got " +
                    std::to_string(observations.rows()));
  }
  for (int c = 0; c < d; ++c) {
    double lo = observations(0, c), hi = lo;
    for (int r = 1; r < observations.rows(); ++r) {
      lo = std::min(lo, observations(r, c));
      hi = std::max(hi, observations(r, c));
    }
    if (!(hi > lo)) {
      const std::string label = names.empty() ? "column " + std::to_string(c)
                                              : "ticker " + names[static_cast<std::size_t>(c)];
      throw DataError("fit_mle: " + label + " is constant; the scale is unidentifiable");
    }
  }

  // Parameter vector: (q, mu_1..mu_d, sigma_1..sigma_d).
  std::vector<std::pair<double, double>> bounds;
  bounds.reserve(1 + 2 * static_cast<std::size_t>(d));
  const double q_cap = 1.0 + 2.0 / d - k_q_margin;
  const double q_hi = std::min(config.q_bounds.second, q_cap);
  if (!(config.q_bounds.first < q_hi)) {
    throw std::invalid_argument("fit_mle: q bounds empty after the d < 2/(q-1) clip");
  }
  bounds.emplace_back(config.q_bounds.first, q_hi);
  for (int i = 0; i < d; ++i) {
    bounds.push_back(axis_bounds(config.mu_bounds, config.mu_bounds_per_axis, i));
  }
  for (int i = 0; i < d; ++i) {
    bounds.push_back(axis_bounds(config.sigma_bounds, config.sigma_bounds_per_axis, i));
  }

  const ScalarField objective = [&](std::span<const double> p) -> double {
    const double q = p[0];
    std::vector<double> mu(p.begin() + 1, p.begin() + 1 + d);
    std::vector<double> sigma(p.begin() + 1 + d, p.begin() + 1 + 2 * d);
    try {
      const MultivariateQGaussian model(Deformation(q), std::move(mu), std::move(sigma));
      return log_likelihood(model, observations);
    } catch (const std::domain_error&) {
      return -k_inf;  // outside the normalizable parameter region
    }
  };

  const DEResult de = differential_evolution(objective, bounds, config.de);
  if (!std::isfinite(de.value)) {
    throw OptimizationError("fit_mle: optimizer never found a finite log-likelihood", de.trace);
  }
  std::vector<double> mu(de.argmax.begin() + 1, de.argmax.begin() + 1 + d);
  std::vector<double> sigma(de.argmax.begin() + 1 + d, de.argmax.begin() + 1 + 2 * d);
  MultivariateQGaussian model(Deformation(de.argmax[0]), std::move(mu), std::move(sigma));
  return FitResult{std::move(model), de.value, de.converged, de.trace};
}

}  // namespace

FitResult fit_mle(const Matrix& observations, const FitConfig& config) {
  return fit_mle_impl(observations, config, {});
}

FitResult fit_mle(const PriceRelativeSeries& data, const FitConfig& config) {
  data.validate();
  return fit_mle_impl(data.relatives, config, data.tickers);
}

MultivariateQGaussian fit_gaussian_baseline(const Matrix& observations) {
  const int d = observations.cols();
  const int n = observations.rows();
  if (d < 1 || n < 2) throw DataError("fit_gaussian_baseline: need >= 2 observations");
  std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
  std::vector<double> sigma(static_cast<std::size_t>(d), 0.0);
  for (int c = 0; c < d; ++c) {
    double mean = 0.0;
    for (int r = 0; r < n; ++r) mean += observations(r, c);
    mean /= n;
    double var = 0.0;
    for (int r = 0; r < n; ++r) {
      const double dev = observations(r, c) - mean;
      var += dev * dev;
    }
    var /= (n - 1);
    if (!(var > 0.0)) {
      throw DataError("fit_gaussian_baseline: zero sample variance in column " +
                      std::to_string(c));
    }
    mu[static_cast<std::size_t>(c)] = mean;
    sigma[static_cast<std::size_t>(c)] = std::sqrt(2.0 * var);
  }
  return MultivariateQGaussian(Deformation(k_classical_q), std::move(mu), std::move(sigma));
}

MultivariateQGaussian gaussianize(const MultivariateQGaussian& model) {
  std::vector<double> mu(model.mu().begin(), model.mu().end());
  std::vector<double> sigma(model.sigma().begin(), model.sigma().end());
  if (model.q().q() < 5.0 / 3.0 && !model.q().classical()) {
    const double rescale = std::sqrt(2.0 / (5.0 - 3.0 * model.q().q()));
    for (double& s : sigma) s *= rescale;
  }
  return MultivariateQGaussian(Deformation(k_classical_q), std::move(mu), std::move(sigma));
}

}  // namespace qportfolio

#pragma once

#include <span>
#include <string>
#include <vector>

#include "qportfolio/market_data.hpp"
#include "qportfolio/optimizer.hpp"
#include "qportfolio/qalgebra.hpp"

namespace qportfolio {

// Per-day wealth curves for one portfolio held at fixed weights
// (rebalanced daily).  wealth[k] is the classical product of the daily
// factors through day k; q_wealth[k] is their q-product (q > 1 saturates to
// +inf while the running bracket is non-positive).  Both start at the first
// day's factor, i.e. initial capital 1 *before* day 0.
struct WealthTrajectory {
  std::vector<std::string> days;
  std::vector<double> daily_factor;
  std::vector<double> wealth;
  std::vector<double> q_wealth;
};

WealthTrajectory wealth_relative(const Portfolio& portfolio, const PriceRelativeSeries& data,
                                 Deformation q);

// Simple (arithmetic) per-day returns r_k = factor_k - 1.
std::vector<double> simple_returns(std::span<const double> daily_factors);

// Sharpe ratio mean(r - rf) / sd(r), sample (n-1) standard deviation.
// Throws UndefinedMetricError when the returns have zero variance or fewer
// than 2 observations.
double sharpe_ratio(std::span<const double> returns, double risk_free = 0.0);

// Sortino ratio mean(r - target) / TDD with target downside deviation
//   TDD = sqrt( (1/N) sum_i min(0, r_i - target)^2 ).
// Throws UndefinedMetricError when no return falls below the target (TDD = 0)
// or the series is empty.
double sortino_ratio(std::span<const double> returns, double target = 0.0);

}  // namespace qportfolio

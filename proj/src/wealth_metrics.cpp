#include "qportfolio/wealth_metrics.hpp"

#include <cmath>

#include "qportfolio/errors.hpp"

namespace qportfolio {

WealthTrajectory wealth_relative(const Portfolio& portfolio, const PriceRelativeSeries& data,
                                 Deformation q) {
  data.validate();
  if (portfolio.dim() != static_cast<int>(data.tickers.size())) {
    throw std::invalid_argument("wealth_relative: portfolio/data dimension mismatch");
  }
  const int n = data.relatives.rows();
  WealthTrajectory out;
  out.days = data.dates;
  out.daily_factor.reserve(static_cast<std::size_t>(n));
  out.wealth.reserve(static_cast<std::size_t>(n));
  out.q_wealth.reserve(static_cast<std::size_t>(n));

  double wealth = 1.0;
  QProductAccumulator q_wealth(q);
  for (int k = 0; k < n; ++k) {
    const double factor = portfolio.factor(data.relatives.row(k));
    wealth *= factor;
    q_wealth.multiply(factor);
    out.daily_factor.push_back(factor);
    out.wealth.push_back(wealth);
    out.q_wealth.push_back(q_wealth.value());
  }
  return out;
}

std::vector<double> simple_returns(std::span<const double> daily_factors) {
  std::vector<double> r;
  r.reserve(daily_factors.size());
  for (double f : daily_factors) r.push_back(f - 1.0);
  return r;
}

double sharpe_ratio(std::span<const double> returns, double risk_free) {
  const std::size_t n = returns.size();
  if (n < 2) {
    throw UndefinedMetricError("sharpe_ratio: needs at least 2 returns, got " +
                               std::to_string(n));
  }
  double mean = 0.0;
  for (double r : returns) mean += r - risk_free;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double r : returns) {
    const double dev = (r - risk_free) - mean;
    ss += dev * dev;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) {
    throw UndefinedMetricError("sharpe_ratio: zero return variance");
  }
  return mean / sd;
}

double sortino_ratio(std::span<const double> returns, double target) {
  const std::size_t n = returns.size();
  if (n == 0) throw UndefinedMetricError("sortino_ratio: empty return series");
  double mean = 0.0;
  double downside_ss = 0.0;
  for (double r : returns) {
    const double excess = r - target;
    mean += excess;
    if (excess < 0.0) downside_ss += excess * excess;
  }
  mean /= static_cast<double>(n);
  const double tdd = std::sqrt(downside_ss / static_cast<double>(n));
  if (!(tdd > 0.0)) {
    throw UndefinedMetricError("sortino_ratio: no returns below the target (zero downside deviation)");
  }
  return mean / tdd;
}

}  // namespace qportfolio

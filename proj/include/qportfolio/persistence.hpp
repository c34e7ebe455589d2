#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qportfolio/asymptotics.hpp"
#include "qportfolio/estimation.hpp"
#include "qportfolio/optimizer.hpp"
#include "qportfolio/wealth_metrics.hpp"

namespace qportfolio {

// All files are written deterministically: fixed key order, floats rendered
// with %.17g (round-trip exact), LF line endings.  Loaders throw DataError
// on malformed content.

// Double formatting used by every writer (17 significant digits).
std::string format_double(double value);

// --- model JSON ------------------------------------------------------------
struct StoredModel {
  MultivariateQGaussian model;
  std::vector<std::string> tickers;              // size dim
  std::optional<double> log_likelihood;
  std::optional<bool> converged;
};
void save_model(const std::filesystem::path& path, const StoredModel& stored);
StoredModel load_model(const std::filesystem::path& path);

// --- portfolio JSON ---------------------------------------------------------
struct StoredPortfolio {
  Portfolio portfolio;
  std::vector<std::string> tickers;
  std::optional<double> growth_q_rate;
  std::optional<double> growth_q_rate_error;
};
void save_portfolio(const std::filesystem::path& path, const StoredPortfolio& stored);
StoredPortfolio load_portfolio(const std::filesystem::path& path);

// --- run configuration JSON --------------------------------------------------
// Optional file shared by the CLI subcommands; every field has a default, so
// {} is a valid config.
struct RunConfig {
  FitConfig fit;
  IntegratorSpec integrator;
  DEConfig optimizer_de;
};
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& config);

// --- CSV reports -------------------------------------------------------------
// backtest: header date,daily_factor,wealth,q_wealth; one row per day.
void write_backtest_csv(const std::filesystem::path& path, const WealthTrajectory& trajectory);
WealthTrajectory read_backtest_csv(const std::filesystem::path& path);

// metrics: header metric,value; value is %.17g or the literal `undefined`.
struct MetricRow {
  std::string name;
  std::optional<double> value;  // nullopt renders as `undefined`
};
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);

// simulation checks: header check,n,statistic,value,bound.
struct CheckRow {
  std::string check;
  long long n;
  std::string statistic;
  double value;
  double bound;
};
void write_checks_csv(const std::filesystem::path& path, const std::vector<CheckRow>& rows);

std::vector<CheckRow> lln_check_rows(const LlnReport& report);
std::vector<CheckRow> markov_check_rows(const MarkovReport& report, int horizon);
std::vector<CheckRow> finite_n_check_rows(const FiniteNBoundReport& report);

// --- SVG plot ----------------------------------------------------------------
// Self-contained SVG of wealth curves over time (log-scale y), one polyline
// per named series.  Infinite values (saturated q-wealth) are clipped to the
// chart top.
struct PlotSeries {
  std::string name;
  std::vector<double> values;
};
void write_wealth_svg(const std::filesystem::path& path, const std::vector<std::string>& dates,
                      const std::vector<PlotSeries>& series);

}  // namespace qportfolio

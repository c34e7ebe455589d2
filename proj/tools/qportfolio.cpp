#include <cctype>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qportfolio/asymptotics.hpp"
#include "qportfolio/errors.hpp"
#include "qportfolio/estimation.hpp"
#include "qportfolio/market_data.hpp"
#include "qportfolio/optimizer.hpp"
#include "qportfolio/persistence.hpp"
#include "qportfolio/wealth_metrics.hpp"

namespace {

using namespace qportfolio;

// One machine-readable line on stderr; the exit code carries the class.
void emit_error(const char* kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

std::vector<std::string> parse_ticker_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : csv) {
    if (ch == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      current.push_back(ch);
    }
  }
  if (!current.empty()) out.push_back(current);
  if (out.empty()) throw std::invalid_argument("--tickers: empty ticker list");
  return out;
}

std::optional<std::string> window_edge(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return value;
}

std::vector<MetricRow> trajectory_metrics(const WealthTrajectory& trajectory, double risk_free,
                                          double target) {
  const std::vector<double> returns = simple_returns(trajectory.daily_factor);
  std::vector<MetricRow> rows;
  try {
    rows.push_back({"sharpe", sharpe_ratio(returns, risk_free)});
  } catch (const UndefinedMetricError&) {
    rows.push_back({"sharpe", std::nullopt});
  }
  try {
    rows.push_back({"sortino", sortino_ratio(returns, target)});
  } catch (const UndefinedMetricError&) {
    rows.push_back({"sortino", std::nullopt});
  }
  rows.push_back({"final_wealth", trajectory.wealth.back()});
  rows.push_back({"final_q_wealth", trajectory.q_wealth.back()});
  return rows;
}

void print_metrics(const std::vector<MetricRow>& rows, const std::string& prefix = "") {
  for (const MetricRow& row : rows) {
    std::cout << prefix << row.name << ','
              << (row.value ? format_double(*row.value) : "undefined") << '\n';
  }
}

Competitor make_competitor(const std::string& arg, int dim) {
  if (arg == "uniform") return Competitor::fixed(Portfolio::uniform(dim), "uniform");
  if (arg == "follow-the-leader" || arg == "ftl") return follow_the_leader(dim);
  const StoredPortfolio stored = load_portfolio(arg);
  if (stored.portfolio.dim() != dim) {
    throw DataError("--competitor " + arg + ": dimension " +
                    std::to_string(stored.portfolio.dim()) + " does not match the model's " +
                    std::to_string(dim));
  }
  return Competitor::fixed(stored.portfolio, arg);
}

std::filesystem::path baseline_path(const std::filesystem::path& out) {
  std::filesystem::path p = out;
  const std::string ext = p.extension().string();
  p.replace_extension();
  p += ".baseline" + ext;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-deformed growth-optimal portfolio toolkit"};
  app.require_subcommand(1);

  // fit ----------------------------------------------------------------
  std::string fit_input, fit_tickers, fit_from, fit_to, fit_config, fit_out;
  std::uint64_t fit_seed = 0;
  int fit_threads = 1;
  CLI::App* fit = app.add_subcommand("fit", "fit a q-Gaussian model to price relatives");
  fit->add_option("--input", fit_input, "long-format CSV with date,ticker,close")->required();
  fit->add_option("--tickers", fit_tickers, "comma-separated ticker universe")->required();
  fit->add_option("--from", fit_from, "window start date (inclusive, ISO-8601)");
  fit->add_option("--to", fit_to, "window end date (inclusive, ISO-8601)");
  fit->add_option("--config", fit_config, "JSON run configuration");
  fit->add_option("--out", fit_out, "output model JSON")->required();
  auto* fit_seed_opt = fit->add_option("--seed", fit_seed, "override the fit seed");
  auto* fit_threads_opt = fit->add_option("--threads", fit_threads, "worker threads");

  // optimize -----------------------------------------------------------
  std::string opt_model, opt_config, opt_out, opt_method;
  std::uint64_t opt_seed = 0;
  int opt_threads = 1;
  long long opt_mc_samples = 0;
  CLI::App* optimize = app.add_subcommand("optimize", "maximize the growth q-rate on the simplex");
  optimize->add_option("--model", opt_model, "model JSON from `fit`")->required();
  optimize->add_option("--config", opt_config, "JSON run configuration");
  optimize->add_option("--out", opt_out, "output portfolio JSON")->required();
  optimize
      ->add_option("--method", opt_method, "objective evaluation method")
      ->check(CLI::IsMember({"adaptive_quadrature_1d", "cubature_nd", "monte_carlo"}));
  auto* opt_seed_opt = optimize->add_option("--seed", opt_seed, "override the sampling seed");
  auto* opt_threads_opt = optimize->add_option("--threads", opt_threads, "worker threads");
  auto* opt_mc_opt =
      optimize->add_option("--mc-samples", opt_mc_samples, "Monte Carlo sample count");

  // backtest -----------------------------------------------------------
  std::string bt_model, bt_portfolio, bt_input, bt_from, bt_to, bt_out, bt_plot, bt_baseline,
      bt_config;
  CLI::App* backtest = app.add_subcommand("backtest", "wealth curves of a portfolio on data");
  backtest->add_option("--model", bt_model, "model JSON (sets q for the q-wealth track)")
      ->required();
  backtest->add_option("--portfolio", bt_portfolio, "portfolio JSON")->required();
  backtest->add_option("--input", bt_input, "long-format CSV with date,ticker,close")->required();
  backtest->add_option("--from", bt_from, "window start date (inclusive)");
  backtest->add_option("--to", bt_to, "window end date (inclusive)");
  backtest->add_option("--out", bt_out, "output backtest CSV")->required();
  backtest->add_option("--plot", bt_plot, "also write an SVG wealth chart");
  backtest
      ->add_option("--baseline", bt_baseline,
                   "side-by-side classical baseline (writes <out>.baseline.csv)")
      ->check(CLI::IsMember({"gaussian"}));
  backtest->add_option("--config", bt_config, "JSON run configuration (baseline optimizer)");

  // simulate -----------------------------------------------------------
  std::string sim_model, sim_portfolio, sim_competitor = "uniform", sim_check, sim_out;
  int sim_days = 0, sim_threads = 1;
  long long sim_paths = 0;
  std::uint64_t sim_seed = 0;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo asymptotics checks");
  simulate->add_option("--model", sim_model, "model JSON")->required();
  simulate->add_option("--portfolio", sim_portfolio, "growth-optimal portfolio JSON")->required();
  simulate->add_option("--competitor", sim_competitor,
                       "uniform | follow-the-leader | portfolio JSON path");
  simulate->add_option("--days", sim_days, "horizon length")->required();
  simulate->add_option("--paths", sim_paths, "number of independent paths")->required();
  simulate->add_option("--seed", sim_seed, "root seed");
  simulate->add_option("--threads", sim_threads, "worker threads");
  simulate->add_option("--check", sim_check, "which verification to run")
      ->check(CLI::IsMember({"lln", "markov", "bound"}))
      ->required();
  simulate->add_option("--out", sim_out, "output checks CSV")->required();

  // metrics ------------------------------------------------------------
  std::string met_report, met_out;
  double met_risk_free = 0.0, met_target = 0.0;
  CLI::App* metrics = app.add_subcommand("metrics", "Sharpe/Sortino table from a backtest CSV");
  metrics->add_option("--report", met_report, "backtest CSV from `backtest`")->required();
  metrics->add_option("--out", met_out, "output metrics CSV (default: stdout)");
  metrics->add_option("--risk-free", met_risk_free, "per-day risk-free return");
  metrics->add_option("--target", met_target, "Sortino target return");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 1;
  }

  try {
    if (*fit) {
      RunConfig config = fit_config.empty() ? RunConfig{} : load_config(fit_config);
      if (fit_seed_opt->count() > 0) config.fit.de.seed = fit_seed;
      if (fit_threads_opt->count() > 0) config.fit.de.threads = fit_threads;
      const std::vector<std::string> tickers = parse_ticker_list(fit_tickers);
      const PriceRelativeSeries series =
          load_prices(fit_input, tickers, window_edge(fit_from), window_edge(fit_to));
      const FitResult result = fit_mle(series, config.fit);
      save_model(fit_out, {result.model, series.tickers, result.log_likelihood,
                           result.converged});
      std::cout << "fit: n=" << series.relatives.rows() << " d=" << series.relatives.cols()
                << " q=" << format_double(result.model.q().q())
                << " log_likelihood=" << format_double(result.log_likelihood)
                << " converged=" << (result.converged ? "true" : "false") << '\n';
    } else if (*optimize) {
      RunConfig config = opt_config.empty() ? RunConfig{} : load_config(opt_config);
      if (!opt_method.empty()) {
        if (opt_method == "adaptive_quadrature_1d") {
          config.integrator.method = IntegrationMethod::adaptive_quadrature_1d;
        } else if (opt_method == "cubature_nd") {
          config.integrator.method = IntegrationMethod::cubature_nd;
        } else {
          config.integrator.method = IntegrationMethod::monte_carlo;
        }
      }
      if (opt_seed_opt->count() > 0) {
        config.integrator.seed = opt_seed;
        config.optimizer_de.seed = opt_seed;
      }
      if (opt_threads_opt->count() > 0) config.optimizer_de.threads = opt_threads;
      if (opt_mc_opt->count() > 0) config.integrator.mc_samples = opt_mc_samples;
      const StoredModel stored = load_model(opt_model);
      const OptimalPortfolioResult result =
          optimal_portfolio(stored.model, config.integrator, config.optimizer_de);
      const double rate_error = std::max(result.rate.std_error, result.rate.error_estimate);
      save_portfolio(opt_out, {result.portfolio, stored.tickers, result.rate.value, rate_error});
      std::cout << "optimize: growth_q_rate=" << format_double(result.rate.value)
                << " error=" << format_double(rate_error)
                << " generations=" << result.optimizer.generations
                << " polish_steps=" << result.polish_steps << '\n';
    } else if (*backtest) {
      const StoredModel stored_model = load_model(bt_model);
      const StoredPortfolio stored_portfolio = load_portfolio(bt_portfolio);
      const PriceRelativeSeries series = load_prices(
          bt_input, stored_portfolio.tickers, window_edge(bt_from), window_edge(bt_to));
      const WealthTrajectory trajectory =
          wealth_relative(stored_portfolio.portfolio, series, stored_model.model.q());
      write_backtest_csv(bt_out, trajectory);
      std::cout << "metric,value\n";
      print_metrics(trajectory_metrics(trajectory, 0.0, 0.0));

      std::vector<PlotSeries> plot_series{{"portfolio wealth", trajectory.wealth},
                                          {"portfolio q-wealth", trajectory.q_wealth}};
      if (bt_baseline == "gaussian") {
        RunConfig config = bt_config.empty() ? RunConfig{} : load_config(bt_config);
        const MultivariateQGaussian base_model = gaussianize(stored_model.model);
        const OptimalPortfolioResult base =
            optimal_portfolio(base_model, config.integrator, config.optimizer_de);
        const WealthTrajectory base_trajectory =
            wealth_relative(base.portfolio, series, base_model.q());
        write_backtest_csv(baseline_path(bt_out), base_trajectory);
        print_metrics(trajectory_metrics(base_trajectory, 0.0, 0.0), "baseline_");
        plot_series.push_back({"gaussian baseline wealth", base_trajectory.wealth});
      }
      if (!bt_plot.empty()) write_wealth_svg(bt_plot, trajectory.days, plot_series);
    } else if (*simulate) {
      const StoredModel stored_model = load_model(sim_model);
      const StoredPortfolio stored_portfolio = load_portfolio(sim_portfolio);
      if (stored_portfolio.portfolio.dim() != stored_model.model.dim()) {
        throw DataError("simulate: portfolio and model dimensions disagree");
      }
      SimulationRun run{stored_model.model,
                        stored_portfolio.portfolio,
                        make_competitor(sim_competitor, stored_model.model.dim()),
                        sim_days,
                        sim_paths,
                        sim_seed,
                        sim_threads};
      std::vector<CheckRow> rows;
      if (sim_check == "lln") {
        IntegratorSpec tight;
        tight.rel_tol = 1e-10;
        tight.abs_tol = 1e-14;
        const GrowthRateEstimate w_star =
            growth_q_rate(stored_portfolio.portfolio, stored_model.model, tight);
        const LlnReport report = check_lln(run, w_star);
        rows = lln_check_rows(report);
        std::cout << "lln: w_star=" << format_double(report.w_star)
                  << " final_gap=" << format_double(report.final_gap)
                  << " deviation_shrinks=" << (report.deviation_shrinks ? "true" : "false")
                  << '\n';
      } else if (sim_check == "markov") {
        const double lambdas[] = {2.0, 5.0, 10.0};
        const MarkovReport report = check_markov_bound(run, lambdas);
        rows = markov_check_rows(report, run.horizon);
        std::cout << "markov: all_pass=" << (report.all_pass ? "true" : "false")
                  << " mean_q_wealth_ratio=" << format_double(report.mean_wealth_ratio) << '\n';
      } else {
        const FiniteNBoundReport report = check_finite_n_bound(run);
        rows = finite_n_check_rows(report);
        std::cout << "bound: within_budget=" << (report.within_budget ? "true" : "false")
                  << " violating_path_fraction="
                  << format_double(report.violating_path_fraction) << '\n';
      }
      write_checks_csv(sim_out, rows);
    } else if (*metrics) {
      const WealthTrajectory trajectory = read_backtest_csv(met_report);
      if (trajectory.daily_factor.empty()) {
        throw DataError("metrics: report has no data rows");
      }
      const std::vector<MetricRow> rows =
          trajectory_metrics(trajectory, met_risk_free, met_target);
      if (met_out.empty()) {
        std::cout << "metric,value\n";
        print_metrics(rows);
      } else {
        write_metrics_csv(met_out, rows);
      }
    }
  } catch (const DataError& e) {
    emit_error("data", e.what());
    return 2;
  } catch (const NumericalError& e) {
    emit_error("numerical", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    emit_error("usage", e.what());
    return 1;
  } catch (const std::domain_error& e) {
    emit_error("data", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("numerical", e.what());
    return 3;
  }
  return 0;
}

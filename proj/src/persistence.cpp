#include "qportfolio/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "qportfolio/errors.hpp"

namespace qportfolio {

namespace {

using json = nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  return out;
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

const json& require(const json& j, const char* key, const std::filesystem::path& path) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw DataError(path.string() + ": missing key '" + key + "'");
  }
  return *it;
}

std::vector<double> as_doubles(const json& j, const char* key,
                               const std::filesystem::path& path) {
  if (!j.is_array()) throw DataError(path.string() + ": '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) {
      throw DataError(path.string() + ": '" + key + "' must contain only numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::string> as_strings(const json& j, const char* key,
                                    const std::filesystem::path& path) {
  if (!j.is_array()) throw DataError(path.string() + ": '" + key + "' must be an array");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_string()) {
      throw DataError(path.string() + ": '" + key + "' must contain only strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

void dump_to(const std::filesystem::path& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

const char* method_name(IntegrationMethod m) {
  switch (m) {
    case IntegrationMethod::adaptive_quadrature_1d: return "adaptive_quadrature_1d";
    case IntegrationMethod::cubature_nd: return "cubature_nd";
    case IntegrationMethod::monte_carlo: return "monte_carlo";
  }
  throw std::logic_error("unknown integration method");
}

IntegrationMethod method_from_name(const std::string& name, const std::filesystem::path& path) {
  if (name == "adaptive_quadrature_1d") return IntegrationMethod::adaptive_quadrature_1d;
  if (name == "cubature_nd") return IntegrationMethod::cubature_nd;
  if (name == "monte_carlo") return IntegrationMethod::monte_carlo;
  throw DataError(path.string() + ": unknown integration method '" + name + "'");
}

json bounds_json(const std::pair<double, double>& b) { return json::array({b.first, b.second}); }

std::pair<double, double> bounds_from(const json& j, const char* key,
                                      const std::filesystem::path& path) {
  const std::vector<double> v = as_doubles(j, key, path);
  if (v.size() != 2) throw DataError(path.string() + ": '" + key + "' must have 2 entries");
  return {v[0], v[1]};
}

json de_json(const DEConfig& de) {
  json j;
  j["population_size"] = de.population_size;
  j["differential_weight"] = de.differential_weight;
  j["crossover_rate"] = de.crossover_rate;
  j["max_generations"] = de.max_generations;
  j["tolerance"] = de.tolerance;
  j["seed"] = de.seed;
  j["threads"] = de.threads;
  return j;
}

void de_from(const json& j, DEConfig& de, const std::filesystem::path& path) {
  if (!j.is_object()) throw DataError(path.string() + ": DE config must be an object");
  if (j.contains("population_size")) de.population_size = j["population_size"].get<int>();
  if (j.contains("differential_weight")) {
    de.differential_weight = j["differential_weight"].get<double>();
  }
  if (j.contains("crossover_rate")) de.crossover_rate = j["crossover_rate"].get<double>();
  if (j.contains("max_generations")) de.max_generations = j["max_generations"].get<int>();
  if (j.contains("tolerance")) de.tolerance = j["tolerance"].get<double>();
  if (j.contains("seed")) de.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) de.threads = j["threads"].get<int>();
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void save_model(const std::filesystem::path& path, const StoredModel& stored) {
  const int d = stored.model.dim();
  if (static_cast<int>(stored.tickers.size()) != d) {
    throw std::invalid_argument("save_model: tickers size must equal the model dimension");
  }
  json j;
  j["type"] = "qgaussian_model";
  j["d"] = d;
  j["q"] = stored.model.q().q();
  j["tickers"] = stored.tickers;
  j["mu"] = std::vector<double>(stored.model.mu().begin(), stored.model.mu().end());
  j["sigma"] = std::vector<double>(stored.model.sigma().begin(), stored.model.sigma().end());
  if (stored.log_likelihood) j["log_likelihood"] = *stored.log_likelihood;
  if (stored.converged) j["converged"] = *stored.converged;
  dump_to(path, j);
}

StoredModel load_model(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (require(j, "type", path).get<std::string>() != "qgaussian_model") {
    throw DataError(path.string() + ": not a model file");
  }
  const double q = require(j, "q", path).get<double>();
  std::vector<double> mu = as_doubles(require(j, "mu", path), "mu", path);
  std::vector<double> sigma = as_doubles(require(j, "sigma", path), "sigma", path);
  std::vector<std::string> tickers = as_strings(require(j, "tickers", path), "tickers", path);
  const int d = require(j, "d", path).get<int>();
  if (static_cast<int>(mu.size()) != d || static_cast<int>(sigma.size()) != d ||
      static_cast<int>(tickers.size()) != d) {
    throw DataError(path.string() + ": d, mu, sigma and tickers sizes disagree");
  }
  try {
    MultivariateQGaussian model(Deformation(q), std::move(mu), std::move(sigma));
    StoredModel stored{std::move(model), std::move(tickers), std::nullopt, std::nullopt};
    if (j.contains("log_likelihood")) stored.log_likelihood = j["log_likelihood"].get<double>();
    if (j.contains("converged")) stored.converged = j["converged"].get<bool>();
    return stored;
  } catch (const std::domain_error& e) {
    throw DataError(path.string() + ": invalid model parameters: " + e.what());
  }
}

void save_portfolio(const std::filesystem::path& path, const StoredPortfolio& stored) {
  if (static_cast<int>(stored.tickers.size()) != stored.portfolio.dim()) {
    throw std::invalid_argument("save_portfolio: tickers size must equal the portfolio dimension");
  }
  json j;
  j["type"] = "portfolio";
  j["tickers"] = stored.tickers;
  j["weights"] =
      std::vector<double>(stored.portfolio.weights().begin(), stored.portfolio.weights().end());
  if (stored.growth_q_rate) j["growth_q_rate"] = *stored.growth_q_rate;
  if (stored.growth_q_rate_error) j["growth_q_rate_error"] = *stored.growth_q_rate_error;
  dump_to(path, j);
}

StoredPortfolio load_portfolio(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (require(j, "type", path).get<std::string>() != "portfolio") {
    throw DataError(path.string() + ": not a portfolio file");
  }
  std::vector<double> weights = as_doubles(require(j, "weights", path), "weights", path);
  std::vector<std::string> tickers = as_strings(require(j, "tickers", path), "tickers", path);
  if (weights.size() != tickers.size()) {
    throw DataError(path.string() + ": weights and tickers sizes disagree");
  }
  try {
    StoredPortfolio stored{Portfolio(std::move(weights)), std::move(tickers), std::nullopt,
                           std::nullopt};
    if (j.contains("growth_q_rate")) stored.growth_q_rate = j["growth_q_rate"].get<double>();
    if (j.contains("growth_q_rate_error")) {
      stored.growth_q_rate_error = j["growth_q_rate_error"].get<double>();
    }
    return stored;
  } catch (const std::domain_error& e) {
    throw DataError(path.string() + ": invalid portfolio: " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (!j.is_object()) throw DataError(path.string() + ": config must be a JSON object");
  RunConfig config;
  if (j.contains("fit")) {
    const json& f = j["fit"];
    if (!f.is_object()) throw DataError(path.string() + ": 'fit' must be an object");
    if (f.contains("q_bounds")) config.fit.q_bounds = bounds_from(f["q_bounds"], "q_bounds", path);
    if (f.contains("mu_bounds")) {
      config.fit.mu_bounds = bounds_from(f["mu_bounds"], "mu_bounds", path);
    }
    if (f.contains("sigma_bounds")) {
      config.fit.sigma_bounds = bounds_from(f["sigma_bounds"], "sigma_bounds", path);
    }
    auto per_axis = [&](const char* key, std::vector<std::pair<double, double>>& out) {
      if (!f.contains(key)) return;
      const json& arr = f[key];
      if (!arr.is_array()) throw DataError(path.string() + ": '" + key + "' must be an array");
      for (const auto& b : arr) {
        const std::vector<double> v = as_doubles(b, key, path);
        if (v.size() != 2) {
          throw DataError(path.string() + ": '" + key + "' entries must have 2 numbers");
        }
        out.emplace_back(v[0], v[1]);
      }
    };
    per_axis("mu_bounds_per_axis", config.fit.mu_bounds_per_axis);
    per_axis("sigma_bounds_per_axis", config.fit.sigma_bounds_per_axis);
    if (f.contains("de")) de_from(f["de"], config.fit.de, path);
  }
  if (j.contains("integrator")) {
    const json& s = j["integrator"];
    if (!s.is_object()) throw DataError(path.string() + ": 'integrator' must be an object");
    if (s.contains("method")) {
      config.integrator.method = method_from_name(s["method"].get<std::string>(), path);
    }
    if (s.contains("rel_tol")) config.integrator.rel_tol = s["rel_tol"].get<double>();
    if (s.contains("abs_tol")) config.integrator.abs_tol = s["abs_tol"].get<double>();
    if (s.contains("max_evaluations")) {
      config.integrator.max_evaluations = s["max_evaluations"].get<long long>();
    }
    if (s.contains("mc_samples")) config.integrator.mc_samples = s["mc_samples"].get<long long>();
    if (s.contains("seed")) config.integrator.seed = s["seed"].get<std::uint64_t>();
  }
  if (j.contains("optimizer_de")) de_from(j["optimizer_de"], config.optimizer_de, path);
  return config;
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
  json j;
  json fit;
  fit["q_bounds"] = bounds_json(config.fit.q_bounds);
  fit["mu_bounds"] = bounds_json(config.fit.mu_bounds);
  fit["sigma_bounds"] = bounds_json(config.fit.sigma_bounds);
  if (!config.fit.mu_bounds_per_axis.empty()) {
    json arr = json::array();
    for (const auto& b : config.fit.mu_bounds_per_axis) arr.push_back(bounds_json(b));
    fit["mu_bounds_per_axis"] = arr;
  }
  if (!config.fit.sigma_bounds_per_axis.empty()) {
    json arr = json::array();
    for (const auto& b : config.fit.sigma_bounds_per_axis) arr.push_back(bounds_json(b));
    fit["sigma_bounds_per_axis"] = arr;
  }
  fit["de"] = de_json(config.fit.de);
  j["fit"] = fit;
  json s;
  s["method"] = method_name(config.integrator.method);
  s["rel_tol"] = config.integrator.rel_tol;
  s["abs_tol"] = config.integrator.abs_tol;
  s["max_evaluations"] = config.integrator.max_evaluations;
  s["mc_samples"] = config.integrator.mc_samples;
  s["seed"] = config.integrator.seed;
  j["integrator"] = s;
  j["optimizer_de"] = de_json(config.optimizer_de);
  dump_to(path, j);
}

void write_backtest_csv(const std::filesystem::path& path, const WealthTrajectory& trajectory) {
  const std::size_t n = trajectory.days.size();
  if (trajectory.daily_factor.size() != n || trajectory.wealth.size() != n ||
      trajectory.q_wealth.size() != n) {
    throw std::invalid_argument("write_backtest_csv: trajectory columns disagree in length");
  }
  std::ofstream out = open_out(path);
  out << "date,daily_factor,wealth,q_wealth\n";
  for (std::size_t k = 0; k < n; ++k) {
    out << trajectory.days[k] << ',' << format_double(trajectory.daily_factor[k]) << ','
        << format_double(trajectory.wealth[k]) << ',' << format_double(trajectory.q_wealth[k])
        << '\n';
  }
}

WealthTrajectory read_backtest_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "date,daily_factor,wealth,q_wealth") {
    throw DataError(path.string() + ": unexpected header '" + line + "'");
  }
  WealthTrajectory t;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string date, field;
    if (!std::getline(row, date, ',')) {
      throw DataError(path.string() + ": malformed row at line " + std::to_string(line_no));
    }
    double values[3];
    for (double& v : values) {
      if (!std::getline(row, field, ',')) {
        throw DataError(path.string() + ": malformed row at line " + std::to_string(line_no));
      }
      try {
        v = std::stod(field);
      } catch (const std::exception&) {
        throw DataError(path.string() + ": bad number '" + field + "' at line " +
                        std::to_string(line_no));
      }
    }
    t.days.push_back(std::move(date));
    t.daily_factor.push_back(values[0]);
    t.wealth.push_back(values[1]);
    t.q_wealth.push_back(values[2]);
  }
  return t;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out = open_out(path);
  out << "metric,value\n";
  for (const MetricRow& row : rows) {
    out << row.name << ',' << (row.value ? format_double(*row.value) : "undefined") << '\n';
  }
}

void write_checks_csv(const std::filesystem::path& path, const std::vector<CheckRow>& rows) {
  std::ofstream out = open_out(path);
  out << "check,n,statistic,value,bound\n";
  for (const CheckRow& row : rows) {
    out << row.check << ',' << row.n << ',' << row.statistic << ','
        << format_double(row.value) << ',' << format_double(row.bound) << '\n';
  }
}

std::vector<CheckRow> lln_check_rows(const LlnReport& report) {
  std::vector<CheckRow> rows;
  double prev_spread = std::numeric_limits<double>::quiet_NaN();
  for (const LlnCheckpoint& cp : report.checkpoints) {
    rows.push_back({"lln", cp.n, "mean_rate", cp.mean_rate, report.w_star});
    const double allowance = 3.0 * std::hypot(cp.se_mean, report.w_star_error);
    rows.push_back({"lln", cp.n, "abs_gap", std::abs(cp.mean_rate - report.w_star), allowance});
    const double spread = cp.p90 - cp.p10;
    rows.push_back({"lln", cp.n, "decile_spread", spread,
                    std::isnan(prev_spread) ? spread : prev_spread});
    prev_spread = spread;
  }
  return rows;
}

std::vector<CheckRow> markov_check_rows(const MarkovReport& report, int horizon) {
  std::vector<CheckRow> rows;
  for (const MarkovRow& row : report.rows) {
    rows.push_back({"markov", horizon, "exceedance_frequency(lambda=" + format_double(row.lambda) + ")",
                    row.frequency, row.bound + row.allowance});
  }
  rows.push_back({"markov", horizon, "mean_q_wealth_ratio", report.mean_wealth_ratio, 1.0});
  return rows;
}

std::vector<CheckRow> finite_n_check_rows(const FiniteNBoundReport& report) {
  std::vector<CheckRow> rows;
  rows.push_back({"finite_n", report.horizon, "mean_violations_per_path",
                  report.mean_violations_per_path, report.budget + report.allowance});
  rows.push_back({"finite_n", report.horizon, "violating_path_fraction",
                  report.violating_path_fraction, 0.01});
  rows.push_back({"finite_n", report.horizon, "total_violations",
                  static_cast<double>(report.total_violations),
                  static_cast<double>(report.paths) * (report.budget + report.allowance)});
  return rows;
}

namespace {

std::string svg_num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

constexpr const char* k_palette[] = {"#1f6fb2", "#d1495b", "#2e8657", "#8d6cab",
                                     "#c17f2f", "#4c4c4c"};

}  // namespace

void write_wealth_svg(const std::filesystem::path& path, const std::vector<std::string>& dates,
                      const std::vector<PlotSeries>& series) {
  const std::size_t n = dates.size();
  if (n < 2) throw std::invalid_argument("write_wealth_svg: need at least 2 days");
  for (const PlotSeries& s : series) {
    if (s.values.size() != n) {
      throw std::invalid_argument("write_wealth_svg: series '" + s.name +
                                  "' length does not match dates");
    }
  }
  if (series.empty()) throw std::invalid_argument("write_wealth_svg: no series");

  // Log-scale y over the finite positive values; infinities clip to the top
  // edge, zeros to the bottom.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const PlotSeries& s : series) {
    for (double v : s.values) {
      if (std::isfinite(v) && v > 0.0) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!(lo <= hi)) {
    lo = 0.1;
    hi = 10.0;
  }
  double log_lo = std::log10(lo) - 0.05;
  double log_hi = std::log10(hi) + 0.05;
  if (log_hi - log_lo < 0.1) {
    log_lo -= 0.05;
    log_hi += 0.05;
  }

  const double width = 960.0, height = 540.0;
  const double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;
  auto x_at = [&](std::size_t k) {
    return ml + plot_w * static_cast<double>(k) / static_cast<double>(n - 1);
  };
  auto y_at = [&](double v) {
    double t;
    if (std::isnan(v)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(v)) {
      t = v > 0.0 ? 1.0 : 0.0;
    } else if (v <= 0.0) {
      t = 0.0;
    } else {
      t = (std::log10(v) - log_lo) / (log_hi - log_lo);
      t = std::clamp(t, 0.0, 1.0);
    }
    return mt + plot_h * (1.0 - t);
  };

  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << svg_num(width) << ' '
      << svg_num(height) << "\">\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"" << svg_num(width) << "\" height=\""
      << svg_num(height) << "\" fill=\"#ffffff\"/>\n";
  out << "  <text x=\"" << svg_num(ml) << "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"16\" fill=\"#222222\">wealth relative (log scale)</text>\n";

  // Decade grid lines.
  const int first_decade = static_cast<int>(std::ceil(log_lo));
  const int last_decade = static_cast<int>(std::floor(log_hi));
  for (int e = first_decade; e <= last_decade; ++e) {
    const double y = y_at(std::pow(10.0, e));
    out << "  <line x1=\"" << svg_num(ml) << "\" y1=\"" << svg_num(y) << "\" x2=\""
        << svg_num(ml + plot_w) << "\" y2=\"" << svg_num(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "  <text x=\"" << svg_num(ml - 8.0) << "\" y=\"" << svg_num(y + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\" "
           "text-anchor=\"end\">1e" << e << "</text>\n";
  }

  // A handful of date labels along the x axis.
  const std::size_t label_count = std::min<std::size_t>(6, n);
  for (std::size_t i = 0; i < label_count; ++i) {
    const std::size_t k = i * (n - 1) / (label_count - 1 == 0 ? 1 : label_count - 1);
    out << "  <text x=\"" << svg_num(x_at(k)) << "\" y=\"" << svg_num(height - mb + 18.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\" "
           "text-anchor=\"middle\">" << dates[k] << "</text>\n";
  }

  out << "  <rect x=\"" << svg_num(ml) << "\" y=\"" << svg_num(mt) << "\" width=\""
      << svg_num(plot_w) << "\" height=\"" << svg_num(plot_h)
      << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = k_palette[s % (sizeof k_palette / sizeof k_palette[0])];
    out << "  <polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < n; ++k) {
      const double y = y_at(series[s].values[k]);
      if (std::isnan(y)) continue;
      if (!first) out << ' ';
      out << svg_num(x_at(k)) << ',' << svg_num(y);
      first = false;
    }
    out << "\"/>\n";
    const double ly = mt + 16.0 + 16.0 * static_cast<double>(s);
    out << "  <line x1=\"" << svg_num(ml + 10.0) << "\" y1=\"" << svg_num(ly - 4.0)
        << "\" x2=\"" << svg_num(ml + 34.0) << "\" y2=\"" << svg_num(ly - 4.0) << "\" stroke=\""
        << color << "\" stroke-width=\"2\"/>\n";
    out << "  <text x=\"" << svg_num(ml + 40.0) << "\" y=\"" << svg_num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\">" << series[s].name
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace qportfolio

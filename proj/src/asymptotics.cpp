#include "qportfolio/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qportfolio/errors.hpp"
#include "qportfolio/qalgebra.hpp"
#include "qportfolio/rng.hpp"
#include "parallel_util.hpp"

namespace qportfolio {

namespace {

// One market day conditioned on x >= 0 (componentwise rejection).
void draw_conditioned(const MultivariateQGaussian& model, RngStream& rng,
                      std::span<double> out) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    sample(model, rng, out);
    bool ok = true;
    for (double v : out) {
      if (v < 0.0) {
        ok = false;
        break;
      }
    }
    if (ok) return;
  }
  throw NumericalError("simulate: rejection rate too high (model mass is mostly negative)");
}

double decile(const std::vector<double>& sorted_values, double level) {
  const std::size_t n = sorted_values.size();
  const double pos = level * static_cast<double>(n - 1);
  const std::size_t idx = static_cast<std::size_t>(std::llround(pos));
  return sorted_values[std::min(idx, n - 1)];
}

}  // namespace

Competitor Competitor::fixed(Portfolio portfolio, std::string name) {
  Competitor c;
  c.fixed_ = std::move(portfolio);
  c.name_ = std::move(name);
  return c;
}

Competitor Competitor::causal(CausalRule rule, std::string name) {
  if (!rule) throw std::invalid_argument("Competitor: empty causal rule");
  Competitor c;
  c.rule_ = std::move(rule);
  c.name_ = std::move(name);
  return c;
}

Portfolio Competitor::choose(const Matrix& history, int dim) const {
  if (fixed_) {
    if (fixed_->dim() != dim) throw std::invalid_argument("Competitor: dimension mismatch");
    return *fixed_;
  }
  Portfolio p = rule_(history);
  if (p.dim() != dim) throw std::invalid_argument("Competitor: rule returned wrong dimension");
  return p;
}

Competitor follow_the_leader(int dim) {
  if (dim < 1) throw std::invalid_argument("follow_the_leader: dimension must be >= 1");
  return Competitor::causal(
      [dim](const Matrix& history) {
        std::vector<double> w(static_cast<std::size_t>(dim), 0.0);
        if (history.rows() == 0) {
          std::fill(w.begin(), w.end(), 1.0 / dim);
          return Portfolio(std::move(w));
        }
        if (history.cols() != dim) {
          throw std::invalid_argument("follow_the_leader: history dimension mismatch");
        }
        int leader = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < dim; ++c) {
          double log_growth = 0.0;
          for (int r = 0; r < history.rows(); ++r) log_growth += std::log(history(r, c));
          if (log_growth > best) {
            best = log_growth;
            leader = c;
          }
        }
        w[static_cast<std::size_t>(leader)] = 1.0;
        return Portfolio(std::move(w));
      },
      "follow-the-leader");
}

void SimulationRun::validate() const {
  if (horizon < 4) throw std::invalid_argument("SimulationRun: horizon must be >= 4");
  if (paths < 2) throw std::invalid_argument("SimulationRun: paths must be >= 2");
  if (threads < 1) throw std::invalid_argument("SimulationRun: threads must be >= 1");
  if (b_star.dim() != model.dim()) {
    throw std::invalid_argument("SimulationRun: portfolio/model dimension mismatch");
  }
}

std::vector<Matrix> simulate_market(const MultivariateQGaussian& model, int horizon,
                                    long long paths, std::uint64_t seed) {
  if (horizon < 1 || paths < 1) {
    throw std::invalid_argument("simulate_market: horizon and paths must be >= 1");
  }
  const RngStream root(seed);
  std::vector<Matrix> out(static_cast<std::size_t>(paths));
  for (long long p = 0; p < paths; ++p) {
    RngStream rng = root.derive(static_cast<std::uint64_t>(p));
    Matrix path(horizon, model.dim());
    for (int day = 0; day < horizon; ++day) draw_conditioned(model, rng, path.row(day));
    out[static_cast<std::size_t>(p)] = std::move(path);
  }
  return out;
}

namespace {

std::vector<int> lln_checkpoints(int horizon) {
  std::vector<int> out;
  for (int n : {100, 1000, 10000}) {
    if (n <= horizon) out.push_back(n);
  }
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

}  // namespace

LlnReport check_lln(const SimulationRun& run, const GrowthRateEstimate& w_star) {
  run.validate();
  const int h = run.horizon;
  const std::vector<int> checkpoints = lln_checkpoints(h);
  const std::size_t n_checks = checkpoints.size();
  const RngStream root(run.seed);

  // rates[c][p] = (1/n_c) ln_q S_{n_c} on path p.
  std::vector<std::vector<double>> rates(
      n_checks, std::vector<double>(static_cast<std::size_t>(run.paths)));
  detail::parallel_for(run.paths, run.threads, [&](long long p) {
    RngStream rng = root.derive(static_cast<std::uint64_t>(p));
    std::vector<double> x(static_cast<std::size_t>(run.model.dim()));
    QProductAccumulator acc(run.model.q());
    std::size_t next = 0;
    for (int day = 1; day <= h && next < n_checks; ++day) {
      draw_conditioned(run.model, rng, x);
      acc.multiply(run.b_star.factor(x));
      while (next < n_checks && day == checkpoints[next]) {
        rates[next][static_cast<std::size_t>(p)] = acc.log_sum() / day;
        ++next;
      }
    }
  });

  LlnReport report;
  report.w_star = w_star.value;
  report.w_star_error = std::hypot(w_star.std_error, w_star.error_estimate);
  for (std::size_t c = 0; c < n_checks; ++c) {
    const auto& r = rates[c];
    const double n_paths = static_cast<double>(run.paths);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= n_paths;
    double ss = 0.0, abs_dev = 0.0;
    for (double v : r) {
      ss += (v - mean) * (v - mean);
      abs_dev += std::abs(v - report.w_star);
    }
    std::vector<double> sorted(r);
    std::sort(sorted.begin(), sorted.end());
    LlnCheckpoint cp;
    cp.n = checkpoints[c];
    cp.mean_rate = mean;
    cp.se_mean = std::sqrt(ss / (n_paths - 1.0) / n_paths);
    cp.mean_abs_dev = abs_dev / n_paths;
    cp.p10 = decile(sorted, 0.1);
    cp.p90 = decile(sorted, 0.9);
    report.checkpoints.push_back(cp);
  }
  report.deviation_shrinks = true;
  report.spread_shrinks = true;
  for (std::size_t c = 1; c < report.checkpoints.size(); ++c) {
    const auto& prev = report.checkpoints[c - 1];
    const auto& cur = report.checkpoints[c];
    if (!(cur.mean_abs_dev < prev.mean_abs_dev)) report.deviation_shrinks = false;
    if (!(cur.p90 - cur.p10 < prev.p90 - prev.p10)) report.spread_shrinks = false;
  }
  report.final_gap = std::abs(report.checkpoints.back().mean_rate - report.w_star);
  return report;
}

namespace {

const Competitor& require_competitor(const SimulationRun& run, const char* caller) {
  if (!run.competitor) {
    throw std::invalid_argument(std::string(caller) + ": run has no competitor");
  }
  return *run.competitor;
}

// Walks one path and returns ln( S_n^(q)(b) / S_n^(q)(b*) ) at n = horizon,
// optionally recording it for every prefix n (1-based day n at index n-1).
// Causal competitors see the history of all days strictly before the
// current one.
double path_q_log_ratio(const SimulationRun& run, const Competitor& competitor, RngStream rng,
                        std::vector<double>* by_day) {
  const int h = run.horizon;
  const int d = run.model.dim();
  const bool causal = !competitor.is_fixed();
  Matrix history(0, d);
  std::optional<Portfolio> fixed_b;
  if (!causal) fixed_b = competitor.choose(history, d);
  std::vector<double> x(static_cast<std::size_t>(d));
  QProductAccumulator acc_b(run.model.q());
  QProductAccumulator acc_star(run.model.q());
  for (int day = 0; day < h; ++day) {
    draw_conditioned(run.model, rng, x);
    const Portfolio b = causal ? competitor.choose(history, d) : *fixed_b;
    if (causal) history.append_row(x);
    acc_b.multiply(b.factor(x));
    acc_star.multiply(run.b_star.factor(x));
    if (by_day) (*by_day)[static_cast<std::size_t>(day)] = log_ratio(acc_b, acc_star);
  }
  return log_ratio(acc_b, acc_star);
}

// NaN marks the both-sides-saturated ratio; every check treats it as the bad
// outcome rather than silently passing it.
bool exceeds(double log_ratio_value, double log_threshold) {
  return std::isnan(log_ratio_value) || log_ratio_value > log_threshold;
}

}  // namespace

MarkovReport check_markov_bound(const SimulationRun& run, std::span<const double> lambdas) {
  run.validate();
  const Competitor& competitor = require_competitor(run, "check_markov_bound");
  if (lambdas.empty()) throw std::invalid_argument("check_markov_bound: no lambdas");
  for (double l : lambdas) {
    if (!(l >= 1.0)) throw std::invalid_argument("check_markov_bound: lambdas must be >= 1");
  }
  const RngStream root(run.seed);
  std::vector<double> log_ratios(static_cast<std::size_t>(run.paths));
  detail::parallel_for(run.paths, run.threads, [&](long long p) {
    log_ratios[static_cast<std::size_t>(p)] =
        path_q_log_ratio(run, competitor, root.derive(static_cast<std::uint64_t>(p)), nullptr);
  });

  MarkovReport report;
  report.all_pass = true;
  double mean_ratio = 0.0;
  for (double lr : log_ratios) mean_ratio += std::exp(lr);
  report.mean_wealth_ratio = mean_ratio / static_cast<double>(run.paths);
  for (double lambda : lambdas) {
    const double log_lambda = std::log(lambda);
    long long exceed = 0;
    for (double lr : log_ratios) {
      if (exceeds(lr, log_lambda)) ++exceed;
    }
    MarkovRow row;
    row.lambda = lambda;
    row.frequency = static_cast<double>(exceed) / static_cast<double>(run.paths);
    row.bound = 1.0 / lambda;
    row.allowance =
        3.0 * std::sqrt(row.bound * (1.0 - row.bound) / static_cast<double>(run.paths));
    row.pass = row.frequency <= row.bound + row.allowance;
    report.all_pass = report.all_pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

FiniteNBoundReport check_finite_n_bound(const SimulationRun& run, int n0) {
  run.validate();
  const Competitor& competitor = require_competitor(run, "check_finite_n_bound");
  if (n0 < 1) throw std::invalid_argument("check_finite_n_bound: n0 must be >= 1");
  if (n0 > run.horizon) {
    throw std::invalid_argument("check_finite_n_bound: n0 exceeds the horizon");
  }
  // The summed Markov bounds P(ratio_n > n^2) <= n^-2 need 2q > 1 to keep
  // the q-generalized chain summable; below that the envelope says nothing.
  if (!(run.model.q().q() > 0.5)) {
    throw std::domain_error("check_finite_n_bound: requires q > 0.5");
  }
  const RngStream root(run.seed);
  std::vector<long long> violations(static_cast<std::size_t>(run.paths), 0);
  detail::parallel_for(run.paths, run.threads, [&](long long p) {
    std::vector<double> by_day(static_cast<std::size_t>(run.horizon));
    path_q_log_ratio(run, competitor, root.derive(static_cast<std::uint64_t>(p)), &by_day);
    long long count = 0;
    for (int n = n0; n <= run.horizon; ++n) {
      // (1/n) ln_q(ratio) > (n^(2-2q) - 1)/(n (1-q))  <=>  ratio > n^2,
      // by monotonicity of ln_q; tested in log space.
      if (exceeds(by_day[static_cast<std::size_t>(n - 1)], 2.0 * std::log(n))) ++count;
    }
    violations[static_cast<std::size_t>(p)] = count;
  });

  FiniteNBoundReport report;
  report.n0 = n0;
  report.horizon = run.horizon;
  report.paths = run.paths;
  report.total_violations = 0;
  long long violating_paths = 0;
  for (long long v : violations) {
    report.total_violations += v;
    if (v > 0) ++violating_paths;
  }
  report.mean_violations_per_path =
      static_cast<double>(report.total_violations) / static_cast<double>(run.paths);
  report.violating_path_fraction =
      static_cast<double>(violating_paths) / static_cast<double>(run.paths);
  report.budget = 0.0;
  for (int n = n0; n <= run.horizon; ++n) report.budget += 1.0 / (static_cast<double>(n) * n);
  double var = 0.0;
  for (long long v : violations) {
    const double dev = static_cast<double>(v) - report.mean_violations_per_path;
    var += dev * dev;
  }
  var /= std::max(1.0, static_cast<double>(run.paths - 1));
  report.allowance = 3.0 * std::sqrt(var / static_cast<double>(run.paths));
  report.within_budget = report.mean_violations_per_path <= report.budget + report.allowance;
  return report;
}

}  // namespace qportfolio

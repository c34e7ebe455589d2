#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qportfolio/matrix.hpp"
#include "qportfolio/optimizer.hpp"
#include "qportfolio/qgaussian.hpp"

namespace qportfolio {

// A competitor strategy: either fixed weights, or a causal rule that sees
// the market history strictly before the current day (rows 0..k-1 when
// choosing the day-k portfolio).
class Competitor {
 public:
  using CausalRule = std::function<Portfolio(const Matrix& history)>;

  static Competitor fixed(Portfolio portfolio, std::string name = "fixed");
  static Competitor causal(CausalRule rule, std::string name);

  bool is_fixed() const noexcept { return static_cast<bool>(fixed_); }
  const std::string& name() const noexcept { return name_; }
  Portfolio choose(const Matrix& history, int dim) const;

 private:
  Competitor() = default;
  std::optional<Portfolio> fixed_;
  CausalRule rule_;
  std::string name_;
};

// Follow-the-leader: holds everything in the single asset with the largest
// cumulative factor so far (uniform on day 0, ties to the lowest index).
Competitor follow_the_leader(int dim);

// Common setup for the Monte Carlo verification checks: i.i.d. markets from
// `model` conditioned on x >= 0, `paths` independent paths of `horizon`
// days.  Path p uses the substream derive(seed, p), so results do not depend
// on `threads`.  The competitor is only consulted by the ratio checks.
struct SimulationRun {
  MultivariateQGaussian model;
  Portfolio b_star;
  std::optional<Competitor> competitor;
  int horizon = 0;
  long long paths = 0;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;  // throws std::invalid_argument
};

// Simulated market paths, materialized (for modest sizes / inspection):
// element p is a horizon x dim matrix of price relatives.
std::vector<Matrix> simulate_market(const MultivariateQGaussian& model, int horizon,
                                    long long paths, std::uint64_t seed);

// --- Law of large numbers:  (1/n) ln_q S_n^(q)(b*)  ->  W_q*(b*).
// ln_q S_n^(q) is taken through the q-product homomorphism (the per-day
// q-log sum), so the rate stays informative past the q > 1 saturation cap
// where the materialized q-wealth reads +inf.
// Checkpoints are the decades {100, 1000, 10000} clipped to the horizon,
// with the horizon itself always included.
struct LlnCheckpoint {
  int n;
  double mean_rate;      // path average of (1/n) ln_q S_n^(q)
  double se_mean;        // standard error of that average
  double mean_abs_dev;   // path average of |(1/n) ln_q S_n^(q) - w_star|
  double p10, p90;       // cross-path deciles of (1/n) ln_q S_n^(q)
};
struct LlnReport {
  double w_star;                          // reference rate (tight quadrature)
  double w_star_error;                    // its error estimate
  std::vector<LlnCheckpoint> checkpoints;
  bool deviation_shrinks;                 // mean_abs_dev decreases along checkpoints
  bool spread_shrinks;                    // p90 - p10 decreases along checkpoints
  double final_gap;                       // |mean_rate(horizon) - w_star|
};
LlnReport check_lln(const SimulationRun& run, const GrowthRateEstimate& w_star);

// --- Markov bound:  P( S_n^(q)(b) > lambda S_n^(q)(b*) ) <= 1/lambda for the
// q-wealth of any competitor b.  Checked empirically at n = horizon with a
// 3-sigma binomial allowance on the observed frequency.  A path where both
// q-wealths saturate to the cutoff counts as an exceedance.
struct MarkovRow {
  double lambda;
  double frequency;   // observed fraction of paths with ratio > lambda
  double bound;       // 1/lambda
  double allowance;   // 3 sqrt(bound (1 - bound) / paths)
  bool pass;          // frequency <= bound + allowance
};
struct MarkovReport {
  std::vector<MarkovRow> rows;
  double mean_wealth_ratio;  // path mean of S_n^(q)(b)/S_n^(q)(b*); the bound's
                             // premise says <= 1, reported for inspection only
  bool all_pass;
};
MarkovReport check_markov_bound(const SimulationRun& run, std::span<const double> lambdas);

// --- Finite-n envelope (the Borel-Cantelli ingredient): for each path and
// each n in [n0, horizon], flag a violation when
//     (1/n) ln_q( S_n^(q)(b) / S_n^(q)(b*) )  >  (n^(2-2q) - 1) / (n (1-q)),
// i.e. when the q-wealth ratio exceeds n^2.  Summing the Markov bounds gives
// the expected-violation budget sum_{n >= n0} 1/n^2; the check passes when
// the observed mean violations per path stay within it (3-sigma allowance).
// Requires q > 0.5, otherwise sum n^{-2q} diverges and the argument fails.
struct FiniteNBoundReport {
  int n0;
  int horizon;
  long long paths;
  long long total_violations;       // across all paths and n in [n0, horizon]
  double mean_violations_per_path;
  double violating_path_fraction;   // fraction of paths with >= 1 violation
  double budget;                    // sum_{n0 <= n <= horizon} 1/n^2
  bool within_budget;               // mean violations <= budget + allowance
  double allowance;
};
FiniteNBoundReport check_finite_n_bound(const SimulationRun& run, int n0 = 100);

}  // namespace qportfolio

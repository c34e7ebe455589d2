#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace qportfolio {

class RngStream;

using ScalarField = std::function<double(std::span<const double>)>;

// Integration region: an axis-aligned box whose bounds may be infinite.
// Infinite or semi-infinite axes are folded to (-1, 1) internally with the
// x = tan(pi u / 2) family of maps before any rule is applied.
struct Region {
  std::vector<std::pair<double, double>> axes;

  static Region box(std::vector<std::pair<double, double>> axes);
  static Region full_space(int dim);            // (-inf, inf)^dim
  static Region orthant(int dim, double lo = 0.0);  // [lo, inf)^dim

  int dim() const noexcept { return static_cast<int>(axes.size()); }
  void validate() const;  // finite-or-infinite, lo < hi on every axis
};

enum class IntegrationMethod { adaptive_quadrature_1d, cubature_nd, monte_carlo };

struct IntegratorSpec {
  IntegrationMethod method = IntegrationMethod::cubature_nd;
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  long long max_evaluations = 10'000'000;
  // Monte Carlo only:
  long long mc_samples = 200'000;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  long long evaluations = 0;
};

// Importance-sampling proposal for the Monte Carlo method: `draw` fills one
// point, `density` is its pdf on the region (must be > 0 wherever the
// integrand is nonzero).
struct Proposal {
  std::function<void(RngStream&, std::span<double>)> draw;
  ScalarField density;
};

// Integrate f over the region.  adaptive_quadrature_1d is Gauss-Kronrod
// 15(7) with bisection, dim must be 1; cubature_nd is the Genz-Malik 7(5)
// rule with region halving along the worst axis, dim >= 2; monte_carlo
// works in any dimension (uniform over the folded unit cube unless a
// proposal is given).  A budget exhausted before the tolerances are met
// returns the best estimate with converged = false; integrand values that
// are not finite raise NumericalError.
IntegralResult integrate(const ScalarField& f, const Region& region, const IntegratorSpec& spec);
IntegralResult integrate(const ScalarField& f, const Region& region, const IntegratorSpec& spec,
                         const Proposal& proposal);

// Differential evolution (DE/rand/1/bin), maximizing.
struct DEConfig {
  int population_size = 0;  // 0 = 10 * dimension
  double differential_weight = 0.8;
  double crossover_rate = 0.9;
  int max_generations = 300;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
  int threads = 1;  // worker threads for objective evaluation

  void validate() const;  // throws std::invalid_argument
};

struct DEResult {
  std::vector<double> argmax;
  double value = 0.0;
  std::vector<double> trace;  // initial best, then best value per generation
  bool converged = false;
  int generations = 0;
};

// Maximize f over the box `bounds`.  Mutants falling outside the box are
// folded back by reflection.  Non-finite objective values are treated as
// "never better" (so -inf can mark infeasible points); if the entire initial
// population is non-finite an OptimizationError (with trace) is thrown.
// Termination: the population's objective values have collapsed to within
// `tolerance` of each other (converged), or max_generations is hit.
//
// Determinism: all random draws happen on the main thread; worker threads
// only evaluate the objective.  Results are identical for any `threads`.
DEResult differential_evolution(const ScalarField& f,
                                std::span<const std::pair<double, double>> bounds,
                                const DEConfig& config);

}  // namespace qportfolio

#include "qportfolio/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qportfolio/errors.hpp"
#include "qportfolio/rng.hpp"

namespace qportfolio {

namespace {

constexpr double k_inf = std::numeric_limits<double>::infinity();

double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

// b . mu and ||b o sigma||_2, accumulated in sorted order so the results are
// bitwise invariant under simultaneous permutation of (b, model axes).
void portfolio_location_scale(std::span<const double> w, const MultivariateQGaussian& model,
                              double& mu_p, double& sigma_p) {
  const int d = model.dim();
  std::vector<double> terms(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) terms[static_cast<std::size_t>(i)] = w[i] * model.mu()[i];
  mu_p = sorted_sum(terms);
  for (int i = 0; i < d; ++i) {
    const double t = w[i] * model.sigma()[i];
    terms[static_cast<std::size_t>(i)] = t * t;
  }
  sigma_p = std::sqrt(sorted_sum(terms));
}

// The 1-d law of the standardized portfolio factor: for spherical S the
// linear combination b.X equals mu_p + sigma_p S_1 exactly, and the marginal
// S_1 is a univariate q-Gaussian with
//   m'' = 1/(1-q) + (d-1)/2,  q'' = 1 - 1/m'',  width^2 = m / m''.
UnivariateQGaussian portfolio_factor_law(const MultivariateQGaussian& model) {
  const Deformation q = model.q();
  if (q.classical()) return UnivariateQGaussian(Deformation(1.0), 0.0, 1.0);
  const double m = 1.0 / q.one_minus_q();
  const double m2 = m + 0.5 * (model.dim() - 1);
  const double q2 = 1.0 - 1.0 / m2;
  return UnivariateQGaussian(Deformation(q2), 0.0, std::sqrt(m / m2));
}

struct GrowthQuadrature {
  const MultivariateQGaussian& model;
  IntegratorSpec reported_spec;
  IntegratorSpec spec_1d;

  explicit GrowthQuadrature(const MultivariateQGaussian& m, const IntegratorSpec& spec)
      : model(m), reported_spec(spec), spec_1d(spec) {
    spec_1d.method = IntegrationMethod::adaptive_quadrature_1d;
  }

  GrowthRateEstimate operator()(std::span<const double> w) const {
    double mu_p, sigma_p;
    portfolio_location_scale(w, model, mu_p, sigma_p);
    const UnivariateQGaussian law = portfolio_factor_law(model);
    const Deformation q = model.q();

    GrowthRateEstimate out;
    out.method = reported_spec;

    // Integrate in the portfolio-value variable v = mu_p + sigma_p u, over
    // v > 0 intersected with the law's support.
    const double support =
        law.q.one_minus_q() > 0.0 ? law.sigma / std::sqrt(law.q.one_minus_q()) : k_inf;
    const double v_lo = std::max(0.0, mu_p - sigma_p * support);
    const double v_hi = std::isinf(support) ? k_inf : mu_p + sigma_p * support;
    if (!(v_lo < v_hi)) {
      // The portfolio factor is (almost surely) non-positive.
      out.value = -k_inf;
      out.converged = true;
      out.rejection_fraction = 1.0;
      return out;
    }

    const auto mass_at = [&](double v) { return density(law, (v - mu_p) / sigma_p) / sigma_p; };
    const ScalarField weighted = [&](std::span<const double> v) {
      return v[0] > 0.0 ? q_log(q, v[0]) * mass_at(v[0]) : 0.0;
    };
    const ScalarField mass = [&](std::span<const double> v) { return mass_at(v[0]); };

    // Pre-split around the bulk so a narrow peak cannot hide from the
    // initial rule application.
    std::vector<double> cuts{v_lo};
    const double bulk = 8.0 * sigma_p * law.sigma;
    for (double edge : {mu_p - bulk, mu_p + bulk}) {
      if (edge > cuts.back() && edge < v_hi) cuts.push_back(edge);
    }
    cuts.push_back(v_hi);

    double numerator = 0.0, num_error = 0.0;
    double denominator = 0.0, den_error = 0.0;
    bool converged = true;
    const auto accumulate = [&](const ScalarField& num_f, const ScalarField& den_f,
                                const Region& region) {
      const IntegralResult num = integrate(num_f, region, spec_1d);
      const IntegralResult den = integrate(den_f, region, spec_1d);
      numerator += num.value;
      num_error += num.error_estimate;
      denominator += den.value;
      den_error += den.error_estimate;
      converged = converged && num.converged && den.converged;
      out.evaluations += num.evaluations + den.evaluations;
    };

    // ln_q(v) ~ -v^(1-q)/(q-1) as v -> 0+, so a support edge truncated at
    // v = 0 is an integrable endpoint singularity for q < 2 and a
    // non-integrable one (conditional growth -inf) for q >= 2.
    const bool singular_origin = v_lo == 0.0 && q.one_minus_q() < 0.0;
    std::size_t first_segment = 0;
    if (singular_origin && q.q() >= 2.0) {
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const IntegralResult den = integrate(mass, Region::box({{cuts[k], cuts[k + 1]}}), spec_1d);
        denominator += den.value;
        out.evaluations += den.evaluations;
      }
      out.value = -k_inf;
      out.converged = true;
      out.rejection_fraction = std::max(0.0, 1.0 - denominator);
      return out;
    }
    if (singular_origin) {
      if (!std::isfinite(cuts[1])) {
        cuts.insert(cuts.begin() + 1, std::max(sigma_p * law.sigma, 1.0));
      }
      // Substitute v = c s^p on [0, c], with p large enough that the
      // transformed integrand vanishes at least linearly at s = 0.
      const double c = cuts[1];
      const double p = std::ceil(2.0 / (2.0 - q.q()));
      const auto v_and_jacobian = [c, p](double s, double& v, double& jac) {
        v = c * std::pow(s, p);
        jac = c * p * std::pow(s, p - 1.0);
      };
      const ScalarField weighted_s = [&](std::span<const double> s) {
        double v, jac;
        v_and_jacobian(s[0], v, jac);
        return v > 0.0 ? q_log(q, v) * mass_at(v) * jac : 0.0;
      };
      const ScalarField mass_s = [&](std::span<const double> s) {
        double v, jac;
        v_and_jacobian(s[0], v, jac);
        return mass_at(v) * jac;
      };
      accumulate(weighted_s, mass_s, Region::box({{0.0, 1.0}}));
      first_segment = 1;
    }
    for (std::size_t k = first_segment; k + 1 < cuts.size(); ++k) {
      accumulate(weighted, mass, Region::box({{cuts[k], cuts[k + 1]}}));
    }
    if (!(denominator > 0.0)) {
      throw NumericalError("growth_q_rate: portfolio factor mass vanished numerically");
    }
    out.value = numerator / denominator;
    out.error_estimate =
        (num_error + std::abs(out.value) * den_error) / denominator;
    out.converged = converged;
    out.rejection_fraction = std::max(0.0, 1.0 - denominator);
    return out;
  }
};

}  // namespace

Portfolio::Portfolio(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw std::invalid_argument("Portfolio: empty weight vector");
  double sum = 0.0;
  for (double w : w_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::domain_error("Portfolio: weights must be finite and >= 0");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw std::domain_error("Portfolio: weights sum to " + std::to_string(sum) +
                            ", expected 1 within 1e-10");
  }
}

Portfolio Portfolio::uniform(int dim) {
  if (dim < 1) throw std::invalid_argument("Portfolio: dimension must be >= 1");
  return Portfolio(std::vector<double>(static_cast<std::size_t>(dim), 1.0 / dim));
}

double Portfolio::factor(std::span<const double> x) const {
  if (x.size() != w_.size()) throw std::invalid_argument("Portfolio: dimension mismatch");
  double f = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) f += w_[i] * x[i];
  return f;
}

Matrix draw_market_sample(const MultivariateQGaussian& model, long long count,
                          std::uint64_t seed, double* rejection_fraction) {
  if (count < 1) throw std::invalid_argument("draw_market_sample: count must be >= 1");
  RngStream rng(seed);
  Matrix draws(static_cast<int>(count), model.dim());
  std::vector<double> x(static_cast<std::size_t>(model.dim()));
  long long rejected = 0;
  const long long attempts_cap = 1000 * count;
  long long attempts = 0;
  for (long long r = 0; r < count;) {
    if (++attempts > attempts_cap) {
      throw NumericalError(
          "draw_market_sample: rejection rate too high (model mass is mostly negative)");
    }
    sample(model, rng, x);
    bool ok = true;
    for (double xi : x) {
      if (xi < 0.0) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++rejected;
      continue;
    }
    for (int c = 0; c < model.dim(); ++c) draws(static_cast<int>(r), c) = x[static_cast<std::size_t>(c)];
    ++r;
  }
  if (rejection_fraction) {
    *rejection_fraction = static_cast<double>(rejected) / static_cast<double>(attempts);
  }
  return draws;
}

double sample_growth_q_rate(const Portfolio& portfolio, Deformation q, const Matrix& sample) {
  if (sample.cols() != portfolio.dim()) {
    throw std::invalid_argument("sample_growth_q_rate: dimension mismatch");
  }
  if (sample.rows() < 1) throw std::invalid_argument("sample_growth_q_rate: empty sample");
  double sum = 0.0;
  for (int r = 0; r < sample.rows(); ++r) {
    const double v = portfolio.factor(sample.row(r));
    if (!(v > 0.0)) return -k_inf;  // ln_q undefined at a non-positive factor
    sum += q_log(q, v);
  }
  return sum / sample.rows();
}

GrowthRateEstimate growth_q_rate(const Portfolio& portfolio, const MultivariateQGaussian& model,
                                 const IntegratorSpec& spec) {
  spec.validate();
  if (portfolio.dim() != model.dim()) {
    throw std::invalid_argument("growth_q_rate: portfolio/model dimension mismatch");
  }
  if (spec.method == IntegrationMethod::monte_carlo) {
    double rejection = 0.0;
    const Matrix sample = draw_market_sample(model, spec.mc_samples, spec.seed, &rejection);
    double sum = 0.0, sum_sq = 0.0;
    long long n = sample.rows();
    for (int r = 0; r < sample.rows(); ++r) {
      const double v = portfolio.factor(sample.row(r));
      const double g = v > 0.0 ? q_log(model.q(), v) : -k_inf;
      sum += g;
      sum_sq += g * g;
    }
    GrowthRateEstimate out;
    out.method = spec;
    out.value = sum / static_cast<double>(n);
    const double var =
        std::max(0.0, sum_sq / static_cast<double>(n) - out.value * out.value);
    out.std_error = std::sqrt(var / static_cast<double>(n));
    out.converged = std::isfinite(out.value);
    out.evaluations = n;
    out.rejection_fraction = rejection;
    return out;
  }
  return GrowthQuadrature(model, spec)(portfolio.weights());
}

namespace {

// Euclidean projection onto the probability simplex (unique, so the result
// is equivariant no matter how the intermediate sort breaks ties).
std::vector<double> project_simplex(std::span<const double> y) {
  const int d = static_cast<int>(y.size());
  std::vector<double> u(y.begin(), y.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double running = 0.0;
  double theta = 0.0;
  int rho = 0;
  for (int j = 0; j < d; ++j) {
    running += u[static_cast<std::size_t>(j)];
    const double candidate = (running - 1.0) / (j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0.0) {
      rho = j + 1;
      theta = candidate;
    }
  }
  (void)rho;
  std::vector<double> w(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    w[static_cast<std::size_t>(i)] = std::max(0.0, y[static_cast<std::size_t>(i)] - theta);
  }
  return w;
}

std::vector<double> simplex_from_cube(std::span<const double> u) {
  double sum = 0.0;
  for (double v : u) sum += v;
  std::vector<double> w(u.size());
  if (sum == 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(u.size()));
    return w;
  }
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] / sum;
  return w;
}

// Renormalize a projection output so the weights sum to 1 exactly enough for
// the Portfolio invariant (the projection is exact up to rounding).
Portfolio as_portfolio(std::vector<double> w) {
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
  return Portfolio(std::move(w));
}

}  // namespace

OptimalPortfolioResult optimal_portfolio(const MultivariateQGaussian& model,
                                         const IntegratorSpec& spec, const DEConfig& de_config) {
  spec.validate();
  de_config.validate();
  const int d = model.dim();

  // Objective shared by DE (through the cube->simplex map) and the polish
  // (directly on weight vectors, which may sit slightly off the simplex
  // during finite-difference probes).
  std::function<double(std::span<const double>)> score_weights;
  Matrix fixed_sample;
  if (spec.method == IntegrationMethod::monte_carlo) {
    fixed_sample = draw_market_sample(model, spec.mc_samples, spec.seed, nullptr);
    score_weights = [&model, &fixed_sample](std::span<const double> w) {
      double sum = 0.0;
      for (int r = 0; r < fixed_sample.rows(); ++r) {
        double v = 0.0;
        const auto row = fixed_sample.row(r);
        for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * row[i];
        if (!(v > 0.0)) return -k_inf;
        sum += q_log(model.q(), v);
      }
      return sum / fixed_sample.rows();
    };
  } else {
    // The optimization loop only needs enough accuracy to rank candidates;
    // the final report re-integrates at the caller's tolerances.
    IntegratorSpec loop_spec = spec;
    loop_spec.rel_tol = std::max(spec.rel_tol, 1e-10);
    GrowthQuadrature quad(model, loop_spec);
    score_weights = [quad](std::span<const double> w) { return quad(w).value; };
  }

  const ScalarField de_objective = [&](std::span<const double> u) {
    return score_weights(simplex_from_cube(u));
  };
  std::vector<std::pair<double, double>> cube(static_cast<std::size_t>(d), {0.0, 1.0});
  DEResult de = differential_evolution(de_objective, cube, de_config);

  // Deterministic projected-gradient polish on the simplex itself.
  std::vector<double> w = simplex_from_cube(de.argmax);
  double fw = score_weights(w);
  long long polish_steps = 0;
  int noise_steps = 0;
  const double fd_step = 1e-6;
  double step = 0.05;
  std::vector<double> grad(static_cast<std::size_t>(d));
  std::vector<double> probe(static_cast<std::size_t>(d));
  for (int iter = 0; iter < 600 && step > 1e-13; ++iter) {
    for (int i = 0; i < d; ++i) {
      probe.assign(w.begin(), w.end());
      probe[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] + fd_step;
      const double up = score_weights(probe);
      probe[static_cast<std::size_t>(i)] =
          std::max(0.0, w[static_cast<std::size_t>(i)] - fd_step);
      const double down = score_weights(probe);
      grad[static_cast<std::size_t>(i)] = (up - down) / (2.0 * fd_step);
    }
    double gmean = 0.0;
    for (double g : grad) gmean += g;
    gmean /= d;
    double gnorm = 0.0;
    for (double& g : grad) {
      g -= gmean;
      gnorm += g * g;
    }
    if (std::sqrt(gnorm) < 1e-12) break;

    bool accepted = false;
    double gained = 0.0;
    while (step > 1e-13) {
      for (int i = 0; i < d; ++i) {
        probe[static_cast<std::size_t>(i)] =
            w[static_cast<std::size_t>(i)] + step * grad[static_cast<std::size_t>(i)];
      }
      std::vector<double> candidate = project_simplex(probe);
      const double fc = score_weights(candidate);
      if (fc > fw) {
        gained = fc - fw;
        w = std::move(candidate);
        fw = fc;
        accepted = true;
        ++polish_steps;
        step = std::min(step * 1.5, 1.0);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    // Acceptances at quadrature-noise scale are not progress.
    if (gained <= 1e-13 * std::max(1.0, std::abs(fw))) {
      if (++noise_steps >= 3) break;
    } else {
      noise_steps = 0;
    }
  }

  Portfolio best = as_portfolio(std::move(w));
  GrowthRateEstimate rate;
  if (spec.method == IntegrationMethod::monte_carlo) {
    // Report on the same fixed sample the optimizer scored (plus its spread),
    // with the rejection fraction of a fresh tally at the same seed.
    double rejection = 0.0;
    const Matrix tally = draw_market_sample(model, spec.mc_samples, spec.seed, &rejection);
    double sum = 0.0, sum_sq = 0.0;
    for (int r = 0; r < tally.rows(); ++r) {
      const double v = best.factor(tally.row(r));
      const double g = v > 0.0 ? q_log(model.q(), v) : -k_inf;
      sum += g;
      sum_sq += g * g;
    }
    rate.method = spec;
    rate.value = sum / tally.rows();
    const double var = std::max(0.0, sum_sq / tally.rows() - rate.value * rate.value);
    rate.std_error = std::sqrt(var / tally.rows());
    rate.converged = std::isfinite(rate.value);
    rate.evaluations = tally.rows();
    rate.rejection_fraction = rejection;
  } else {
    rate = GrowthQuadrature(model, spec)(best.weights());
  }

  OptimalPortfolioResult out{std::move(best), rate, std::move(de), polish_steps};
  return out;
}

}  // namespace qportfolio

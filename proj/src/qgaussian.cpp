#include "qportfolio/qgaussian.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qportfolio/numerics.hpp"
#include "qportfolio/rng.hpp"

namespace qportfolio {

namespace {

constexpr double k_inf = std::numeric_limits<double>::infinity();
constexpr double k_sqrt_pi = 1.7724538509055160272981674833411452;

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::domain_error("q-Gaussian: sigma must be finite and > 0, got " +
                            std::to_string(sigma));
  }
}

void check_normalizable(int dim, Deformation q) {
  if (!(q.q() < 3.0)) {
    throw std::domain_error("q-Gaussian: normalization requires q < 3, got " +
                            std::to_string(q.q()));
  }
  if (q.q() > 1.0 && !(dim < 2.0 / (q.q() - 1.0))) {
    throw std::domain_error("q-Gaussian: normalization in dimension " + std::to_string(dim) +
                            " requires d < 2/(q-1) = " + std::to_string(2.0 / (q.q() - 1.0)) +
                            ", got q = " + std::to_string(q.q()));
  }
}

// The dimensional shift consumed by the marginalization recursion.
double q_shift(double q, int n) {
  return (2.0 * q + n * (1.0 - q)) / (2.0 + n * (1.0 - q));
}

double c_dq_recursion(int dim, Deformation q) {
  // log of: prod_{k=0}^{d-2} ((3-q_k)/2)^{(d-1-k)/2} / prod_{k=0}^{d-1} C_{q_k}
  double log_c = 0.0;
  for (int k = 0; k <= dim - 2; ++k) {
    const double qk = q_shift(q.q(), k);
    log_c += 0.5 * (dim - 1 - k) * std::log(0.5 * (3.0 - qk));
  }
  for (int k = 0; k <= dim - 1; ++k) {
    const double qk = q_shift(q.q(), k);
    log_c -= std::log(c_q(Deformation(qk)));
  }
  return std::exp(log_c);
}

double c_dq_radial(int dim, Deformation q) {
  // c_dq = 1 / (S_d I), S_d = 2 pi^(d/2) / Gamma(d/2), I = int_0^inf r^(d-1) exp_q(-r^2) dr.
  const double log_sphere = std::log(2.0) + 0.5 * dim * std::log(std::numbers::pi) -
                            std::lgamma(0.5 * dim);
  IntegratorSpec spec;
  spec.method = IntegrationMethod::adaptive_quadrature_1d;
  spec.rel_tol = 1e-12;
  spec.abs_tol = 0.0;
  spec.max_evaluations = 2'000'000;
  const ScalarField radial = [&](std::span<const double> r) {
    return std::pow(r[0], dim - 1) * q_exp(q, -r[0] * r[0]);
  };
  // q < 1 has compact radial support [0, 1/sqrt(1-q)]; q >= 1 decays on [0, inf).
  const double upper = q.one_minus_q() > 0.0 ? 1.0 / std::sqrt(q.one_minus_q()) : k_inf;
  const IntegralResult integral = integrate(radial, Region::box({{0.0, upper}}), spec);
  return std::exp(-log_sphere - std::log(integral.value));
}

}  // namespace

double c_q(Deformation q) {
  if (!(q.q() < 3.0)) {
    throw std::domain_error("c_q: requires q < 3, got " + std::to_string(q.q()));
  }
  if (q.classical()) return k_sqrt_pi;
  const double qq = q.q();
  if (qq < 1.0) {
    const double m = 1.0 / (1.0 - qq);
    const double log_c = std::log(2.0) + 0.5 * std::log(std::numbers::pi) + std::lgamma(m) -
                         std::log(3.0 - qq) - 0.5 * std::log(1.0 - qq) - std::lgamma(m + 0.5);
    return std::exp(log_c);
  }
  const double nu = 1.0 / (qq - 1.0);
  const double log_c = 0.5 * std::log(std::numbers::pi / (qq - 1.0)) + std::lgamma(nu - 0.5) -
                       std::lgamma(nu);
  return std::exp(log_c);
}

double c_dq(int dim, Deformation q, CdqMethod method) {
  if (dim < 1) throw std::invalid_argument("c_dq: dimension must be >= 1");
  check_normalizable(dim, q);
  if (q.classical()) return std::pow(std::numbers::pi, -0.5 * dim);
  switch (method) {
    case CdqMethod::recursion:
      return c_dq_recursion(dim, q);
    case CdqMethod::radial:
      return c_dq_radial(dim, q);
  }
  throw std::invalid_argument("c_dq: unknown method");
}

double qgaussian_variance(Deformation q, double sigma) {
  check_sigma(sigma);
  if (!(q.q() < 5.0 / 3.0)) {
    throw std::domain_error("qgaussian_variance: finite variance requires q < 5/3");
  }
  if (q.classical()) return sigma * sigma / 2.0;
  return sigma * sigma / (5.0 - 3.0 * q.q());
}

double qgaussian_sigma_from_variance(Deformation q, double variance) {
  if (!(variance > 0.0)) {
    throw std::domain_error("qgaussian_sigma_from_variance: variance must be > 0");
  }
  if (!(q.q() < 5.0 / 3.0)) {
    throw std::domain_error("qgaussian_sigma_from_variance: finite variance requires q < 5/3");
  }
  if (q.classical()) return std::sqrt(2.0 * variance);
  return std::sqrt(variance * (5.0 - 3.0 * q.q()));
}

UnivariateQGaussian::UnivariateQGaussian(Deformation q_in, double mu_in, double sigma_in)
    : q(q_in), mu(mu_in), sigma(sigma_in) {
  if (!std::isfinite(mu)) throw std::domain_error("q-Gaussian: mu must be finite");
  check_sigma(sigma);
  check_normalizable(1, q);
}

MultivariateQGaussian::MultivariateQGaussian(Deformation q, std::vector<double> mu,
                                             std::vector<double> sigma)
    : q_(q), mu_(std::move(mu)), sigma_(std::move(sigma)), norm_(0.0) {
  if (mu_.empty() || mu_.size() != sigma_.size()) {
    throw std::invalid_argument("MultivariateQGaussian: mu and sigma must match and be non-empty");
  }
  for (double m : mu_) {
    if (!std::isfinite(m)) throw std::domain_error("MultivariateQGaussian: mu must be finite");
  }
  for (double s : sigma_) check_sigma(s);
  check_normalizable(dim(), q_);
  norm_ = c_dq(dim(), q_);
  for (double s : sigma_) norm_ /= s;
}

double density(const UnivariateQGaussian& model, double x) {
  const double y = (x - model.mu) / model.sigma;
  return q_exp(model.q, -y * y) / (c_q(model.q) * model.sigma);
}

double density(const MultivariateQGaussian& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.dim()) {
    throw std::invalid_argument("density: point dimension mismatch");
  }
  double arg = 0.0;
  for (int i = 0; i < model.dim(); ++i) {
    const double y = (x[i] - model.mu()[i]) / model.sigma()[i];
    arg -= y * y;
  }
  return model.norm_constant() * q_exp(model.q(), arg);
}

double log_density(const MultivariateQGaussian& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.dim()) {
    throw std::invalid_argument("log_density: point dimension mismatch");
  }
  double arg = 0.0;
  for (int i = 0; i < model.dim(); ++i) {
    const double y = (x[i] - model.mu()[i]) / model.sigma()[i];
    arg -= y * y;
  }
  const Deformation q = model.q();
  if (q.classical()) return std::log(model.norm_constant()) + arg;
  const double bracket = 1.0 + q.one_minus_q() * arg;
  if (!(bracket > 0.0)) return -k_inf;  // outside the q < 1 compact support
  return std::log(model.norm_constant()) + std::log(bracket) / q.one_minus_q();
}

double log_likelihood(const MultivariateQGaussian& model, const Matrix& observations) {
  if (observations.cols() != model.dim()) {
    throw std::invalid_argument("log_likelihood: observation dimension mismatch");
  }
  double total = 0.0;
  for (int r = 0; r < observations.rows(); ++r) {
    total += log_density(model, observations.row(r));
    if (total == -k_inf) return -k_inf;
  }
  return total;
}

namespace {

void check_samplable_q(Deformation q) {
  if (!(q.q() > 1.0) || !(q.q() < 3.0)) {
    throw std::domain_error("q-Gaussian sampling requires 1 < q < 3, got " +
                            std::to_string(q.q()));
  }
}

}  // namespace

double sample(const UnivariateQGaussian& model, RngStream& rng) {
  check_samplable_q(model.q);
  const double qq = model.q.q();
  const double nu = (3.0 - qq) / (qq - 1.0);
  // t_nu = Z / sqrt(G/nu), then X = mu + sigma t / sqrt(3-q).
  const double z = rng.normal();
  const double g = rng.chi_squared(nu);
  const double t = z / std::sqrt(g / nu);
  return model.mu + model.sigma * t / std::sqrt(3.0 - qq);
}

void sample(const MultivariateQGaussian& model, RngStream& rng, std::span<double> out) {
  check_samplable_q(model.q());
  const int d = model.dim();
  if (static_cast<int>(out.size()) != d) {
    throw std::invalid_argument("sample: output dimension mismatch");
  }
  const double qq = model.q().q();
  const double nu_d = 2.0 / (qq - 1.0) - d;
  if (!(nu_d > 0.0)) {
    throw std::domain_error("sample: multivariate sampling requires d < 2/(q-1)");
  }
  for (int i = 0; i < d; ++i) out[i] = rng.normal();
  const double g = rng.chi_squared(nu_d);
  const double scale = 1.0 / std::sqrt(g * (qq - 1.0));
  for (int i = 0; i < d; ++i) out[i] = model.mu()[i] + model.sigma()[i] * out[i] * scale;
}

std::vector<double> sample(const MultivariateQGaussian& model, RngStream& rng) {
  std::vector<double> out(static_cast<std::size_t>(model.dim()));
  sample(model, rng, out);
  return out;
}

}  // namespace qportfolio

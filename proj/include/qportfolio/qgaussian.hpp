#pragma once

#include <span>
#include <vector>

#include "qportfolio/matrix.hpp"
#include "qportfolio/qalgebra.hpp"

namespace qportfolio {

class RngStream;

// Univariate q-Gaussian with density f(x) = exp_q(-(x-mu)^2 / sigma^2) / (C_q sigma).
//
// sigma is the *width parameter*, not the standard deviation: the variance is
// sigma^2 / (5 - 3q) when q < 5/3 (sigma^2 / 2 in the classical limit) and
// infinite for 5/3 <= q < 3.  Conversions live in qgaussian_variance /
// qgaussian_sigma_from_variance; nothing converts implicitly.
struct UnivariateQGaussian {
  UnivariateQGaussian(Deformation q, double mu, double sigma);

  Deformation q;
  double mu;
  double sigma;
};

// Product-form multivariate q-Gaussian: one q for all axes, per-axis mu and
// sigma, joint density f(x) = C_{d,q}^{-1} ... expressed here as
//   f(x) = c_dq(d, q) / (sigma_1 ... sigma_d) * exp_q(-sum_i (x_i-mu_i)^2 / sigma_i^2).
// Normalizable iff q < 3 and, for q > 1, d < 2/(q-1); the constructor
// enforces both.
class MultivariateQGaussian {
 public:
  MultivariateQGaussian(Deformation q, std::vector<double> mu, std::vector<double> sigma);

  int dim() const noexcept { return static_cast<int>(mu_.size()); }
  Deformation q() const noexcept { return q_; }
  std::span<const double> mu() const noexcept { return mu_; }
  std::span<const double> sigma() const noexcept { return sigma_; }

  double norm_constant() const noexcept { return norm_; }  // c_dq / prod(sigma_i)

 private:
  Deformation q_;
  std::vector<double> mu_;
  std::vector<double> sigma_;
  double norm_;
};

// Univariate normalization constant C_q (the reciprocal density prefactor),
// finite for q < 3:
//   q < 1:   2 sqrt(pi) Gamma(1/(1-q)) /
//            ((3-q) sqrt(1-q) Gamma((3-q)/(2(1-q))))
//   q = 1:   sqrt(pi)
//   1<q<3:   sqrt(pi / (q-1)) Gamma((3-q)/(2(q-1))) / Gamma(1/(q-1))
// Evaluated through lgamma so the q -> 1 and q -> 3 limits stay stable.
double c_q(Deformation q);

// d-dimensional constant for the unit-sigma product form (the density
// prefactor itself, not its reciprocal): density at mu is c_dq.
//
// Two independent routes, which agree to quadrature accuracy:
//  - recursion: closed Gamma-function form obtained by marginalizing one
//    axis at a time through the dimensional shift
//        q_n = (2q + n(1-q)) / (2 + n(1-q)),
//    consuming q_0 = q, q_1, ... upward:
//        c_dq = prod_{k=0}^{d-2} ((3-q_k)/2)^{(d-1-k)/2} / prod_{k=0}^{d-1} C_{q_k}
//  - radial: 1 / (S_d int_0^inf r^{d-1} exp_q(-r^2) dr) with S_d the unit
//    sphere area, evaluated by adaptive quadrature.
// Throws std::domain_error unless q < 3 and (q <= 1 or d < 2/(q-1)).
enum class CdqMethod { recursion, radial };
double c_dq(int dim, Deformation q, CdqMethod method = CdqMethod::recursion);

// Variance <-> width-parameter conversions (q < 5/3 only).
double qgaussian_variance(Deformation q, double sigma);
double qgaussian_sigma_from_variance(Deformation q, double variance);

double density(const UnivariateQGaussian& model, double x);
double density(const MultivariateQGaussian& model, std::span<const double> x);
// ln f(x); -inf where the q < 1 compact support cuts the density to zero.
double log_density(const MultivariateQGaussian& model, std::span<const double> x);

// Total log-likelihood of the rows of `observations` (cols must match dim).
double log_likelihood(const MultivariateQGaussian& model, const Matrix& observations);

// Exact sampling for 1 < q < 3 through the Student-t representation:
// T ~ t_nu with nu = (3-q)/(q-1), X = mu + sigma T / sqrt(3-q).
double sample(const UnivariateQGaussian& model, RngStream& rng);

// Elliptical sampler for the multivariate model, 1 < q < 3 and d < 2/(q-1):
// with nu_d = 2/(q-1) - d,  Z ~ N(0, I_d),  G ~ chi^2_{nu_d},
//   X_i = mu_i + sigma_i Z_i / sqrt(G (q-1))
// (the multivariate t_{nu_d} scaled by 1/sqrt(nu_d (q-1))).  Note the
// marginals of the product form are q-Gaussians with a *shifted* q, not the
// model's own q; only the joint density matches exp_q(-sum y_i^2).
void sample(const MultivariateQGaussian& model, RngStream& rng, std::span<double> out);
std::vector<double> sample(const MultivariateQGaussian& model, RngStream& rng);

}  // namespace qportfolio

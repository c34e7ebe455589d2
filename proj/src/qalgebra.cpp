#include "qportfolio/qalgebra.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qportfolio {

namespace {

constexpr double k_inf = std::numeric_limits<double>::infinity();

// [bracket]_+^(1/(1-q)) for a bracket already known to be > 0.
double bracket_power(Deformation def, double bracket) {
  return std::exp(std::log(bracket) / def.one_minus_q());
}

}  // namespace

Deformation::Deformation(double q) : q_(q) {
  if (!std::isfinite(q)) {
    throw std::domain_error("Deformation: q must be finite, got " + std::to_string(q));
  }
}

Deformation Deformation::normalizable(double q) {
  Deformation def(q);
  if (!(q < 3.0)) {
    throw std::domain_error("Deformation: normalizability requires q < 3, got " +
                            std::to_string(q));
  }
  return def;
}

Deformation Deformation::finite_variance(double q) {
  Deformation def(q);
  if (!(q < 5.0 / 3.0)) {
    throw std::domain_error("Deformation: finite variance requires q < 5/3, got " +
                            std::to_string(q));
  }
  return def;
}

bool Deformation::classical() const noexcept {
  return std::abs(q_ - 1.0) < k_classical_band;
}

double pow_one_minus_q(Deformation def, double x) {
  if (x < 0.0 || std::isnan(x)) {
    throw std::domain_error("pow_one_minus_q: x must be >= 0");
  }
  if (def.classical()) return 1.0;  // x^0, with the 0^0 = 1 convention
  if (x == 0.0) return def.one_minus_q() > 0.0 ? 0.0 : k_inf;
  if (std::isinf(x)) return def.one_minus_q() > 0.0 ? k_inf : 0.0;
  return std::exp(def.one_minus_q() * std::log(x));
}

double q_log(Deformation def, double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("q_log: argument must be > 0, got " + std::to_string(x));
  }
  if (def.classical()) return std::log(x);
  if (std::isinf(x)) {
    // lim_{x->inf} ln_q x: 1/(q-1) for q > 1, +inf for q < 1.
    return def.one_minus_q() > 0.0 ? k_inf : -1.0 / def.one_minus_q();
  }
  return std::expm1(def.one_minus_q() * std::log(x)) / def.one_minus_q();
}

QExpValue q_exp_checked(Deformation def, double x) noexcept {
  if (def.classical()) {
    const double value = std::exp(x);
    return {value, false, std::isinf(value)};
  }
  const double bracket = 1.0 + def.one_minus_q() * x;
  if (!(bracket > 0.0)) {
    // Cutoff: 0^(1/(1-q)) is 0 for q < 1 and, with its negative exponent,
    // +inf (saturation) for q > 1.
    if (def.one_minus_q() > 0.0) return {0.0, true, false};
    return {k_inf, true, true};
  }
  const double value = std::isinf(bracket)
                           ? (def.one_minus_q() > 0.0 ? k_inf : 0.0)
                           : bracket_power(def, bracket);
  return {value, false, std::isinf(value)};
}

double q_exp(Deformation def, double x) noexcept { return q_exp_checked(def, x).value; }

bool q_exp_cutoff_active(Deformation def, double x) noexcept {
  return q_exp_checked(def, x).cutoff;
}

namespace {

// The fold is a pure function of all factors: the bracket is accumulated
// first, the clamp-and-power happens once at the end.  A zero factor with
// q > 1 contributes +inf to the bracket (value 0); a bracket that dips
// non-positive gives 0 (q < 1) or +inf (q > 1, negative exponent).
double fold_bracket(Deformation def, std::span<const double> xs) {
  double sum = 1.0;  // 1 + sum_i (x_i^(1-q) - 1)  ==  sum_i x_i^(1-q) - (n-1)
  for (double x : xs) {
    if (x < 0.0 || std::isnan(x)) {
      throw std::domain_error("q_product: factors must be >= 0");
    }
    sum += pow_one_minus_q(def, x) - 1.0;
  }
  return sum;
}

double value_from_bracket(Deformation def, double bracket) {
  if (!(bracket > 0.0)) return def.one_minus_q() > 0.0 ? 0.0 : k_inf;
  if (std::isinf(bracket)) return def.one_minus_q() > 0.0 ? k_inf : 0.0;
  return bracket_power(def, bracket);
}

}  // namespace

double q_product(Deformation def, double x, double y) {
  const double xs[] = {x, y};
  return q_product_fold(def, xs);
}

double q_product_fold(Deformation def, std::span<const double> xs) {
  if (def.classical()) {
    double prod = 1.0;
    for (double x : xs) {
      if (x < 0.0 || std::isnan(x)) {
        throw std::domain_error("q_product: factors must be >= 0");
      }
      prod *= x;
    }
    return prod;
  }
  return value_from_bracket(def, fold_bracket(def, xs));
}

bool q_product_cutoff_active(Deformation def, std::span<const double> xs) {
  if (def.classical()) return false;
  return !(fold_bracket(def, xs) > 0.0);
}

QProductAccumulator::QProductAccumulator(Deformation def)
    : def_(def), bracket_(def.classical() ? 0.0 : 1.0) {}

void QProductAccumulator::multiply(double x) {
  if (x < 0.0 || std::isnan(x)) {
    throw std::domain_error("QProductAccumulator: factors must be >= 0");
  }
  ++count_;
  if (def_.classical()) {
    bracket_ += std::log(x);  // -inf on x = 0: product collapses to 0
    return;
  }
  bracket_ += pow_one_minus_q(def_, x) - 1.0;
  if (!(bracket_ > 0.0)) cutoff_ = true;
}

double QProductAccumulator::value() const {
  if (def_.classical()) return std::exp(bracket_);
  return value_from_bracket(def_, bracket_);
}

double QProductAccumulator::log_value() const {
  if (def_.classical()) return bracket_;
  // (max(b,0) - 1)/(1-q) covers every case at once: b in (0,inf) is the
  // plain q-log of the bracket power, b <= 0 hits the clamp (ln_q of the
  // cutoff value, -1/(1-q) from either side), b = +inf signs correctly.
  return (std::max(bracket_, 0.0) - 1.0) / def_.one_minus_q();
}

double QProductAccumulator::log_sum() const {
  if (def_.classical()) return bracket_;
  return (bracket_ - 1.0) / def_.one_minus_q();
}

double log_ratio(const QProductAccumulator& num, const QProductAccumulator& den) {
  const Deformation def = num.deformation();
  if (def.q() != den.deformation().q()) {
    throw std::domain_error("log_ratio: accumulators use different q");
  }
  if (def.classical()) return num.bracket() - den.bracket();
  const double bn = num.bracket();
  const double bd = den.bracket();
  const bool clamp_n = !(bn > 0.0);
  const bool clamp_d = !(bd > 0.0);
  if (clamp_n && clamp_d) return std::numeric_limits<double>::quiet_NaN();
  // Clamped side: value 0 for q < 1, +inf for q > 1.
  if (clamp_n) return def.one_minus_q() > 0.0 ? -k_inf : k_inf;
  if (clamp_d) return def.one_minus_q() > 0.0 ? k_inf : -k_inf;
  // value = bracket^(1/(1-q)), so the ratio's log divides the bracket logs.
  return (std::log(bn) - std::log(bd)) / def.one_minus_q();
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> probabilities)
    : p_(std::move(probabilities)) {
  if (p_.empty()) throw std::domain_error("DiscreteDistribution: empty vector");
  double sum = 0.0;
  for (double p : p_) {
    if (!(p >= 0.0) || p > 1.0) {
      throw std::domain_error("DiscreteDistribution: entries must lie in [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::domain_error("DiscreteDistribution: entries sum to " + std::to_string(sum) +
                            ", expected 1");
  }
}

double tsallis_entropy(Deformation def, const DiscreteDistribution& dist) {
  if (def.classical()) {
    double h = 0.0;
    for (double p : dist.probabilities()) {
      if (p > 0.0) h -= p * std::log(p);
    }
    return h;
  }
  double sum_pq = 0.0;
  for (double p : dist.probabilities()) {
    if (p > 0.0) sum_pq += std::exp(def.q() * std::log(p));
  }
  return (1.0 - sum_pq) / (def.q() - 1.0);
}

}  // namespace qportfolio

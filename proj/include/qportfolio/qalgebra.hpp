#pragma once

#include <span>
#include <vector>

namespace qportfolio {

// All q-deformed maps degenerate to their classical counterparts as q -> 1,
// but the defining expressions contain 1/(1-q).  Inside this band around
// q = 1 every routine switches to the analytic limit; the q < 1 / q > 1
// branches evaluate x^(1-q) as exp((1-q) ln x) so the two sides approach the
// limit smoothly instead of losing precision to a 0/0.
inline constexpr double k_classical_band = 1e-8;

// Validated deformation parameter.  Construction rejects non-finite q;
// the named factories add the domain constraints that specific consumers
// need, so "which q are legal here" is visible at the call site.
class Deformation {
 public:
  explicit Deformation(double q);

  // q < 3: q-Gaussian normalization constants exist.
  static Deformation normalizable(double q);
  // q < 5/3: the q-Gaussian second moment exists.
  static Deformation finite_variance(double q);

  double q() const noexcept { return q_; }
  double one_minus_q() const noexcept { return 1.0 - q_; }
  bool classical() const noexcept;  // |q - 1| < k_classical_band

 private:
  double q_;
};

// x^(1-q) with the limiting conventions used throughout:
// x > 0 -> exp((1-q) ln x); x = 0 -> 0 for q < 1, +inf for q > 1, 1 at q = 1.
double pow_one_minus_q(Deformation def, double x);

// q-logarithm (x^(1-q) - 1)/(1-q); requires x > 0 (throws std::domain_error).
// ln_1 = ln.  Inverse of q_exp on the range where the cutoff is inactive.
double q_log(Deformation def, double x);

// q-exponential [1 + (1-q)x]_+^(1/(1-q)) with explicit edge reporting.
//   cutoff     - the bracket was <= 0: value clamped to 0 (q < 1) or,
//                for q > 1 where the exponent is negative, saturated to +inf.
//   saturated  - the result is +inf (either the q > 1 cutoff case or plain
//                floating-point overflow, e.g. exp_1 of a huge argument).
struct QExpValue {
  double value;
  bool cutoff;
  bool saturated;
};
QExpValue q_exp_checked(Deformation def, double x) noexcept;
double q_exp(Deformation def, double x) noexcept;

// True when q_exp's bracket 1 + (1-q)x is <= 0 at this argument.
bool q_exp_cutoff_active(Deformation def, double x) noexcept;

// q-product [x^(1-q) + y^(1-q) - 1]_+^(1/(1-q)) for x, y >= 0 (throws
// std::domain_error on negative inputs).  When the bracket hits zero the
// value is 0 for q < 1 and +inf for q > 1, mirroring q_exp's conventions.
double q_product(Deformation def, double x, double y);

// n-ary fold [sum_i x_i^(1-q) - (n-1)]_+^(1/(1-q)) computed in one bracket,
// NOT by repeated binary q_product (the binary fold loses the "- (n-1)"
// structure to intermediate cutoffs).  Empty input yields the neutral 1.
double q_product_fold(Deformation def, std::span<const double> xs);

// True when the fold's bracket for these inputs is <= 0.
bool q_product_cutoff_active(Deformation def, std::span<const double> xs);

// Streaming version of q_product_fold for long products (wealth curves,
// simulated paths): keeps the running bracket sum_i x_i^(1-q) - (count-1)
// so each step is O(1).  In the classical band it accumulates ln x instead.
class QProductAccumulator {
 public:
  explicit QProductAccumulator(Deformation def);

  void multiply(double x);  // x >= 0 (throws std::domain_error)

  // Fold of everything multiplied so far.  For q > 1 a non-positive bracket
  // saturates the value to +inf at that prefix; the bracket itself keeps
  // accumulating, so later factors can bring the fold back to finite values.
  double value() const;
  // q_log(value()), computed from the bracket without the round trip
  // through ^(1/(1-q)); finite at the q > 1 saturation cap 1/(q-1).
  double log_value() const;
  // Sum of q_log(x_t) over everything multiplied so far: the q-log of the
  // q-product through the homomorphism, unaffected by the saturation clamp.
  double log_sum() const;
  // Running bracket (classical band: the running log-sum).
  double bracket() const noexcept { return bracket_; }
  // True once the bracket has been <= 0 at any prefix.
  bool cutoff_fired() const noexcept { return cutoff_; }
  long long count() const noexcept { return count_; }
  Deformation deformation() const noexcept { return def_; }

 private:
  Deformation def_;
  double bracket_;
  bool cutoff_ = false;
  long long count_ = 0;
};

// ln( num.value() / den.value() ) computed from the two running brackets,
// so finite ratios of saturated-magnitude values stay representable.
// Exactly one side at its cutoff gives +/-inf with the sign implied by the
// q > 1 / q < 1 saturation direction; both sides at the cutoff give NaN
// (the ratio of two clamped values carries no information).  Requires both
// accumulators to share the same deformation.
double log_ratio(const QProductAccumulator& num, const QProductAccumulator& den);

// Probability vector: entries in [0, 1] summing to 1 within 1e-9.
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(std::vector<double> probabilities);
  std::span<const double> probabilities() const noexcept { return p_; }
  std::size_t size() const noexcept { return p_.size(); }

 private:
  std::vector<double> p_;
};

// Tsallis entropy S_q(p) = (1 - sum_i p_i^q)/(q - 1); Shannon entropy
// (natural log) in the classical band.  Terms with p_i = 0 contribute 0.
double tsallis_entropy(Deformation def, const DiscreteDistribution& dist);

}  // namespace qportfolio

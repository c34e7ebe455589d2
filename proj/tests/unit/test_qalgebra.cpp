#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qportfolio/qalgebra.hpp"
#include "qportfolio/rng.hpp"

using namespace qportfolio;

namespace {
const double inf = std::numeric_limits<double>::infinity();

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}
}  // namespace

TEST_SUITE("qalgebra") {

TEST_CASE("Deformation validates its argument") {
  CHECK_THROWS_AS(Deformation(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(Deformation{inf}, std::domain_error);
  CHECK_THROWS_AS(Deformation::normalizable(3.0), std::domain_error);
  CHECK_THROWS_AS(Deformation::finite_variance(5.0 / 3.0), std::domain_error);
  CHECK(Deformation::normalizable(2.9).q() == 2.9);
  CHECK(Deformation(1.0).classical());
  CHECK(Deformation(1.0 + 0.5e-8).classical());
  CHECK_FALSE(Deformation(1.5).classical());
}

TEST_CASE("q_log and q_exp reduce to ln and exp in the classical band") {
  const Deformation q1(1.0);
  CHECK(q_log(q1, 2.5) == doctest::Approx(std::log(2.5)).epsilon(1e-15));
  CHECK(q_exp(q1, -0.3) == doctest::Approx(std::exp(-0.3)).epsilon(1e-15));
  // Just outside the band the values approach the classical ones smoothly.
  const Deformation almost(1.0 + 2e-8);
  CHECK(q_log(almost, 2.5) == doctest::Approx(std::log(2.5)).epsilon(1e-6));
}

TEST_CASE("q_exp inverts q_log away from the cutoff") {
  for (double q : {0.3, 0.7, 1.4, 2.2}) {
    const Deformation def(q);
    for (double x : {0.05, 0.5, 1.0, 3.0, 40.0}) {
      CHECK(rel_err(q_exp(def, q_log(def, x)), x) < 1e-12);
    }
  }
}

TEST_CASE("q_log rejects non-positive arguments") {
  const Deformation def(1.5);
  CHECK_THROWS_AS(q_log(def, 0.0), std::domain_error);
  CHECK_THROWS_AS(q_log(def, -1.0), std::domain_error);
}

TEST_CASE("q_exp cutoff clamps for q < 1 and saturates for q > 1") {
  const Deformation low(0.5);   // bracket 1 + 0.5 x, zero at x = -2
  const Deformation high(1.5);  // bracket 1 - 0.5 x, zero at x = 2
  CHECK(q_exp(low, -3.0) == 0.0);
  CHECK(q_exp(high, 3.0) == inf);
  CHECK(q_exp_cutoff_active(low, -3.0));
  CHECK(q_exp_cutoff_active(high, 3.0));
  CHECK_FALSE(q_exp_cutoff_active(low, 0.0));

  const QExpValue clamped = q_exp_checked(low, -3.0);
  CHECK(clamped.cutoff);
  CHECK_FALSE(clamped.saturated);
  const QExpValue saturated = q_exp_checked(high, 3.0);
  CHECK(saturated.cutoff);
  CHECK(saturated.saturated);
  const QExpValue plain = q_exp_checked(high, 0.5);
  CHECK_FALSE(plain.cutoff);
  CHECK_FALSE(plain.saturated);
}

TEST_CASE("q_product is the q-exponential of summed q-logs") {
  for (double q : {0.4, 1.3, 1.9}) {
    const Deformation def(q);
    for (double x : {0.3, 1.0, 2.5}) {
      for (double y : {0.6, 1.7}) {
        const double direct = q_product(def, x, y);
        const double via_logs = q_exp(def, q_log(def, x) + q_log(def, y) +
                                               def.one_minus_q() * q_log(def, x) * q_log(def, y));
        // Only the plain homomorphism form when the bracket stays positive:
        const double hom = q_exp(def, q_log(def, x) + q_log(def, y));
        (void)via_logs;
        CHECK(rel_err(q_log(def, direct), q_log(def, x) + q_log(def, y)) < 1e-12);
        CHECK(rel_err(direct, hom) < 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(q_product(Deformation(1.5), -1.0, 2.0), std::domain_error);
}

TEST_CASE("q_product cutoff hits zero for q < 1 and +inf for q > 1") {
  // x^(1-q) + y^(1-q) - 1 <= 0 needs small factors.
  const Deformation low(0.5);
  const Deformation high(1.5);
  CHECK(q_product(low, 0.04, 0.04) == 0.0);
  CHECK(q_product(high, 20.0, 20.0) == inf);  // brackets 1/sqrt(20) each
  CHECK(q_product_cutoff_active(low, std::vector<double>{0.04, 0.04}));
  CHECK_FALSE(q_product_cutoff_active(low, std::vector<double>{1.0, 1.0}));
}

TEST_CASE("q_product_fold keeps the n-ary bracket structure") {
  const Deformation def(1.5);
  const std::vector<double> xs{0.8, 1.1, 1.4, 0.9};
  double bracket = 1.0;
  for (double x : xs) bracket += std::pow(x, def.one_minus_q()) - 1.0;
  const double expected = std::pow(bracket, 1.0 / def.one_minus_q());
  CHECK(rel_err(q_product_fold(def, xs), expected) < 1e-12);
  CHECK(q_product_fold(def, std::vector<double>{}) == 1.0);
  // Chained binary products agree while no intermediate cutoff fires.
  const double chained =
      q_product(def, q_product(def, q_product(def, xs[0], xs[1]), xs[2]), xs[3]);
  CHECK(rel_err(chained, expected) < 1e-10);
}

TEST_CASE("QProductAccumulator matches the fold and tracks cutoffs") {
  const Deformation def(1.4);
  const std::vector<double> xs{1.2, 0.7, 1.5, 0.95, 1.05};
  QProductAccumulator acc(def);
  std::vector<double> prefix;
  for (double x : xs) {
    acc.multiply(x);
    prefix.push_back(x);
    CHECK(rel_err(acc.value(), q_product_fold(def, prefix)) < 1e-12);
  }
  CHECK(acc.count() == 5);
  CHECK_FALSE(acc.cutoff_fired());
  CHECK(rel_err(acc.log_value(), q_log(def, acc.value())) < 1e-10);
  CHECK_THROWS_AS(acc.multiply(-0.5), std::domain_error);
}

TEST_CASE("QProductAccumulator saturates and recovers for q > 1") {
  const Deformation def(2.0);  // bracket 1 + sum (1/x - 1)
  QProductAccumulator acc(def);
  acc.multiply(0.25);  // bracket 4
  acc.multiply(0.2);   // bracket 8
  CHECK_FALSE(acc.cutoff_fired());
  // One huge factor empties the bracket: 1/x - 1 ~ -1, need bracket <= 0.
  acc.multiply(1e9);  // bracket ~ 7 + 1e-9 - 1 = 6 ... still positive
  CHECK(acc.value() > 0.0);
  QProductAccumulator acc2(def);
  acc2.multiply(1e9);
  acc2.multiply(1e9);  // bracket ~ 1 - 2 = -1: saturated
  CHECK(acc2.cutoff_fired());
  CHECK(acc2.value() == inf);
  // The bracket keeps accumulating, so small factors can bring it back.
  acc2.multiply(0.2);  // bracket ~ -1 + 4 = 3
  CHECK(std::isfinite(acc2.value()));
}

TEST_CASE("classical accumulator stores plain log sums") {
  QProductAccumulator acc(Deformation(1.0));
  acc.multiply(2.0);
  acc.multiply(0.5);
  acc.multiply(3.0);
  CHECK(acc.value() == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(acc.log_value() == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK(acc.bracket() == doctest::Approx(std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("log_ratio compares two running products") {
  const Deformation def(1.5);
  QProductAccumulator a(def), b(def);
  for (double x : {1.1, 0.9, 1.2}) a.multiply(x);
  for (double x : {1.0, 1.05, 0.95}) b.multiply(x);
  CHECK(rel_err(log_ratio(a, b), std::log(a.value() / b.value())) < 1e-10);
  CHECK(log_ratio(a, a) == 0.0);

  // Classical: difference of log sums.
  QProductAccumulator ca(Deformation(1.0)), cb(Deformation(1.0));
  ca.multiply(2.0);
  cb.multiply(4.0);
  CHECK(log_ratio(ca, cb) == doctest::Approx(std::log(0.5)).epsilon(1e-14));

  // One saturated side for q > 1 drives the ratio to the matching infinity.
  QProductAccumulator sat(def), fin(def);
  sat.multiply(1e300);
  sat.multiply(1e300);
  CHECK(sat.cutoff_fired());
  fin.multiply(1.0);
  fin.multiply(1.0);
  CHECK(log_ratio(sat, fin) == inf);
  CHECK(log_ratio(fin, sat) == -inf);

  // Both saturated: no information.
  QProductAccumulator sat2(def);
  sat2.multiply(1e300);
  sat2.multiply(1e300);
  CHECK(std::isnan(log_ratio(sat, sat2)));

  QProductAccumulator other(Deformation(1.2));
  other.multiply(1.0);
  CHECK_THROWS_AS(log_ratio(a, other), std::domain_error);
}

TEST_CASE("randomized identity spot checks") {
  RngStream rng(421);
  for (int i = 0; i < 2000; ++i) {
    double q = rng.uniform(0.2, 1.8);
    if (std::abs(q - 1.0) < 1e-6) q = 1.3;
    const Deformation def(q);
    const double x = std::exp(rng.uniform(-1.5, 1.5));
    const double y = std::exp(rng.uniform(-1.5, 1.5));

    // Pseudo-additivity of ln_q on ordinary products.
    const double lhs = q_log(def, x * y);
    const double rhs = q_log(def, x) + q_log(def, y) +
                       def.one_minus_q() * q_log(def, x) * q_log(def, y);
    CHECK(rel_err(lhs, rhs) < 1e-10);

    // Duality ln_q(1/x) = -ln_{2-q}(x).
    const Deformation dual(2.0 - q);
    CHECK(rel_err(q_log(def, 1.0 / x), -q_log(dual, x)) < 1e-10);
  }
}

TEST_CASE("DiscreteDistribution validates probabilities") {
  CHECK_NOTHROW(DiscreteDistribution({0.25, 0.75}));
  CHECK_THROWS_AS(DiscreteDistribution({0.5, 0.6}), std::domain_error);
  CHECK_THROWS_AS(DiscreteDistribution({1.2, -0.2}), std::domain_error);
  CHECK_THROWS_AS(DiscreteDistribution({}), std::domain_error);
}

TEST_CASE("tsallis entropy of the uniform distribution is ln_q of the size") {
  for (double q : {0.5, 1.0, 1.7, 2.4}) {
    const Deformation def(q);
    for (int W : {2, 5, 16}) {
      const DiscreteDistribution uniform(std::vector<double>(W, 1.0 / W));
      CHECK(rel_err(tsallis_entropy(def, uniform), q_log(def, W)) < 1e-12);
    }
  }
  // Degenerate distribution has zero entropy; zero entries contribute nothing.
  const DiscreteDistribution point({1.0, 0.0, 0.0});
  CHECK(tsallis_entropy(Deformation(1.5), point) == 0.0);
  CHECK(tsallis_entropy(Deformation(1.0), point) == 0.0);
}

}  // TEST_SUITE

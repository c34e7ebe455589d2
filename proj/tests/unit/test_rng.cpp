#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qportfolio/rng.hpp"

using namespace qportfolio;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the same stream") {
  RngStream a(99), b(99);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.normal() == b.normal());
    CHECK(a.gamma(2.5) == b.gamma(2.5));
  }
  RngStream c(100);
  bool all_equal = true;
  RngStream a2(99);
  for (int i = 0; i < 10; ++i) all_equal = all_equal && (a2.uniform() == c.uniform());
  CHECK_FALSE(all_equal);
}

TEST_CASE("derive is independent of parent consumption") {
  RngStream fresh(7);
  RngStream consumed(7);
  for (int i = 0; i < 1000; ++i) consumed.uniform();
  RngStream d1 = fresh.derive(42);
  RngStream d2 = consumed.derive(42);
  for (int i = 0; i < 50; ++i) CHECK(d1.uniform() == d2.uniform());

  RngStream e1 = fresh.derive(1);
  RngStream e2 = fresh.derive(2);
  bool differ = false;
  for (int i = 0; i < 10; ++i) differ = differ || (e1.uniform() != e2.uniform());
  CHECK(differ);
}

TEST_CASE("uniform ranges") {
  RngStream rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform(-2.0, 5.0);
    CHECK(v >= -2.0);
    CHECK(v < 5.0);
    const std::uint64_t k = rng.uniform_below(7);
    CHECK(k < 7);
  }
  CHECK_THROWS_AS(rng.uniform_below(0), std::invalid_argument);
}

TEST_CASE("normal moments") {
  RngStream rng(11);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);         // SE ~ 0.0022
  CHECK(std::abs(var - 1.0) < 0.02);    // SE ~ 0.0032
}

TEST_CASE("gamma moments and domain") {
  RngStream rng(13);
  for (double shape : {0.5, 1.0, 4.0}) {
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      CHECK(g > 0.0);
      sum += g;
      sum_sq += g * g;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(mean == doctest::Approx(shape).epsilon(0.03));
    CHECK(var == doctest::Approx(shape).epsilon(0.08));
  }
  CHECK_THROWS_AS(rng.gamma(0.0), std::invalid_argument);
  CHECK_THROWS_AS(rng.gamma(-1.0), std::invalid_argument);
}

TEST_CASE("chi squared mean equals the degrees of freedom") {
  RngStream rng(17);
  const double dof = 3.5;
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.chi_squared(dof);
  CHECK(sum / n == doctest::Approx(dof).epsilon(0.03));
  CHECK_THROWS_AS(rng.chi_squared(0.0), std::invalid_argument);
}

}  // TEST_SUITE

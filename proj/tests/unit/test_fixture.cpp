#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "qportfolio/matrix.hpp"
#include "qportfolio/qgaussian.hpp"
#include "qportfolio/rng.hpp"

using namespace qportfolio;

namespace {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fixture_path() {
  if (const char* env = std::getenv("QPORTFOLIO_FIXTURE")) return env;
  return "data/fixture_prices.csv";
}

std::string format_close(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

// Calendar walk from 2020-01-01 (2020 is a leap year).
std::string date_after(int days) {
  static const int month_len[12] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int month = 0, day = 1 + days;
  while (day > month_len[month]) {
    day -= month_len[month];
    ++month;
  }
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "2020-%02d-%02d", month + 1, day);
  return buffer;
}

}  // namespace

TEST_SUITE("fixture") {

TEST_CASE("bundled fixture is exactly the pinned synthetic series") {
  // The fixture is 101 days of closes for four tickers, generated by this
  // library's own sampler: one shared stream, one market row per day,
  // starting closes (100, 80, 120, 95) on 2020-01-01.
  const MultivariateQGaussian model(Deformation(1.3), {1.0002, 1.0005, 0.9998, 1.0001},
                                    {0.018, 0.022, 0.025, 0.020});
  const std::vector<std::string> tickers{"AAA", "BBB", "CCC", "DDD"};
  std::vector<double> closes{100.0, 80.0, 120.0, 95.0};

  std::ostringstream expected;
  expected << "date,ticker,close\n";
  for (int t = 0; t < 4; ++t) {
    expected << "2020-01-01," << tickers[t] << ',' << format_close(closes[t]) << '\n';
  }
  RngStream rng(20240);
  std::vector<double> x(4);
  for (int day = 1; day <= 100; ++day) {
    sample(model, rng, x);
    const std::string date = date_after(day);
    for (int t = 0; t < 4; ++t) {
      REQUIRE(x[t] > 0.0);  // the pinned seed produces an all-positive path
      closes[t] *= x[t];
      expected << date << ',' << tickers[t] << ',' << format_close(closes[t]) << '\n';
    }
  }

  std::ifstream in(fixture_path(), std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream actual;
  actual << in.rdbuf();
  CHECK(actual.str() == expected.str());
  CHECK(fnv1a64(actual.str()) == 0xd51cb7552bb0f5a8ULL);
}

}  // TEST_SUITE

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "qportfolio/errors.hpp"
#include "qportfolio/market_data.hpp"

using namespace qportfolio;

namespace {

std::filesystem::path write_temp_csv(const std::string& name, const std::string& content) {
  const std::filesystem::path path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

const std::vector<std::string> k_two{"AAA", "BBB"};

}  // namespace

TEST_SUITE("market_data") {

TEST_CASE("loads long-format prices and forms relatives") {
  const auto path = write_temp_csv("md_basic.csv",
                                   "date,ticker,close\n"
                                   "2020-01-01,AAA,100\n"
                                   "2020-01-01,BBB,50\n"
                                   "2020-01-02,AAA,110\n"
                                   "2020-01-02,BBB,45\n"
                                   "2020-01-03,AAA,99\n"
                                   "2020-01-03,BBB,54\n");
  const PriceRelativeSeries s = load_prices(path, k_two);
  CHECK(s.tickers == k_two);
  CHECK(s.dates == std::vector<std::string>{"2020-01-02", "2020-01-03"});
  CHECK(s.relatives.rows() == 2);
  CHECK(s.relatives(0, 0) == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(s.relatives(0, 1) == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(s.relatives(1, 0) == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(s.relatives(1, 1) == doctest::Approx(1.2).epsilon(1e-14));
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("column order does not matter and extra columns are ignored") {
  const auto path = write_temp_csv("md_cols.csv",
                                   "volume,close,ticker,date\n"
                                   "1,100,AAA,2020-01-01\n"
                                   "2,110,AAA,2020-01-02\n");
  const std::vector<std::string> one{"AAA"};
  const PriceRelativeSeries s = load_prices(path, one);
  CHECK(s.relatives(0, 0) == doctest::Approx(1.1).epsilon(1e-14));
}

TEST_CASE("keeps only dates common to all requested tickers") {
  const auto path = write_temp_csv("md_gap.csv",
                                   "date,ticker,close\n"
                                   "2020-01-01,AAA,100\n"
                                   "2020-01-01,BBB,50\n"
                                   "2020-01-02,AAA,101\n"  // BBB missing: day dropped
                                   "2020-01-03,AAA,102\n"
                                   "2020-01-03,BBB,52\n");
  const PriceRelativeSeries s = load_prices(path, k_two);
  CHECK(s.dates == std::vector<std::string>{"2020-01-03"});
  // The relative spans the gap: 102/100.
  CHECK(s.relatives(0, 0) == doctest::Approx(1.02).epsilon(1e-14));
  CHECK(s.relatives(0, 1) == doctest::Approx(1.04).epsilon(1e-14));
}

TEST_CASE("date window restricts the series inclusively") {
  const auto path = write_temp_csv("md_window.csv",
                                   "date,ticker,close\n"
                                   "2020-01-01,AAA,100\n"
                                   "2020-01-02,AAA,110\n"
                                   "2020-01-03,AAA,121\n"
                                   "2020-01-04,AAA,133\n");
  const std::vector<std::string> one{"AAA"};
  const PriceRelativeSeries s =
      load_prices(path, one, std::string("2020-01-02"), std::string("2020-01-03"));
  CHECK(s.dates == std::vector<std::string>{"2020-01-03"});
  const PriceRelativeSeries all = load_prices(path, one);
  const PriceRelativeSeries sliced =
      slice(all, std::string("2020-01-03"), std::string("2020-01-04"));
  CHECK(sliced.dates == std::vector<std::string>{"2020-01-03", "2020-01-04"});
  CHECK_THROWS_AS(slice(all, std::string("2021-01-01"), std::nullopt), DataError);
}

TEST_CASE("structural errors raise DataError") {
  const std::vector<std::string> one{"AAA"};
  const auto missing_header = write_temp_csv("md_nohdr.csv", "when,ticker,close\n");
  CHECK_THROWS_AS(load_prices(missing_header, one), DataError);

  const auto dup = write_temp_csv("md_dup.csv",
                                  "date,ticker,close\n"
                                  "2020-01-01,AAA,100\n"
                                  "2020-01-01,AAA,101\n"
                                  "2020-01-02,AAA,102\n");
  CHECK_THROWS_AS(load_prices(dup, one), DataError);

  const auto negative = write_temp_csv("md_neg.csv",
                                       "date,ticker,close\n"
                                       "2020-01-01,AAA,100\n"
                                       "2020-01-02,AAA,-5\n");
  CHECK_THROWS_AS(load_prices(negative, one), DataError);

  const auto garbage = write_temp_csv("md_garbage.csv",
                                      "date,ticker,close\n"
                                      "2020-01-01,AAA,1e2x\n"
                                      "2020-01-02,AAA,101\n");
  CHECK_THROWS_AS(load_prices(garbage, one), DataError);

  const auto fine = write_temp_csv("md_fine.csv",
                                   "date,ticker,close\n"
                                   "2020-01-01,AAA,100\n"
                                   "2020-01-02,AAA,101\n");
  CHECK_THROWS_WITH_AS(load_prices(fine, std::vector<std::string>{"ZZZ"}),
                       doctest::Contains("ZZZ"), DataError);
  CHECK_THROWS_AS(load_prices(fine, std::vector<std::string>{}), DataError);
  CHECK_THROWS_AS(load_prices(fine, std::vector<std::string>{"AAA", "AAA"}), DataError);
  // One common date gives zero relatives: too short.
  CHECK_THROWS_AS(load_prices(fine, one, std::string("2020-01-02"), std::nullopt), DataError);
  CHECK_THROWS_AS(load_prices("/nonexistent/nowhere.csv", one), DataError);
}

TEST_CASE("validate rejects inconsistent series") {
  PriceRelativeSeries s;
  s.tickers = {"AAA"};
  s.dates = {"2020-01-02", "2020-01-02"};  // not strictly increasing
  s.relatives = Matrix(2, 1, 1.0);
  CHECK_THROWS_AS(s.validate(), DataError);
  s.dates = {"2020-01-02", "2020-01-03"};
  CHECK_NOTHROW(s.validate());
  s.relatives(1, 0) = -0.5;
  CHECK_THROWS_AS(s.validate(), DataError);
  s.relatives(1, 0) = 1.0;
  s.tickers = {};
  CHECK_THROWS_AS(s.validate(), DataError);
}

}  // TEST_SUITE

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qportfolio/matrix.hpp"

namespace qportfolio {

// Daily price relatives x_t,i = close_t,i / close_{t-1,i} for a fixed ticker
// universe on a common date grid.  Rows of `relatives` are days (aligned with
// `dates`, strictly increasing ISO-8601), columns are tickers.  `dates[k]` is
// the day whose close forms the numerator of row k.
struct PriceRelativeSeries {
  std::vector<std::string> tickers;
  std::vector<std::string> dates;
  Matrix relatives;

  void validate() const;  // throws DataError on structural problems
};

// Load a long-format CSV with columns date,ticker,close (any column order,
// extra columns ignored), keep the requested tickers, restrict to the
// [from, to] date window (inclusive; ISO-8601 string comparison), intersect
// the dates where *all* requested tickers have a close, and convert to price
// relatives.  Throws DataError on: missing header columns, unparsable or
// non-positive closes, duplicate (date, ticker) pairs, a requested ticker
// absent from the file, or fewer than 2 common dates in the window.
PriceRelativeSeries load_prices(const std::filesystem::path& csv_path,
                                std::span<const std::string> tickers,
                                const std::optional<std::string>& from = std::nullopt,
                                const std::optional<std::string>& to = std::nullopt);

// Restrict an existing series to [from, to] (inclusive).  Throws DataError
// if the window is empty.
PriceRelativeSeries slice(const PriceRelativeSeries& series,
                          const std::optional<std::string>& from,
                          const std::optional<std::string>& to);

}  // namespace qportfolio

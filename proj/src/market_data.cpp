#include "qportfolio/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qportfolio/errors.hpp"

namespace qportfolio {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool looks_like_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

double parse_close(const std::string& text, const std::string& context) {
  const std::string t = strip(text);
  if (t.empty()) throw DataError("empty close field " + context);
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) {
    throw DataError("unparsable close '" + t + "' " + context);
  }
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DataError("close must be finite and > 0, got '" + t + "' " + context);
  }
  return value;
}

}  // namespace

void PriceRelativeSeries::validate() const {
  if (tickers.empty()) throw DataError("price relatives: no tickers");
  if (relatives.cols() != static_cast<int>(tickers.size()) ||
      relatives.rows() != static_cast<int>(dates.size())) {
    throw DataError("price relatives: shape mismatch between matrix, tickers and dates");
  }
  if (relatives.rows() < 1) throw DataError("price relatives: empty series");
  for (std::size_t k = 0; k + 1 < dates.size(); ++k) {
    if (!(dates[k] < dates[k + 1])) {
      throw DataError("price relatives: dates must be strictly increasing (" + dates[k] +
                      " before " + dates[k + 1] + ")");
    }
  }
  for (int r = 0; r < relatives.rows(); ++r) {
    for (int c = 0; c < relatives.cols(); ++c) {
      const double v = relatives(r, c);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DataError("price relatives: entries must be finite and > 0");
      }
    }
  }
}

PriceRelativeSeries load_prices(const std::filesystem::path& csv_path,
                                std::span<const std::string> tickers,
                                const std::optional<std::string>& from,
                                const std::optional<std::string>& to) {
  if (tickers.empty()) throw DataError("load_prices: no tickers requested");
  for (const auto& t : tickers) {
    if (std::count(tickers.begin(), tickers.end(), t) > 1) {
      throw DataError("load_prices: duplicate ticker '" + t + "' requested");
    }
  }
  std::ifstream in(csv_path);
  if (!in) throw DataError("load_prices: cannot open '" + csv_path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("load_prices: empty file");
  const std::vector<std::string> header = split_csv_line(line);
  int date_col = -1, ticker_col = -1, close_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = strip(header[i]);
    if (name == "date") date_col = static_cast<int>(i);
    else if (name == "ticker") ticker_col = static_cast<int>(i);
    else if (name == "close") close_col = static_cast<int>(i);
  }
  if (date_col < 0 || ticker_col < 0 || close_col < 0) {
    throw DataError("load_prices: header must contain date, ticker and close columns");
  }

  std::set<std::string> wanted(tickers.begin(), tickers.end());
  std::set<std::string> seen_tickers;
  // close by date, then by ticker
  std::map<std::string, std::map<std::string, double>> closes;
  long long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const int needed = std::max({date_col, ticker_col, close_col});
    if (static_cast<int>(fields.size()) <= needed) {
      throw DataError("load_prices: line " + std::to_string(line_no) + " has too few fields");
    }
    const std::string date = strip(fields[date_col]);
    const std::string ticker = strip(fields[ticker_col]);
    if (!looks_like_iso_date(date)) {
      throw DataError("load_prices: line " + std::to_string(line_no) +
                      " has a non ISO-8601 date '" + date + "'");
    }
    seen_tickers.insert(ticker);
    if (!wanted.count(ticker)) continue;
    const double close =
        parse_close(fields[close_col], "(line " + std::to_string(line_no) + ")");
    auto [it, inserted] = closes[date].emplace(ticker, close);
    if (!inserted) {
      throw DataError("load_prices: duplicate row for (" + date + ", " + ticker + ")");
    }
  }

  for (const auto& t : tickers) {
    if (!seen_tickers.count(t)) {
      throw DataError("load_prices: ticker '" + t + "' not present in '" + csv_path.string() +
                      "'");
    }
  }

  // Dates where every requested ticker has a close, inside the window.
  std::vector<std::string> grid;
  for (const auto& [date, by_ticker] : closes) {
    if (from && date < *from) continue;
    if (to && date > *to) continue;
    if (by_ticker.size() == tickers.size()) grid.push_back(date);
  }
  if (grid.size() < 2) {
    throw DataError("load_prices: need at least 2 common dates in the window, found " +
                    std::to_string(grid.size()));
  }

  PriceRelativeSeries series;
  series.tickers.assign(tickers.begin(), tickers.end());
  const int d = static_cast<int>(tickers.size());
  const int days = static_cast<int>(grid.size()) - 1;
  series.dates.assign(grid.begin() + 1, grid.end());
  series.relatives = Matrix(days, d);
  for (int r = 0; r < days; ++r) {
    const auto& prev = closes[grid[r]];
    const auto& curr = closes[grid[r + 1]];
    for (int c = 0; c < d; ++c) {
      series.relatives(r, c) = curr.at(series.tickers[c]) / prev.at(series.tickers[c]);
    }
  }
  series.validate();
  return series;
}

PriceRelativeSeries slice(const PriceRelativeSeries& series, const std::optional<std::string>& from,
                          const std::optional<std::string>& to) {
  series.validate();
  PriceRelativeSeries out;
  out.tickers = series.tickers;
  std::vector<int> keep;
  for (std::size_t k = 0; k < series.dates.size(); ++k) {
    if (from && series.dates[k] < *from) continue;
    if (to && series.dates[k] > *to) continue;
    keep.push_back(static_cast<int>(k));
  }
  if (keep.empty()) throw DataError("slice: empty date window");
  out.dates.reserve(keep.size());
  out.relatives = Matrix(static_cast<int>(keep.size()), series.relatives.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.dates.push_back(series.dates[keep[r]]);
    for (int c = 0; c < series.relatives.cols(); ++c) {
      out.relatives(static_cast<int>(r), c) = series.relatives(keep[r], c);
    }
  }
  return out;
}

}  // namespace qportfolio

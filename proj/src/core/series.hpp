#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/month.hpp"

namespace tvef {

struct PriceSeries {
  std::vector<Month> dates;
  std::vector<double> prices;
  std::size_t size() const noexcept { return prices.size(); }
};

// Continuously compounded returns. `presample` holds values that precede
// values[0], most recent first, and is consumed when a model conditions on
// lagged observations.
struct ReturnSeries {
  std::vector<Month> dates;
  std::vector<double> values;
  std::vector<double> presample;

  std::size_t size() const noexcept { return values.size(); }

  // Value at position t - k for 0-based t and k >= 1; negative positions
  // resolve into the presample. Throws if the lag reaches past both.
  double lag(std::ptrdiff_t t, int k) const;
};

struct DescriptiveStats {
  double mean = 0.0;
  double sd = 0.0;  // divisor n - 1
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

// Reads a delimiter-separated file (comma default, tab detected from the
// header) with at least a date column and a price column. Validates that
// months are contiguous and prices are positive finite numbers.
PriceSeries load_prices(std::istream& in, const std::string& date_column,
                        const std::string& price_column);
PriceSeries load_prices_file(const std::string& path, const std::string& date_column,
                             const std::string& price_column);

// Restricts to [start, end] inclusive; unset bounds keep the ends.
PriceSeries slice(const PriceSeries& p, std::optional<Month> start, std::optional<Month> end);

// x_t = ln P_t - ln P_{t-1}; output dated at t, one shorter than the input.
ReturnSeries log_returns(const PriceSeries& p);

DescriptiveStats describe(const ReturnSeries& r);
DescriptiveStats describe(std::span<const double> x);

// Moves the first q values into the presample so that a model with q lags
// has a full regressor row for every remaining observation.
ReturnSeries condition_on(const ReturnSeries& r, int q);

void write_returns_csv(const ReturnSeries& r, std::ostream& out);
ReturnSeries read_returns_csv(std::istream& in);

}  // namespace tvef

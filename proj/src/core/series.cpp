#include "core/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "core/errors.hpp"
#include "core/textio.hpp"

namespace tvef {

double ReturnSeries::lag(std::ptrdiff_t t, int k) const {
  std::ptrdiff_t idx = t - k;
  if (idx >= 0) return values[static_cast<std::size_t>(idx)];
  std::size_t pre = static_cast<std::size_t>(-idx) - 1;
  if (pre >= presample.size()) throw DataError("lag reaches before the available presample");
  return presample[pre];
}

PriceSeries load_prices(std::istream& in, const std::string& date_column,
                        const std::string& price_column) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty input file");
  char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  auto cols = split(trim(header), delim);
  for (auto& c : cols) c = trim(c);
  auto find_col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw ConfigError("column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - cols.begin());
  };
  std::size_t dcol = find_col(date_column);
  std::size_t pcol = find_col(price_column);

  PriceSeries out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(line, delim);
    if (fields.size() <= std::max(dcol, pcol)) {
      throw DataError("row " + std::to_string(lineno) + ": too few fields");
    }
    Month m;
    try {
      m = Month::parse(trim(fields[dcol]));
    } catch (const std::invalid_argument& e) {
      throw DataError("row " + std::to_string(lineno) + ": " + e.what());
    }
    double p = 0.0;
    if (!parse_double(fields[pcol], p) || !std::isfinite(p)) {
      throw DataError("row " + std::to_string(lineno) + ": unparsable price '" +
                      trim(fields[pcol]) + "'");
    }
    if (p <= 0.0) {
      throw DataError("row " + std::to_string(lineno) + ": non-positive price " +
                      format_double(p));
    }
    if (!out.dates.empty() && m != out.dates.back().next()) {
      throw DataError("month gap between " + out.dates.back().str() + " and " + m.str());
    }
    out.dates.push_back(m);
    out.prices.push_back(p);
  }
  if (out.size() < 2) throw DataError("need at least two prices to form returns");
  return out;
}

PriceSeries load_prices_file(const std::string& path, const std::string& date_column,
                             const std::string& price_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return load_prices(in, date_column, price_column);
}

PriceSeries slice(const PriceSeries& p, std::optional<Month> start, std::optional<Month> end) {
  PriceSeries out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (start && p.dates[i] < *start) continue;
    if (end && *end < p.dates[i]) continue;
    out.dates.push_back(p.dates[i]);
    out.prices.push_back(p.prices[i]);
  }
  if (out.size() < 2) throw DataError("sample window leaves fewer than two prices");
  return out;
}

ReturnSeries log_returns(const PriceSeries& p) {
  ReturnSeries out;
  out.dates.reserve(p.size() - 1);
  out.values.reserve(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) {
    out.dates.push_back(p.dates[i]);
    out.values.push_back(std::log(p.prices[i]) - std::log(p.prices[i - 1]));
  }
  return out;
}

DescriptiveStats describe(std::span<const double> x) {
  if (x.size() < 2) throw DataError("need at least two observations for descriptive statistics");
  DescriptiveStats s;
  s.n = x.size();
  double sum = 0.0;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  for (double v : x) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : x) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

DescriptiveStats describe(const ReturnSeries& r) { return describe(std::span<const double>(r.values)); }

ReturnSeries condition_on(const ReturnSeries& r, int q) {
  if (q < 0) throw ConfigError("lag order must be non-negative");
  auto uq = static_cast<std::size_t>(q);
  if (r.size() <= uq) throw DataError("series too short to condition on " + std::to_string(q) + " lags");
  ReturnSeries out;
  out.dates.assign(r.dates.begin() + q, r.dates.end());
  out.values.assign(r.values.begin() + q, r.values.end());
  out.presample.reserve(uq + r.presample.size());
  for (std::size_t k = 0; k < uq; ++k) out.presample.push_back(r.values[uq - 1 - k]);
  out.presample.insert(out.presample.end(), r.presample.begin(), r.presample.end());
  return out;
}

void write_returns_csv(const ReturnSeries& r, std::ostream& out) {
  out << "date,log_return\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out << r.dates[i].str() << ',' << format_double(r.values[i]) << '\n';
  }
}

ReturnSeries read_returns_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty returns file");
  auto cols = split(trim(header), ',');
  if (cols.size() < 2 || trim(cols[0]) != "date" || trim(cols[1]) != "log_return") {
    throw DataError("unexpected returns header '" + trim(header) + "'");
  }
  ReturnSeries out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() < 2) throw DataError("row " + std::to_string(lineno) + ": too few fields");
    try {
      out.dates.push_back(Month::parse(trim(fields[0])));
    } catch (const std::invalid_argument& e) {
      throw DataError("row " + std::to_string(lineno) + ": " + e.what());
    }
    double v = 0.0;
    if (!parse_double(fields[1], v)) {
      throw DataError("row " + std::to_string(lineno) + ": unparsable return");
    }
    out.values.push_back(v);
  }
  return out;
}

}  // namespace tvef

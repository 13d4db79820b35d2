#include <cmath>
#include <sstream>
#include <stdexcept>

#include "core/errors.hpp"
#include "core/month.hpp"
#include "core/series.hpp"
#include "doctest.h"

using namespace tvef;

TEST_CASE("month parsing reads the month token as a literal string") {
  CHECK(Month::parse("1871.1") == Month{1871, 1});
  CHECK(Month::parse("1871.10") == Month{1871, 10});
  CHECK(Month::parse("1871.01") == Month{1871, 1});
  CHECK(Month::parse("2012.06") == Month{2012, 6});
  CHECK(Month::parse("1950-07") == Month{1950, 7});
  CHECK(Month::parse("1950-07").str() == "1950-07");
  CHECK(Month{1871, 1}.str() == "1871-01");
}

TEST_CASE("month parsing rejects malformed input") {
  CHECK_THROWS_AS(Month::parse("187x.1"), std::invalid_argument);
  CHECK_THROWS_AS(Month::parse("1871.13"), std::invalid_argument);
  CHECK_THROWS_AS(Month::parse("1871.0"), std::invalid_argument);
  CHECK_THROWS_AS(Month::parse("1871"), std::invalid_argument);
  CHECK_THROWS_AS(Month::parse(""), std::invalid_argument);
}

TEST_CASE("month arithmetic round-trips through the linear index") {
  Month m{1999, 12};
  CHECK(m.next() == Month{2000, 1});
  CHECK(m.plus(13) == Month{2001, 1});
  CHECK(m.plus(-12) == Month{1998, 12});
  CHECK(Month::from_index(m.index()) == m);
  CHECK(Month{1871, 1} < Month{1871, 2});
  CHECK(Month{1871, 12} < Month{1872, 1});
}

namespace {

PriceSeries parse_prices(const std::string& text) {
  std::istringstream in(text);
  return load_prices(in, "Date", "Price");
}

}  // namespace

TEST_CASE("price loading reads comma files and validates contiguity") {
  PriceSeries p = parse_prices("Date,Price\n1871.1,4.44\n1871.2,4.50\n1871.3,4.61\n");
  REQUIRE(p.size() == 3);
  CHECK(p.dates.front() == Month{1871, 1});
  CHECK(p.prices[1] == doctest::Approx(4.50));

  CHECK_THROWS_AS(parse_prices("Date,Price\n1871.1,4.44\n1871.3,4.61\n"), DataError);
  CHECK_THROWS_AS(parse_prices("Date,Price\n1871.1,4.44\n1871.2,0\n"), DataError);
  CHECK_THROWS_AS(parse_prices("Date,Price\n1871.1,4.44\n1871.2,abc\n"), DataError);
  CHECK_THROWS_AS(parse_prices("Date,Price\n1871.1,4.44\n"), DataError);
}

TEST_CASE("price loading detects tab delimiters and extra columns") {
  std::istringstream in("Date\tPrice\tDividend\n1871.1\t4.44\t0.26\n1871.2\t4.50\t0.26\n");
  PriceSeries p = load_prices(in, "Date", "Price");
  CHECK(p.size() == 2);
  CHECK(p.prices[0] == doctest::Approx(4.44));

  std::istringstream missing("Date,Close\n1871.1,4.44\n1871.2,4.50\n");
  CHECK_THROWS_AS(load_prices(missing, "Date", "Price"), ConfigError);
}

TEST_CASE("slice keeps inclusive bounds and unset ends") {
  PriceSeries p = parse_prices(
      "Date,Price\n1871.1,1\n1871.2,2\n1871.3,3\n1871.4,4\n1871.5,5\n");
  PriceSeries mid = slice(p, Month{1871, 2}, Month{1871, 4});
  REQUIRE(mid.size() == 3);
  CHECK(mid.dates.front() == Month{1871, 2});
  CHECK(mid.dates.back() == Month{1871, 4});

  PriceSeries tail = slice(p, Month{1871, 4}, std::nullopt);
  CHECK(tail.size() == 2);
  CHECK(slice(p, std::nullopt, std::nullopt).size() == 5);
  CHECK_THROWS_AS(slice(p, Month{1871, 5}, std::nullopt), DataError);
}

TEST_CASE("log returns difference the log prices and drop the first month") {
  PriceSeries p = parse_prices("Date,Price\n1900.1,100\n1900.2,110\n1900.3,99\n");
  ReturnSeries r = log_returns(p);
  REQUIRE(r.size() == 2);
  CHECK(r.dates.front() == Month{1900, 2});
  CHECK(r.values[0] == doctest::Approx(std::log(110.0 / 100.0)));
  CHECK(r.values[1] == doctest::Approx(std::log(99.0 / 110.0)));
  CHECK(r.presample.empty());
}

TEST_CASE("descriptive statistics use the n-1 variance divisor") {
  ReturnSeries r;
  r.values = {1.0, 2.0, 3.0, 4.0};
  for (int t = 0; t < 4; ++t) r.dates.push_back(Month{2000, t + 1});
  DescriptiveStats d = describe(r);
  CHECK(d.mean == doctest::Approx(2.5));
  CHECK(d.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(d.min == 1.0);
  CHECK(d.max == 4.0);
  CHECK(d.n == 4);
}

TEST_CASE("conditioning moves initial values into the presample most recent first") {
  ReturnSeries r;
  r.values = {10.0, 20.0, 30.0, 40.0, 50.0};
  for (int t = 0; t < 5; ++t) r.dates.push_back(Month{2000, t + 1});
  ReturnSeries c = condition_on(r, 2);
  REQUIRE(c.size() == 3);
  CHECK(c.values.front() == 30.0);
  REQUIRE(c.presample.size() == 2);
  CHECK(c.presample[0] == 20.0);  // lag 1 of the first kept observation
  CHECK(c.presample[1] == 10.0);
  CHECK(c.lag(0, 1) == 20.0);
  CHECK(c.lag(0, 2) == 10.0);
  CHECK(c.lag(2, 1) == 40.0);
  CHECK_THROWS_AS(c.lag(0, 3), DataError);
  CHECK_THROWS_AS(condition_on(r, 5), DataError);
}

TEST_CASE("returns csv round-trips exactly") {
  ReturnSeries r;
  r.values = {0.012345678901234567, -0.3075, 1e-17};
  r.dates = {Month{1871, 2}, Month{1871, 3}, Month{1871, 4}};
  std::ostringstream out;
  write_returns_csv(r, out);
  std::istringstream in(out.str());
  ReturnSeries back = read_returns_csv(in);
  REQUIRE(back.size() == r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(back.values[i] == r.values[i]);
    CHECK(back.dates[i] == r.dates[i]);
  }
}

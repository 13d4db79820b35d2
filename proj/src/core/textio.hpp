#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tvef {

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& line, char delim);

// Shortest round-trip decimal form (%.17g); all columnar output goes through
// this so reruns are byte comparable.
std::string format_double(double v);

// Parses a full token as double; returns false on trailing junk or empty.
bool parse_double(const std::string& token, double& out);

// Comma-separated table with an optional block of leading "# key=value"
// metadata lines before the header row.
struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or npos when absent.
  std::size_t column(const std::string& name) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

Table read_table(std::istream& in);
Table read_table_file(const std::string& path);  // DataError when unreadable

}  // namespace tvef

#include "core/month.hpp"

#include <cctype>
#include <cstdio>
#include <stdexcept>

namespace tvef {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Month Month::parse(const std::string& text) {
  auto sep = text.find_first_of("-.");
  if (sep == std::string::npos) throw std::invalid_argument("month '" + text + "': missing separator");
  std::string ytok = text.substr(0, sep);
  std::string mtok = text.substr(sep + 1);
  if (!all_digits(ytok) || !all_digits(mtok)) {
    throw std::invalid_argument("month '" + text + "': non-numeric token");
  }
  if (mtok.size() > 2) throw std::invalid_argument("month '" + text + "': month token too long");
  int y = std::stoi(ytok);
  int m = std::stoi(mtok);
  if (m < 1 || m > 12) throw std::invalid_argument("month '" + text + "': month out of range");
  return Month{y, m};
}

std::string Month::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

}  // namespace tvef

#pragma once

#include <compare>
#include <string>

namespace tvef {

// Calendar month with whole-month arithmetic via a linear index.
struct Month {
  int year = 0;
  int month = 1;  // 1..12

  // Accepts "YYYY-MM" and "YYYY.MM". The month token is read as a literal
  // string of digits, so "1871.1" is January and "1871.10" is October.
  // Throws std::invalid_argument on malformed input.
  static Month parse(const std::string& text);

  std::string str() const;  // "YYYY-MM", zero padded

  int index() const noexcept { return year * 12 + (month - 1); }
  static Month from_index(int idx) noexcept { return Month{idx / 12, idx % 12 + 1}; }
  Month next() const noexcept { return from_index(index() + 1); }
  Month plus(int months) const noexcept { return from_index(index() + months); }

  friend auto operator<=>(const Month&, const Month&) = default;
};

}  // namespace tvef

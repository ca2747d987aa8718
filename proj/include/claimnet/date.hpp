#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "claimnet/error.hpp"

namespace claimnet {

/// Calendar date stored as days since 1970-01-01 (may be negative).
struct Date {
  std::int32_t days = 0;

  friend auto operator<=>(const Date&, const Date&) = default;
};

namespace detail {

// Howard Hinnant's civil-date algorithms.
inline std::int32_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u + static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int32_t>(doe) - 719468;
}

inline void civil_from_days(std::int32_t z, int& y, int& m, int& d) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int yy = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = yy + (m <= 2);
}

}  // namespace detail

inline Date make_date(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw DataError("invalid calendar date");
  }
  return Date{detail::days_from_civil(y, m, d)};
}

/// Parses strict ISO "YYYY-MM-DD".
inline Date parse_date(std::string_view s) {
  auto bad = [&] { return DataError("invalid date '" + std::string(s) + "', expected YYYY-MM-DD"); };
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw bad();
  int y = 0, m = 0, d = 0;
  auto parse_int = [&](std::string_view part, int& out) {
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc{} || p != part.data() + part.size()) throw bad();
  };
  parse_int(s.substr(0, 4), y);
  parse_int(s.substr(5, 2), m);
  parse_int(s.substr(8, 2), d);
  if (m < 1 || m > 12 || d < 1 || d > 31) throw bad();
  return Date{detail::days_from_civil(y, m, d)};
}

inline std::string format_date(Date date) {
  int y, m, d;
  detail::civil_from_days(date.days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

}  // namespace claimnet

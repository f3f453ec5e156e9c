#include "dosslot/date.hpp"

#include <charconv>
#include <cstdio>

#include "dosslot/errors.hpp"

namespace dosslot {

namespace {

int parse_digits(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw DomainError("bad date digits");
  return v;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw DomainError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (text[i] < '0' || text[i] > '9') throw DomainError("non-digit in date '" + std::string(text) + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{parse_digits(text.substr(0, 4))},
                                        std::chrono::month{static_cast<unsigned>(parse_digits(text.substr(5, 2)))},
                                        std::chrono::day{static_cast<unsigned>(parse_digits(text.substr(8, 2)))}};
  if (!ymd.ok()) throw DomainError("invalid calendar date '" + std::string(text) + "'");
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

unsigned month_of(Date d) { return static_cast<unsigned>(std::chrono::year_month_day{d}.month()); }

}  // namespace dosslot

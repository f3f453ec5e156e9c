#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace dosslot {

using Date = std::chrono::sys_days;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws DomainError.
Date parse_date(std::string_view text);

std::string format_date(Date d);

inline Date make_date(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

inline Date add_days(Date d, long days) { return d + std::chrono::days{days}; }

inline long days_between(Date from, Date to) { return (to - from).count(); }

unsigned month_of(Date d);

}  // namespace dosslot

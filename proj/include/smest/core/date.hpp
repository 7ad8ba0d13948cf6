#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace smest::core {

/**
 * @brief Calendar date as a whole UTC day, stored as days since 1970-01-01.
 *
 * Proleptic Gregorian. Differences of two dates are signed calendar-day counts.
 */
struct Date {
  std::int32_t days = 0;

  friend auto operator<=>(const Date&, const Date&) = default;
};

/// Day count since the 1970-01-01 epoch (identity on the internal representation).
inline std::int32_t epoch_day(Date d) { return d.days; }

inline Date add_days(Date d, std::int32_t n) { return Date{d.days + n}; }
inline std::int32_t days_between(Date from, Date to) { return to.days - from.days; }

/// Builds a Date from civil year/month/day. Throws ValidationError on impossible dates.
Date date_from_ymd(int year, int month, int day);

/// Inverse of date_from_ymd.
void ymd_from_date(Date d, int& year, int& month, int& day);

/// Strict ISO 8601 `YYYY-MM-DD` parser. Throws ValidationError echoing the input.
Date parse_date(const std::string& text);

/// Formats as `YYYY-MM-DD`.
std::string format_date(Date d);

}  // namespace smest::core

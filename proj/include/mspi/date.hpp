#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace mspi {

using Date = std::chrono::year_month_day;
using YearMonth = std::chrono::year_month;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
std::optional<Date> parse_date(std::string_view text);
/// Parses YYYY-MM.
std::optional<YearMonth> parse_year_month(std::string_view text);

std::string format_date(const Date& d);
std::string format_year_month(const YearMonth& ym);

inline YearMonth month_of(const Date& d) { return d.year() / d.month(); }

/// Integer key yyyymm, handy for seeding and ordering.
int month_key(const YearMonth& ym);

YearMonth next_month(const YearMonth& ym);

}  // namespace mspi

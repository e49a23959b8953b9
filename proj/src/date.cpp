#include "mspi/date.hpp"

#include <charconv>

#include <fmt/format.h>

namespace mspi {

namespace {

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  if (s.empty()) return std::nullopt;
  for (char c : s)
    if (c < '0' || c > '9') return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = parse_int(text.substr(0, 4));
  auto m = parse_int(text.substr(5, 2));
  auto d = parse_int(text.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
            std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::optional<YearMonth> parse_year_month(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') return std::nullopt;
  auto y = parse_int(text.substr(0, 4));
  auto m = parse_int(text.substr(5, 2));
  if (!y || !m) return std::nullopt;
  YearMonth ym{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)}};
  if (!ym.ok()) return std::nullopt;
  return ym;
}

std::string format_date(const Date& d) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

std::string format_year_month(const YearMonth& ym) {
  return fmt::format("{:04d}-{:02d}", static_cast<int>(ym.year()),
                     static_cast<unsigned>(ym.month()));
}

int month_key(const YearMonth& ym) {
  return static_cast<int>(ym.year()) * 100 + static_cast<int>(static_cast<unsigned>(ym.month()));
}

YearMonth next_month(const YearMonth& ym) { return ym + std::chrono::months{1}; }

}  // namespace mspi

#include "mspi/csv.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "mspi/error.hpp"

namespace mspi::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

void split(std::string_view line, std::vector<std::string>& out) {
  out.clear();
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.emplace_back(trim(field));
}

Reader::Reader(const std::string& path) : path_(path), in_(path) {
  if (!in_) throw DataError(fmt::format("cannot open '{}'", path));
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (!raw.empty() && raw[0] == '#') {
      comments_.push_back(raw);
      continue;
    }
    if (trim(raw).empty()) continue;
    split(raw, header_);
    break;
  }
  if (header_.empty()) throw DataError(fmt::format("'{}': missing header row", path));
  for (std::size_t i = 0; i < header_.size(); ++i) index_.emplace(header_[i], i);
}

std::optional<std::size_t> Reader::find(std::string_view column) const {
  auto it = index_.find(std::string(column));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Reader::require(std::string_view column) const {
  auto idx = find(column);
  if (!idx) throw DataError(fmt::format("'{}': header lacks required column '{}'", path_, column));
  return *idx;
}

bool Reader::next(std::vector<std::string>& fields) {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (trim(raw).empty() || raw[0] == '#') continue;
    split(raw, fields);
    if (fields.size() != header_.size())
      throw DataError(fmt::format("'{}' line {}: expected {} fields, found {}", path_, line_,
                                  header_.size(), fields.size()));
    return true;
  }
  return false;
}

bool is_missing(std::string_view field) {
  field = trim(field);
  return field.empty() || field == "NA" || field == "NaN" || field == "nan" || field == ".";
}

std::optional<double> parse_double(std::string_view field) {
  field = trim(field);
  if (is_missing(field)) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view field) {
  field = trim(field);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_flag(std::string_view field) {
  field = trim(field);
  if (field == "1" || field == "true" || field == "TRUE" || field == "True") return true;
  if (field == "0" || field == "false" || field == "FALSE" || field == "False") return false;
  return std::nullopt;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{}", v);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

}  // namespace mspi::csv

#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mspi::csv {

// Minimal comma-delimited reader. Lines starting with '#' are metadata and
// skipped; the first remaining line is the header. Fields may be wrapped in
// double quotes (with "" as an escaped quote).
class Reader {
 public:
  explicit Reader(const std::string& path);

  const std::vector<std::string>& header() const { return header_; }
  /// Column index for a required name; throws DataError naming the file.
  std::size_t require(std::string_view column) const;
  std::optional<std::size_t> find(std::string_view column) const;

  /// Reads the next data row into `fields`. Returns false at end of file.
  bool next(std::vector<std::string>& fields);
  /// 1-based physical line number of the last row returned.
  std::size_t line() const { return line_; }
  const std::string& path() const { return path_; }

  /// Metadata lines ("# key: value") seen before the header.
  const std::vector<std::string>& comments() const { return comments_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> comments_;
  std::size_t line_ = 0;
};

void split(std::string_view line, std::vector<std::string>& out);

/// True for the tokens treated as a missing value: "", "NA", "NaN", ".".
bool is_missing(std::string_view field);

/// Strict parse of a decimal number (no trailing garbage). nullopt when the
/// field is not a number; missing markers are not numbers either.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);
std::optional<bool> parse_flag(std::string_view field);

/// Shortest round-trip decimal representation; empty for nullopt.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);

}  // namespace mspi::csv

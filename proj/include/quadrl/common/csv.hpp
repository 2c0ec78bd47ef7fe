#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace quadrl::csv {

/// Shortest decimal form that parses back to the same double.
std::string format(double value);

/// Empty string for NaN, otherwise `format(value)`.
std::string format_or_empty(double value);

/// A CSV file with a header row. Values are kept as strings; typed access goes
/// through `number`, which reports the offending line on failure.
struct Table {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row

  /// Column index; throws SchemaError naming the column if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  /// Parsed value at (row, column). Empty cells become NaN.
  double number(std::size_t row, std::size_t col) const;
};

Table read(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace quadrl::csv

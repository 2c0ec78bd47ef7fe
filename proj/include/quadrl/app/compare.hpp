#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace quadrl::app {

/// Side-by-side table; every cell is already formatted.
struct ComparisonTable {
  std::vector<std::string> columns;  // first is "parameter"
  std::vector<std::vector<std::string>> rows;

  const std::vector<std::string>& row(const std::string& parameter) const;
};

/// Compares two training logs (reward threshold crossing, lengths, final rewards)
/// or two metrics files (steady-state errors and the rest of the mean row).
/// Mixing kinds or missing columns throws SchemaError naming the problem.
/// Without `threshold`, training logs use half the smaller of the two peak
/// 100-episode mean rewards.
ComparisonTable compare_files(const std::filesystem::path& a, const std::filesystem::path& b,
                              std::optional<double> threshold = std::nullopt);

void write_table_csv(std::ostream& os, const ComparisonTable& table);

}  // namespace quadrl::app

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ib::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row

  /// Column index by name; throws DataError when absent.
  std::size_t column(std::string_view name) const;
};

/// Reads a comma-separated file with a header row. Blank lines are skipped.
/// Rows whose field count differs from the header raise DataError.
Table read(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

/// Shortest round-trip decimal representation. NaN is written as an empty
/// field.
std::string format_double(double value);

double parse_double(const std::string& field, const std::string& where);
long long parse_int(const std::string& field, const std::string& where);

}  // namespace ib::csv

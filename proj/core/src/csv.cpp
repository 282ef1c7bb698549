#include "ibandit/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "ibandit/common.hpp"

namespace ib::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError("missing column '" + std::string(name) + "'");
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto piece = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    fields.emplace_back(trim(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Table table;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(path.filename().string() + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw DataError(path.filename().string() + ": empty file");
  return table;
}

std::string format_double(double value) {
  if (std::isnan(value)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& where) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw DataError(where + ": '" + field + "' is not a number");
  }
  return value;
}

long long parse_int(const std::string& field, const std::string& where) {
  long long value = 0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw DataError(where + ": '" + field + "' is not an integer");
  }
  return value;
}

}  // namespace ib::csv

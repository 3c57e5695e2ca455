#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "histopheno/common.hpp"

namespace histopheno {

// Minimal strict CSV: comma separated, no quoting, '.' decimal point, UTF-8.
// Lines starting with '#' are comments; the first non-comment line is the
// header. Every data row must have exactly as many fields as the header.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;       // '#' lines in file order, prefix stripped
  std::vector<std::size_t> row_lines;      // 1-based source line per data row
  std::string path;

  int column_index(std::string_view name) const;           // -1 when absent
  int require_column(std::string_view name) const;          // throws ParseError
};

CsvTable read_csv(const std::filesystem::path& path);

// Locale-free numeric parsing; `where` names the file/line in error messages.
double parse_double(std::string_view text, const std::string& where);
long long parse_int(std::string_view text, const std::string& where);

// Shortest representation that round-trips exactly (via std::to_chars).
std::string format_double(double value);

// Writes to <path>.tmp then renames, so partial artifacts never appear.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

}  // namespace histopheno

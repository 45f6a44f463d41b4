#pragma once

// Minimal CSV reading/writing and atomic file output.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sfelab::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ValidationError naming the missing column.
  std::size_t column(std::string_view name) const;
};

/// Parses comma-separated text with a required header row. Quoted fields are
/// supported; blank lines are skipped.
CsvTable parse_csv(std::string_view text, const std::string& source = "<memory>");
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest representation that round-trips through strtod.
std::string format_number(double x);

double parse_number(std::string_view field, std::string_view context);
long parse_integer(std::string_view field, std::string_view context);

}  // namespace sfelab::io

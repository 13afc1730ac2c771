#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace metarec::csv {

using Row = std::vector<std::string>;

/// RFC-4180 style reader: comma separated, double-quoted fields may contain
/// commas, newlines and doubled quotes. Blank lines are skipped.
std::vector<Row> parse(std::string_view text);
std::vector<Row> read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Strict numeric parse of a whole field (surrounding blanks allowed).
bool parse_double(std::string_view text, double& value);

/// Writes to a sibling temporary and renames, so readers never observe a
/// half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

} // namespace metarec::csv

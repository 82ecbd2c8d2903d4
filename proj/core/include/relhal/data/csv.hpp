// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace relhal::data {

// Splits one CSV record; double-quoted fields may contain commas and "".
std::vector<std::string> split_csv_line(std::string_view line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;   // 1-based source line of each row
  std::vector<std::string> comments;  // '#' lines, without the marker

  // Column index by exact name, or npos.
  std::size_t column(std::string_view name) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Reads a header row followed by data rows. Blank lines and lines starting
// with '#' are skipped (comments are kept). Every row must have as many
// fields as the header, otherwise ParseError names the offending line.
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::string& path);

// Empty fields and nan/NaN/NA parse as quiet NaN; anything else that is not a
// number raises ParseError.
double parse_number(std::string_view field, const std::string& source, std::size_t line);

// Shortest representation that round-trips exactly.
std::string format_number(double value);

// Quotes a field if it contains a comma, quote or newline.
std::string escape_csv(std::string_view field);

}  // namespace relhal::data

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pbsim::csv {

// A parsed delimited-text table. Row i of `rows` sits on file line
// `line_numbers[i]` (1-based; the header is line 1).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

// Reads a comma-separated file. Blank lines are skipped. Throws ParseError
// when a row's field count differs from the header.
Table read(const std::filesystem::path& path);
Table parse(std::istream& in);

// Throws ParseError unless the header matches `expected` exactly.
void expect_header(const Table& table, const std::vector<std::string_view>& expected);

double parse_double(std::string_view field, std::size_t line);
long long parse_int(std::string_view field, std::size_t line);
bool parse_bool(std::string_view field, std::size_t line);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

// Writes `fields` joined by commas and a trailing newline.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace pbsim::csv

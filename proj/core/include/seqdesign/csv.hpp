#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace seqdesign {

using CsvCell = std::variant<double, std::int64_t, std::string>;
using CsvRow = std::vector<CsvCell>;

/// Shortest decimal text that parses back to the same double (17 significant digits).
std::string format_double(double value);
std::string format_cell(const CsvCell& cell);

/// Writes the header then each row. Throws ContractError when a row width
/// differs from the schema and Error on stream failure.
void write_csv(std::ostream& out, const std::vector<std::string>& schema, const std::vector<CsvRow>& rows);
void write_csv_file(const std::string& path, const std::vector<std::string>& schema, const std::vector<CsvRow>& rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ParseError when absent.
  std::size_t column(const std::string& name) const;
};

/// RFC 4180 style reader (quoted fields, doubled quotes).
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

double parse_double(const std::string& text);

}  // namespace seqdesign

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gcf {

// A fully numeric CSV table: header names plus row-major cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<double> cells;

  std::size_t num_columns() const { return header.size(); }
  std::size_t num_rows() const {
    return header.empty() ? 0 : cells.size() / header.size();
  }
  double at(std::size_t row, std::size_t col) const {
    return cells[row * header.size() + col];
  }
  std::optional<std::size_t> find(std::string_view name) const;
  // Throws SchemaError when the column is absent.
  std::size_t require(std::string_view name) const;
  std::vector<double> column(std::size_t col) const;
};

// Parses a header-first, comma-separated file. Every data cell must parse as
// a finite double; failures name the 1-based data row and the column.
CsvTable read_csv_table(const std::filesystem::path& path);
CsvTable parse_csv_table(std::istream& in, const std::string& source_name);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

// Splits "a,b , c" into trimmed tokens; empty input gives an empty list.
std::vector<std::string> split_list(std::string_view text, char sep = ',');

}  // namespace gcf

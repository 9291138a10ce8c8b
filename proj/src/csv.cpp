#include "gcf/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "gcf/error.hpp"

namespace gcf {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::optional<std::size_t> CsvTable::find(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::require(std::string_view name) const {
  if (auto idx = find(name)) return *idx;
  throw SchemaError("missing column '" + std::string(name) + "'");
}

std::vector<double> CsvTable::column(std::size_t col) const {
  std::vector<double> out(num_rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = at(r, col);
  return out;
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    const auto token = trim(text.substr(start, pos - start));
    out.emplace_back(token);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

CsvTable parse_csv_table(std::istream& in, const std::string& source_name) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) {
    throw EmptyDatasetError(source_name + ": empty file");
  }
  table.header = split_list(line);
  for (const auto& name : table.header) {
    if (name.empty()) throw SchemaError(source_name + ": empty column name");
  }
  const std::size_t cols = table.header.size();

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    std::string_view rest(line);
    std::size_t col = 0;
    while (true) {
      const std::size_t pos = rest.find(',');
      const std::string_view cell = rest.substr(0, pos);
      if (col >= cols) {
        throw ParseError(source_name + ": row " + std::to_string(row) +
                         " has more than " + std::to_string(cols) + " cells");
      }
      double value = 0.0;
      if (!parse_double(cell, value) || !std::isfinite(value)) {
        throw ParseError(source_name + ": row " + std::to_string(row) +
                         ", column '" + table.header[col] +
                         "': cannot parse '" + std::string(trim(cell)) +
                         "' as a finite number");
      }
      table.cells.push_back(value);
      ++col;
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (col != cols) {
      throw ParseError(source_name + ": row " + std::to_string(row) + " has " +
                       std::to_string(col) + " cells, expected " +
                       std::to_string(cols));
    }
  }
  if (row == 0) {
    throw EmptyDatasetError(source_name + ": no data rows");
  }
  return table;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_csv_table(in, path.string());
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace gcf

#include "gmvshrink/returns_csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gmvshrink/error.hpp"

namespace gmvshrink {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

std::string location(std::size_t line, std::size_t column, const std::string& asset) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + " (" + asset +
         ")";
}

}  // namespace

ReturnsPanel parse_returns_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_row(line);
      break;
    }
  }
  if (header.empty()) throw DataError("returns csv: missing header row");

  const bool has_dates = iequals(header.front(), "date");
  const std::size_t first_asset = has_dates ? 1 : 0;
  ReturnsPanel panel;
  panel.asset_ids.assign(header.begin() + static_cast<std::ptrdiff_t>(first_asset), header.end());
  if (panel.asset_ids.empty()) throw DataError("returns csv: header lists no assets");
  const std::size_t p = panel.asset_ids.size();

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_row(line);
    if (cells.size() != header.size()) {
      throw DataError("returns csv: line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    if (has_dates) panel.dates.push_back(cells.front());
    std::vector<double> row(p);
    for (std::size_t j = 0; j < p; ++j) {
      const std::string& cell = cells[first_asset + j];
      const std::size_t column = first_asset + j + 1;
      if (cell.empty() || iequals(cell, "na") || iequals(cell, "nan")) {
        throw DataError("returns csv: missing value at " +
                        location(line_no, column, panel.asset_ids[j]));
      }
      double value = 0.0;
      const char* begin = cell.data();
      const char* end = cell.data() + cell.size();
      if (*begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw DataError("returns csv: invalid number '" + cell + "' at " +
                        location(line_no, column, panel.asset_ids[j]));
      }
      row[j] = value;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("returns csv: no data rows");

  panel.returns.resize(static_cast<Index>(p), static_cast<Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t j = 0; j < p; ++j) {
      panel.returns(static_cast<Index>(j), static_cast<Index>(t)) = rows[t][j];
    }
  }
  return panel;
}

ReturnsPanel read_returns_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open returns file " + path.string());
  return parse_returns_csv(in);
}

}  // namespace gmvshrink

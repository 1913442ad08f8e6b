#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "gmvshrink/linalg.hpp"

namespace gmvshrink {

/// Return panel as read from disk: one row per date in the file, stored here
/// transposed as an assets x T matrix.
struct ReturnsPanel {
  std::vector<std::string> asset_ids;
  /// Empty when the file has no date column.
  std::vector<std::string> dates;
  Matrix returns;
};

/// Reads a returns CSV. The header row holds asset identifiers; a first column
/// headed "date" (any case) is kept as labels and excluded from the math.
/// Numbers are parsed locale-independently. Empty cells, NA and NaN are
/// rejected with a DataError naming the line and column.
ReturnsPanel parse_returns_csv(std::istream& in);
ReturnsPanel read_returns_csv(const std::filesystem::path& path);

}  // namespace gmvshrink

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lesionrl/error.hpp"

namespace lesionrl::report {

// Numeric CSV with a header row. Empty cells are kept as nullopt.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;

  // Throws InputError when the column does not exist.
  int column(const std::string& name) const;
  // (x, y) pairs of the rows where both cells are present.
  std::vector<std::pair<double, double>> pairs(const std::string& x, const std::string& y) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

// Writes the stream contents produced by `fill` to `path`, replacing any
// previous file. Throws IoError when the file cannot be opened.
template <class F>
void write_file(const std::filesystem::path& path, F&& fill) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  fill(out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace lesionrl::report

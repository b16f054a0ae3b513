#include "lesionrl/report/csv.hpp"

#include <charconv>
#include <sstream>

namespace lesionrl::report {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw InputError("CSV has no column '" + name + "'");
}

std::vector<std::pair<double, double>> CsvTable::pairs(const std::string& x,
                                                       const std::string& y) const {
  const int cx = column(x), cy = column(y);
  std::vector<std::pair<double, double>> out;
  for (const auto& r : rows) {
    if (r[cx] && r[cy]) out.emplace_back(*r[cx], *r[cy]);
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw IngestionError("CSV line " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(table.header.size()));
    }
    std::vector<std::optional<double>> row;
    for (const auto& c : cells) {
      if (c.empty()) {
        row.emplace_back();
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size()) {
        throw IngestionError("CSV line " + std::to_string(line_no) + ": not a number: '" + c + "'");
      }
      row.emplace_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw IngestionError("CSV has no header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_csv(text.str());
}

}  // namespace lesionrl::report

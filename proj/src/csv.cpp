#include "cloudagv/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace cloudagv {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_number(const std::string& s) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) return std::numeric_limits<double>::quiet_NaN();
  return v;
}

}  // namespace

CsvTable CsvTable::read(std::istream& is) {
  CsvTable t;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto cells = split(line);
    if (!header) {
      t.columns_ = std::move(cells);
      t.data_.assign(t.columns_.size(), {});
      header = true;
      continue;
    }
    if (cells.size() != t.columns_.size()) {
      throw CsvError("csv: row " + std::to_string(t.rows_ + 1) + " has " +
                     std::to_string(cells.size()) + " cells, expected " +
                     std::to_string(t.columns_.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) t.data_[c].push_back(to_number(cells[c]));
    ++t.rows_;
  }
  if (!header) throw CsvError("csv: no header row");
  return t;
}

CsvTable CsvTable::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("csv: cannot read '" + path.string() + "'");
  return read(in);
}

bool CsvTable::has_column(std::string_view name) const noexcept {
  return std::find(columns_.begin(), columns_.end(), name) != columns_.end();
}

std::span<const double> CsvTable::column(std::string_view name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw CsvError("csv: missing column '" + std::string(name) + "'");
  return data_[static_cast<std::size_t>(std::distance(columns_.begin(), it))];
}

void CsvTable::require_columns(std::span<const std::string_view> names) const {
  std::string missing;
  for (const auto& n : names) {
    if (!has_column(n)) missing += (missing.empty() ? "" : ", ") + std::string(n);
  }
  if (!missing.empty()) throw CsvError("csv: missing column(s): " + missing);
}

}  // namespace cloudagv

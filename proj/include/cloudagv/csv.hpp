#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cloudagv {

class CsvError : public std::runtime_error {
 public:
  explicit CsvError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric view of a CSV file; '#' lines are skipped, non-numeric cells read as NaN.
class CsvTable {
 public:
  static CsvTable read(std::istream& is);
  static CsvTable read_file(const std::filesystem::path& path);

  [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }
  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] bool has_column(std::string_view name) const noexcept;
  /// Throws CsvError naming the column when absent.
  [[nodiscard]] std::span<const double> column(std::string_view name) const;
  /// Throws CsvError listing every missing name.
  void require_columns(std::span<const std::string_view> names) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> data_;  // column-major
  std::size_t rows_ = 0;
};

}  // namespace cloudagv

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace oncovir {

/// Column-named table of preformatted cells, written as CSV.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  /// Numeric values of a column; empty or non-numeric cells become NaN.
  std::vector<double> column(const std::string& name) const;
  bool has_column(const std::string& name) const;

  std::string to_csv() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

Table read_csv(const std::filesystem::path& path);

}  // namespace oncovir

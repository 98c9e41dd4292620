#include "oncovir/table.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace oncovir {

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::logic_error("Table: row width does not match the header");
  rows_.push_back(std::move(cells));
}

bool Table::has_column(const std::string& name) const {
  return std::find(header_.begin(), header_.end(), name) != header_.end();
}

std::vector<double> Table::column(const std::string& name) const {
  const auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw std::out_of_range("Table: no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - header_.begin());
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) {
    const std::string& s = row[c];
    double v = std::numeric_limits<double>::quiet_NaN();
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) v = std::numeric_limits<double>::quiet_NaN();
    out.push_back(v);
  }
  return out;
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path.string());
  Table t(split(line));
  while (std::getline(in, line)) {
    if (!line.empty()) t.add_row(split(line));
  }
  return t;
}

}  // namespace oncovir

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "oncovir/runner.hpp"
#include "oncovir/table.hpp"

namespace oncovir::detail {

/// Typed, tracked access to a scenario's options object.
class Options {
 public:
  Options(const nlohmann::json& j, std::string context);

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback);
  double number(const std::string& key);
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback);
  std::size_t count(const std::string& key, std::size_t fallback);
  std::string text(const std::string& key, std::string fallback);
  bool flag(const std::string& key, bool fallback);

 private:
  const nlohmann::json& get(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  const nlohmann::json& j_;
  std::string context_;
};

/// Option keys each scenario kind accepts.
const std::set<std::string>& allowed_options(ScenarioKind kind);

std::string render_svg(const PlotSpec& spec, const Table& table);

std::string sha256_hex(const std::string& bytes);

/// Shortest round-trip decimal, used in file names ("20", "0.75").
std::string short_number(double x);

}  // namespace oncovir::detail

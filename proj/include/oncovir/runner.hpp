#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "oncovir/calibration.hpp"
#include "oncovir/params.hpp"

namespace oncovir {

/// Malformed or inconsistent run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind {
  pde_snapshot,
  pde_sweep,
  ode_run,
  branch,
  limit_cycle_branch,
  hopf_curve,
  calibration_report,
  pde_vs_ode,
};

std::string_view to_string(ScenarioKind kind);

struct PlotSpec {
  std::string file;  // svg name inside the scenario directory
  std::string csv;   // source table
  std::string x;
  std::vector<std::string> y;
  std::string title;
  bool log_x = false;
  bool log_y = false;
};

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::ode_run;
  ModelParams params;  // defaults with the scenario's overrides applied
  nlohmann::json overrides = nlohmann::json::object();
  nlohmann::json options = nlohmann::json::object();
  std::vector<PlotSpec> plots;
};

struct RunConfig {
  std::string source;
  ModelParams defaults;
  CalibrationInputs calibration;
  std::vector<Scenario> scenarios;

  const Scenario* find(std::string_view name) const;
};

/// Parses a configuration document. Throws ConfigError with line and column
/// for syntax errors, and with the offending key for schema errors.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::filesystem::path& path);

/// Resolved parameter set as a JSON object keyed by field name.
nlohmann::json params_to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j, ModelParams base = ModelParams::baseline());

/// One row per scenario: name and kind, aligned.
std::string list_scenarios(const RunConfig& cfg);

/// Runs a scenario into `out_dir / scenario.name`, writing CSV tables, SVG
/// plots and manifest.json. Returns the files written, relative to that
/// directory. Throws ConfigError for bad options and NumericError for
/// numerical failures.
std::vector<std::string> run_scenario(const RunConfig& cfg, const Scenario& sc, const std::filesystem::path& out_dir);

/// Command-line entry point: `run <config> <scenario|--all>` and `list <config>`.
int run_cli(int argc, char** argv);

}  // namespace oncovir

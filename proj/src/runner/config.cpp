#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "internal.hpp"

namespace oncovir {

using nlohmann::json;

namespace {

constexpr std::pair<std::string_view, ScenarioKind> kKinds[] = {
    {"pde_snapshot", ScenarioKind::pde_snapshot},
    {"pde_sweep", ScenarioKind::pde_sweep},
    {"ode_run", ScenarioKind::ode_run},
    {"branch", ScenarioKind::branch},
    {"limit_cycle_branch", ScenarioKind::limit_cycle_branch},
    {"hopf_curve", ScenarioKind::hopf_curve},
    {"calibration_report", ScenarioKind::calibration_report},
    {"pde_vs_ode", ScenarioKind::pde_vs_ode},
};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

CalibrationInputs calibration_from_json(const json& j) {
  static const std::set<std::string> keys = {"doubling_time",    "initial_radius", "final_radius",
                                             "observation_span", "dose",           "injection_radius",
                                             "initial_volume",   "lethal_volume",  "carrying_capacity"};
  check_keys(j, keys, "calibration_inputs");
  CalibrationInputs in;
  auto take = [&j](const char* key, double& field) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw ConfigError(std::string("calibration_inputs.") + key + ": expected a number");
    field = j[key].get<double>();
  };
  take("doubling_time", in.doubling_time);
  take("initial_radius", in.initial_radius);
  take("final_radius", in.final_radius);
  take("observation_span", in.observation_span);
  take("dose", in.dose);
  take("injection_radius", in.injection_radius);
  take("initial_volume", in.initial_volume);
  take("lethal_volume", in.lethal_volume);
  take("carrying_capacity", in.carrying_capacity);
  try {
    in.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return in;
}

PlotSpec plot_from_json(const json& j, const std::string& where) {
  check_keys(j, {"file", "csv", "x", "y", "title", "log_x", "log_y"}, where);
  PlotSpec p;
  try {
    p.file = j.at("file").get<std::string>();
    p.csv = j.at("csv").get<std::string>();
    p.x = j.at("x").get<std::string>();
    p.y = j.at("y").get<std::vector<std::string>>();
    p.title = j.value("title", std::string());
    p.log_x = j.value("log_x", false);
    p.log_y = j.value("log_y", false);
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (p.y.empty()) throw ConfigError(where + ": 'y' must list at least one column");
  if (p.file.find('/') != std::string::npos || p.csv.find('/') != std::string::npos) {
    throw ConfigError(where + ": file names may not contain directories");
  }
  return p;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  for (const auto& [name, k] : kKinds) {
    if (k == kind) return name;
  }
  return "?";
}

const Scenario* RunConfig::find(std::string_view name) const {
  for (const auto& s : scenarios) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

json params_to_json(const ModelParams& p) {
  json j = json::object();
  for (const auto& f : param_fields()) j[std::string(f.name)] = p.*(f.member);
  return j;
}

ModelParams params_from_json(const json& j, ModelParams base) {
  if (!j.is_object()) throw ConfigError("params: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError("params." + key + ": expected a number");
    if (!set_field(base, key, value.get<double>())) throw ConfigError("params: unknown parameter '" + key + "'");
  }
  return base;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": parse error: " +
                      e.what());
  }
  check_keys(root, {"defaults", "calibration_inputs", "scenarios"}, source);

  RunConfig cfg;
  cfg.source = source;
  cfg.defaults = ModelParams::baseline();
  if (root.contains("defaults")) {
    check_keys(root["defaults"], {"params"}, "defaults");
    if (root["defaults"].contains("params")) cfg.defaults = params_from_json(root["defaults"]["params"]);
  }
  if (root.contains("calibration_inputs")) cfg.calibration = calibration_from_json(root["calibration_inputs"]);

  if (!root.contains("scenarios") || !root["scenarios"].is_array()) {
    throw ConfigError(source + ": 'scenarios' must be a list");
  }
  std::set<std::string> names;
  std::size_t index = 0;
  for (const auto& entry : root["scenarios"]) {
    const std::string where = "scenarios[" + std::to_string(index++) + "]";
    check_keys(entry, {"name", "kind", "params", "options", "plots", "description"}, where);
    Scenario sc;
    if (!entry.contains("name") || !entry["name"].is_string()) throw ConfigError(where + ": missing 'name'");
    sc.name = entry["name"].get<std::string>();
    if (sc.name.empty() || sc.name.find_first_of("/\\ ") != std::string::npos || sc.name.front() == '.') {
      throw ConfigError(where + ": invalid scenario name '" + sc.name + "'");
    }
    if (!names.insert(sc.name).second) throw ConfigError(where + ": duplicate scenario name '" + sc.name + "'");
    if (!entry.contains("kind") || !entry["kind"].is_string()) throw ConfigError(sc.name + ": missing 'kind'");
    const std::string kind = entry["kind"].get<std::string>();
    const auto k = std::find_if(std::begin(kKinds), std::end(kKinds), [&](const auto& p) { return p.first == kind; });
    if (k == std::end(kKinds)) throw ConfigError(sc.name + ": unknown kind '" + kind + "'");
    sc.kind = k->second;
    if (entry.contains("params")) {
      try {
        sc.params = params_from_json(entry["params"], cfg.defaults);
      } catch (const ConfigError& e) {
        throw ConfigError(sc.name + ": " + e.what());
      }
      sc.overrides = entry["params"];
    } else {
      sc.params = cfg.defaults;
    }
    try {
      sc.params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(sc.name + ": " + e.what());
    }
    if (entry.contains("options")) {
      sc.options = entry["options"];
      check_keys(sc.options, detail::allowed_options(sc.kind), sc.name + ".options");
    }
    if (entry.contains("plots")) {
      if (!entry["plots"].is_array()) throw ConfigError(sc.name + ": 'plots' must be a list");
      std::size_t pi = 0;
      for (const auto& pj : entry["plots"]) {
        sc.plots.push_back(plot_from_json(pj, sc.name + ".plots[" + std::to_string(pi++) + "]"));
      }
    }
    cfg.scenarios.push_back(std::move(sc));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string list_scenarios(const RunConfig& cfg) {
  std::size_t width = 4;
  for (const auto& s : cfg.scenarios) width = std::max(width, s.name.size());
  std::string out = "name" + std::string(width - 4 + 2, ' ') + "kind\n";
  for (const auto& s : cfg.scenarios) {
    out += s.name + std::string(width - s.name.size() + 2, ' ') + std::string(to_string(s.kind)) + "\n";
  }
  return out;
}

namespace detail {

Options::Options(const json& j, std::string context) : j_(j), context_(std::move(context)) {}

bool Options::has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

const json& Options::get(const std::string& key) { return j_.at(key); }

void Options::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(context_ + ".options." + key + ": " + what);
}

double Options::number(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  return number(key);
}

double Options::number(const std::string& key) {
  if (!has(key)) fail(key, "required");
  const json& v = get(key);
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

std::vector<double> Options::numbers(const std::string& key, std::vector<double> fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_array()) fail(key, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(key, "expected a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::size_t Options::count(const std::string& key, std::size_t fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) fail(key, "expected a positive integer");
  return v.get<std::size_t>();
}

std::string Options::text(const std::string& key, std::string fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

bool Options::flag(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const json& v = get(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

const std::set<std::string>& allowed_options(ScenarioKind kind) {
  static const std::set<std::string> pde = {
      "t_end",       "snapshot_times",       "dr",      "observable_stride", "probe_radii",
      "front_level", "virus_front_fraction", "rel_tol", "abs_tol",           "fit_window",
      "oscillation_window"};
  static const std::set<std::string> pde_param = [] {
    auto s = pde;
    s.insert({"param", "values"});
    return s;
  }();
  static const std::set<std::string> ode = {"t_end", "stride", "initial_state", "rel_tol", "abs_tol", "t_discard"};
  static const std::set<std::string> branch = {"param", "lo", "hi", "start", "initial_step", "max_step", "min_step"};
  static const std::set<std::string> cycles = {"param",  "values",  "lo",      "hi",        "count",
                                               "t_end",  "stride",  "rel_tol", "abs_tol",   "transient_fraction"};
  static const std::set<std::string> hopf = {"betas",         "delta_i_min",    "delta_i_max", "delta_i_points",
                                             "delta_v_min",   "delta_v_points", "axis_delta_v", "reverse"};
  static const std::set<std::string> calib = {"unrounded"};
  switch (kind) {
    case ScenarioKind::pde_snapshot: return pde;
    case ScenarioKind::pde_sweep:
    case ScenarioKind::pde_vs_ode: return pde_param;
    case ScenarioKind::ode_run: return ode;
    case ScenarioKind::branch: return branch;
    case ScenarioKind::limit_cycle_branch: return cycles;
    case ScenarioKind::hopf_curve: return hopf;
    case ScenarioKind::calibration_report: return calib;
  }
  return calib;
}

}  // namespace detail
}  // namespace oncovir

#include <cmath>
#include <fstream>
#include <map>

#include "internal.hpp"
#include "oncovir/bifurcation.hpp"
#include "oncovir/format.hpp"
#include "oncovir/integrator.hpp"
#include "oncovir/model.hpp"
#include "oncovir/pde.hpp"

namespace oncovir {

using nlohmann::json;
using detail::Options;

namespace {

std::string fmt(double x) { return format_number(x); }

class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void table(const std::string& name, const Table& t) {
    tables_.emplace(name, t);
    write(name, t.to_csv());
  }

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << bytes;
    if (!out) throw std::runtime_error("write failed for " + (dir_ / name).string());
    hashes_[name] = detail::sha256_hex(bytes);
  }

  void plots(const std::vector<PlotSpec>& specs, const std::string& scenario) {
    for (const auto& spec : specs) {
      const auto it = tables_.find(spec.csv);
      if (it == tables_.end()) {
        throw ConfigError(scenario + ": plot '" + spec.file + "' refers to unknown table '" + spec.csv + "'");
      }
      for (const auto& col : spec.y) {
        if (!it->second.has_column(col)) throw ConfigError(scenario + ": table " + spec.csv + " has no column " + col);
      }
      if (!it->second.has_column(spec.x)) {
        throw ConfigError(scenario + ": table " + spec.csv + " has no column " + spec.x);
      }
      write(spec.file, detail::render_svg(spec, it->second));
    }
  }

  const std::map<std::string, std::string>& hashes() const { return hashes_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, Table> tables_;
  std::map<std::string, std::string> hashes_;
};

Param param_option(Options& o) {
  const std::string name = o.text("param", "beta");
  const auto p = param_from_string(name);
  if (!p) throw ConfigError("unknown continuation parameter '" + name + "'");
  return *p;
}

PdeRunConfig pde_config(Options& o) {
  PdeRunConfig c;
  c.t_end = o.number("t_end", c.t_end);
  c.snapshot_times = o.numbers("snapshot_times", {});
  c.dr = o.number("dr", c.dr);
  c.observable_stride = o.number("observable_stride", c.observable_stride);
  c.probe_radii = o.numbers("probe_radii", {});
  c.front_level = o.number("front_level", c.front_level);
  c.virus_front_fraction = o.number("virus_front_fraction", c.virus_front_fraction);
  c.integrator.rel_tol = o.number("rel_tol", c.integrator.rel_tol);
  c.integrator.abs_tol = o.number("abs_tol", c.integrator.abs_tol);
  return c;
}

std::pair<double, double> fit_window(Options& o, double t_end) {
  const auto w = o.numbers("fit_window", {0.5 * t_end, t_end});
  if (w.size() != 2 || !(w[1] > w[0])) throw ConfigError("fit_window must be [from, to] with from < to");
  return {w[0], w[1]};
}

std::optional<double> try_speed(const std::vector<std::pair<double, double>>& series, std::pair<double, double> w) {
  try {
    return wave_speed(series, w.first, w.second);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

std::vector<std::pair<double, double>> tail_series(const PdeResult& r) {
  std::vector<std::pair<double, double>> out;
  for (const auto& row : r.observables) out.emplace_back(row.t, row.tail_u);
  return out;
}

std::optional<OscillationReport> try_monitor(const std::vector<std::pair<double, double>>& s, double window) {
  try {
    return oscillation_monitor(s, window);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

/// U of the equilibrium the tail settles on: coexistence when biological,
/// otherwise carrying capacity.
std::pair<double, bool> expected_tail(const ModelParams& p) {
  if (const auto eq = coexistence_equilibrium(p); eq && eq->biological) {
    return {eq->state.u, eq->eigen.stability == Stability::stable};
  }
  return {1.0, capacity_eigenvalues(p).stability == Stability::stable};
}

Table observables_table(const PdeResult& r) {
  Table t({"t_days", "total_u", "total_i", "total_v", "front_u_mm", "tail_u"});
  for (const auto& row : r.observables) {
    t.add_row({fmt(row.t), fmt(row.total_u), fmt(row.total_i), fmt(row.total_v), format_optional(row.front_u_mm),
               fmt(row.tail_u)});
  }
  return t;
}

void run_pde_snapshot(const Scenario& sc, Options& o, Outputs& out) {
  const PdeRunConfig cfg = pde_config(o);
  const auto window = fit_window(o, cfg.t_end);
  const double osc_window = o.number("oscillation_window", cfg.t_end / 4);
  const PdeResult r = run_pde(sc.params, cfg);

  for (const auto& snap : r.snapshots) {
    Table t({"r_mm", "u", "v", "i"});
    for (std::size_t j = 0; j < snap.grid.n; ++j) {
      t.add_row({fmt(snap.grid.r(j)), fmt(snap.u[j]), fmt(snap.v[j]), fmt(snap.i[j])});
    }
    out.table("snapshot_t" + detail::short_number(snap.time) + ".csv", t);
  }
  out.table("observables.csv", observables_table(r));

  Table vol({"t_days", "front_u_mm", "volume_mm3"});
  Table vfront({"t_days", "front_v_mm"});
  for (const auto& row : r.observables) {
    vol.add_row({fmt(row.t), format_optional(row.front_u_mm),
                 row.front_u_mm ? fmt(tumour_volume(*row.front_u_mm)) : std::string()});
    vfront.add_row({fmt(row.t), format_optional(row.front_v_mm)});
  }
  out.table("volume.csv", vol);
  out.table("virus_front.csv", vfront);

  if (!cfg.probe_radii.empty()) {
    std::vector<std::string> header{"t_days"};
    for (double rr : cfg.probe_radii) header.push_back("u_r" + detail::short_number(rr));
    Table probes(header);
    for (const auto& row : r.observables) {
      std::vector<std::string> cells{fmt(row.t)};
      for (double v : row.probe_u) cells.push_back(fmt(v));
      probes.add_row(cells);
    }
    out.table("probes.csv", probes);
  }

  Table summary({"quantity", "value"});
  const auto& last = r.observables.back();
  summary.add_row({"wave_speed_u", format_optional(try_speed(front_series(r), window))});
  summary.add_row({"wave_speed_v", format_optional(try_speed(virus_front_series(r), window))});
  summary.add_row({"final_front_u_mm", format_optional(last.front_u_mm)});
  summary.add_row({"final_volume_mm3", last.front_u_mm ? fmt(tumour_volume(*last.front_u_mm)) : std::string()});
  summary.add_row({"final_tail_u", fmt(last.tail_u)});
  summary.add_row({"eradication_time", format_optional(r.eradication_time)});
  summary.add_row({"min_density", fmt(r.min_density)});
  if (const auto rep = try_monitor(tail_series(r), osc_window)) {
    summary.add_row({"tail_persistent", rep->kind == OscillationKind::persistent ? "1" : "0"});
  }
  for (std::size_t k = 0; k < cfg.probe_radii.size(); ++k) {
    if (const auto rep = try_monitor(probe_series(r, k), osc_window)) {
      summary.add_row({"probe_persistent_r" + detail::short_number(cfg.probe_radii[k]),
                       rep->kind == OscillationKind::persistent ? "1" : "0"});
    }
  }
  out.table("summary.csv", summary);
}

std::vector<double> sweep_values(Options& o) {
  const auto v = o.numbers("values", {});
  if (v.empty()) throw ConfigError("'values' must list at least one parameter value");
  return v;
}

void run_pde_sweep(const Scenario& sc, Options& o, Outputs& out, bool compare_with_ode) {
  const Param which = param_option(o);
  const auto values = sweep_values(o);
  const PdeRunConfig cfg = pde_config(o);
  const auto window = fit_window(o, cfg.t_end);
  const double osc_window = o.number("oscillation_window", cfg.t_end / 4);

  Table sweep(compare_with_ode
                  ? std::vector<std::string>{"param", "tail_u", "u_equilibrium", "equilibrium_stable",
                                             "tail_persistent", "tail_amplitude", "rel_diff"}
                  : std::vector<std::string>{"param", "tail_u", "total_u_final", "total_i_final", "wave_speed_u",
                                             "wave_speed_v", "eradication_time"});
  std::vector<std::string> header{"t_days"};
  std::vector<PdeResult> runs;
  for (std::size_t k = 0; k < values.size(); ++k) {
    ModelParams p = sc.params;
    set(p, which, values[k]);
    p.validate();
    runs.push_back(run_pde(p, cfg));
    header.push_back("tumour_" + std::to_string(k));
    const PdeResult& r = runs.back();
    const auto& last = r.observables.back();
    if (compare_with_ode) {
      const auto [u_eq, stable] = expected_tail(p);
      const auto rep = try_monitor(tail_series(r), osc_window);
      sweep.add_row({fmt(values[k]), fmt(last.tail_u), fmt(u_eq), stable ? "1" : "0",
                     rep ? (rep->kind == OscillationKind::persistent ? "1" : "0") : std::string(),
                     rep ? fmt(rep->amplitudes.back()) : std::string(), fmt(std::abs(last.tail_u - u_eq) / u_eq)});
    } else {
      sweep.add_row({fmt(values[k]), fmt(last.tail_u), fmt(last.total_u), fmt(last.total_i),
                     format_optional(try_speed(front_series(r), window)),
                     format_optional(try_speed(virus_front_series(r), window)), format_optional(r.eradication_time)});
    }
  }
  Table totals(header);
  for (std::size_t n = 0; n < runs.front().observables.size(); ++n) {
    std::vector<std::string> cells{fmt(runs.front().observables[n].t)};
    for (const auto& r : runs) cells.push_back(fmt(r.observables[n].total_u + r.observables[n].total_i));
    totals.add_row(cells);
  }
  out.table(compare_with_ode ? "comparison.csv" : "sweep.csv", sweep);
  out.table("totals.csv", totals);
}

void run_ode(const Scenario& sc, Options& o, Outputs& out) {
  IntegrationConfig cfg;
  cfg.t_end = o.number("t_end", 200.0);
  cfg.dense_output_stride = o.number("stride", 0.1);
  cfg.rel_tol = o.number("rel_tol", 1e-10);
  cfg.abs_tol = o.number("abs_tol", 1e-13);
  const auto s = o.numbers("initial_state", {sc.params.u0, sc.params.v0, 0.0});
  if (s.size() != 3) throw ConfigError("initial_state must be [u, v, i]");
  const double discard = o.number("t_discard", kDefaultTransientFraction * cfg.t_end);
  const Trajectory tr = integrate(sc.params, {s[0], s[1], s[2]}, cfg);

  Table traj({"t_days", "u", "v", "i"});
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    traj.add_row({fmt(tr.times[k]), fmt(tr.states[k].u), fmt(tr.states[k].v), fmt(tr.states[k].i)});
  }
  out.table("trajectory.csv", traj);
  Table peaks({"t_days", "u"});
  for (const auto& pk : detect_peaks(tr, Component::u, discard)) peaks.add_row({fmt(pk.time), fmt(pk.value)});
  out.table("peaks.csv", peaks);

  const auto u = component_series(tr, Component::u);
  const auto m = measure_limit_cycle(tr.times, u, discard);
  Table summary({"quantity", "value"});
  summary.add_row({"final_u", fmt(tr.states.back().u)});
  summary.add_row({"final_v", fmt(tr.states.back().v)});
  summary.add_row({"final_i", fmt(tr.states.back().i)});
  summary.add_row({"cycle_u_max", m.peak_count ? fmt(m.max_value) : std::string()});
  summary.add_row({"cycle_u_min", m.peak_count ? fmt(m.min_value) : std::string()});
  summary.add_row({"cycle_period", m.peak_count > 1 ? fmt(m.period) : std::string()});
  summary.add_row({"cycle_converged", m.converged ? "1" : "0"});
  summary.add_row({"accepted_steps", std::to_string(tr.step_stats.accepted)});
  summary.add_row({"rejected_steps", std::to_string(tr.step_stats.rejected)});
  out.table("summary.csv", summary);
}

void run_branch(const Scenario& sc, Options& o, Outputs& out) {
  const Param which = param_option(o);
  const double lo = o.number("lo"), hi = o.number("hi");
  if (!(hi > lo)) throw ConfigError("branch: need lo < hi");
  const std::string start = o.text("start", "coexistence");
  ContinuationOptions copts;
  copts.initial_step = o.number("initial_step", copts.initial_step);
  copts.max_step = o.number("max_step", copts.max_step);
  copts.min_step = o.number("min_step", copts.min_step);

  ModelParams at = sc.params;
  set(at, which, lo);
  EquilibriumPoint first;
  if (start == "coexistence") {
    first = coexistence_point(sc.params, which, lo);
  } else if (start == "capacity") {
    first = newton_equilibrium(at, {1, 0, 0}, which);
  } else if (start == "origin") {
    first = newton_equilibrium(at, {0, 0, 0}, which);
  } else {
    throw ConfigError("branch: start must be coexistence, capacity or origin");
  }
  const Branch b = continue_branch(sc.params, which, lo, hi, first, copts);

  Table t({"param", "u", "v", "i", "re_l1", "im_l1", "re_l2", "im_l2", "re_l3", "im_l3", "stable"});
  for (const auto& pt : b.points) {
    const auto& ev = pt.eigen.values;
    t.add_row({fmt(pt.param_value), fmt(pt.state.u), fmt(pt.state.v), fmt(pt.state.i), fmt(ev[0].real()),
               fmt(ev[0].imag()), fmt(ev[1].real()), fmt(ev[1].imag()), fmt(ev[2].real()), fmt(ev[2].imag()),
               pt.stable() ? "1" : "0"});
  }
  out.table("branch.csv", t);
  Table e({"kind", "param", "u", "v", "i"});
  for (const auto& ev : b.events) {
    e.add_row({std::string(to_string(ev.kind)), fmt(ev.param_value), fmt(ev.state.u), fmt(ev.state.v),
               fmt(ev.state.i)});
  }
  out.table("events.csv", e);
}

void run_limit_cycles(const Scenario& sc, Options& o, Outputs& out) {
  const Param which = param_option(o);
  std::vector<double> values = o.numbers("values", {});
  if (values.empty()) {
    const double lo = o.number("lo"), hi = o.number("hi");
    const std::size_t n = o.count("count", 10);
    for (std::size_t k = 0; k < n; ++k) {
      values.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1));
    }
  }
  LimitCycleOptions lo;
  lo.t_end = o.number("t_end", lo.t_end);
  lo.stride = o.number("stride", lo.stride);
  lo.rel_tol = o.number("rel_tol", lo.rel_tol);
  lo.abs_tol = o.number("abs_tol", lo.abs_tol);
  lo.transient_fraction = o.number("transient_fraction", lo.transient_fraction);
  Table t({"param", "u_max", "u_min", "period", "converged"});
  for (const auto& s : limit_cycle_branch(sc.params, which, values, lo)) {
    t.add_row({fmt(s.param_value), fmt(s.u_max), fmt(s.u_min), fmt(s.period), s.converged ? "1" : "0"});
  }
  out.table("limit_cycles.csv", t);
}

void run_hopf(const Scenario& sc, Options& o, Outputs& out) {
  const auto betas = o.numbers("betas", {0.001, 0.002, 0.005});
  HopfCurveOptions h;
  h.delta_i_min = o.number("delta_i_min", h.delta_i_min);
  h.delta_i_max = o.number("delta_i_max", h.delta_i_max);
  h.delta_i_points = o.count("delta_i_points", h.delta_i_points);
  h.delta_v_min = o.number("delta_v_min", h.delta_v_min);
  h.delta_v_points = o.count("delta_v_points", h.delta_v_points);
  h.axis_delta_v = o.number("axis_delta_v", h.axis_delta_v);
  h.reverse = o.flag("reverse", false);
  const auto curves = hopf_curve_2param(sc.params, betas, h);
  Table t({"beta", "delta_v", "delta_i"});
  Table axis({"beta", "delta_i"});
  Table area({"beta", "area"});
  for (const auto& c : curves) {
    for (const auto& pt : c.points) t.add_row({fmt(c.beta), fmt(pt.delta_v), fmt(pt.delta_i)});
    for (double d : c.axis_intersections) axis.add_row({fmt(c.beta), fmt(d)});
    area.add_row({fmt(c.beta), fmt(enclosed_area(c))});
  }
  out.table("hopf_curve.csv", t);
  out.table("axis_intersections.csv", axis);
  out.table("enclosed_area.csv", area);
}

void run_calibration(const RunConfig& cfg, Options& o, Outputs& out) {
  const bool unrounded = o.flag("unrounded", false);
  const CalibrationResult r = calibrate(cfg.calibration);
  out.write("report.txt", calibration_report(cfg.calibration, r));
  Table t({"field", "value"});
  const ModelParams p = r.params(unrounded);
  for (const auto& f : param_fields()) t.add_row({std::string(f.name), fmt(p.*(f.member))});
  out.table("derived_params.csv", t);
}

}  // namespace

std::vector<std::string> run_scenario(const RunConfig& cfg, const Scenario& sc, const std::filesystem::path& out_dir) {
  Outputs out(out_dir / sc.name);
  Options o(sc.options, sc.name);
  try {
    switch (sc.kind) {
      case ScenarioKind::pde_snapshot: run_pde_snapshot(sc, o, out); break;
      case ScenarioKind::pde_sweep: run_pde_sweep(sc, o, out, false); break;
      case ScenarioKind::pde_vs_ode: run_pde_sweep(sc, o, out, true); break;
      case ScenarioKind::ode_run: run_ode(sc, o, out); break;
      case ScenarioKind::branch: run_branch(sc, o, out); break;
      case ScenarioKind::limit_cycle_branch: run_limit_cycles(sc, o, out); break;
      case ScenarioKind::hopf_curve: run_hopf(sc, o, out); break;
      case ScenarioKind::calibration_report: run_calibration(cfg, o, out); break;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(sc.name + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(sc.name + ": " + e.what());
  }
  out.plots(sc.plots, sc.name);

  json manifest;
  manifest["scenario"] = sc.name;
  manifest["kind"] = std::string(to_string(sc.kind));
  manifest["config"] = std::filesystem::path(cfg.source).filename().string();
  manifest["params"] = params_to_json(sc.params);
  manifest["overrides"] = sc.overrides;
  manifest["options"] = sc.options;
  if (sc.kind == ScenarioKind::calibration_report) {
    const auto& c = cfg.calibration;
    manifest["calibration_inputs"] = {{"doubling_time", c.doubling_time},       {"initial_radius", c.initial_radius},
                                      {"final_radius", c.final_radius},         {"observation_span", c.observation_span},
                                      {"dose", c.dose},                         {"injection_radius", c.injection_radius},
                                      {"initial_volume", c.initial_volume},     {"lethal_volume", c.lethal_volume},
                                      {"carrying_capacity", c.carrying_capacity}};
  }
  json outputs = json::object();
  std::vector<std::string> files;
  for (const auto& [name, hash] : out.hashes()) {
    outputs[name] = hash;
    files.push_back(name);
  }
  manifest["outputs"] = outputs;
  out.write("manifest.json", manifest.dump(2) + "\n");
  files.push_back("manifest.json");
  return files;
}

}  // namespace oncovir

#include <pybind11/pybind11.h>
#include <pybind11/complex.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "oncovir/bifurcation.hpp"
#include "oncovir/calibration.hpp"
#include "oncovir/model.hpp"
#include "oncovir/pde.hpp"
#include "oncovir/runner.hpp"

namespace py = pybind11;
using namespace oncovir;

namespace {

using Triple = std::tuple<double, double, double>;

State3 to_state(const Triple& t) { return {std::get<0>(t), std::get<1>(t), std::get<2>(t)}; }
Triple from_state(const State3& s) { return {s.u, s.v, s.i}; }

Param param_named(const std::string& name) {
  const auto p = param_from_string(name);
  if (!p) throw py::value_error("unknown continuation parameter '" + name + "'");
  return *p;
}

std::vector<std::complex<double>> eigenvalues(const Eigentriple& e) { return {e.values.begin(), e.values.end()}; }

py::dict branch_dict(const Branch& b) {
  std::vector<double> param, u, v, i, max_real;
  std::vector<bool> stable;
  for (const auto& pt : b.points) {
    param.push_back(pt.param_value);
    u.push_back(pt.state.u);
    v.push_back(pt.state.v);
    i.push_back(pt.state.i);
    max_real.push_back(pt.eigen.max_real());
    stable.push_back(pt.stable());
  }
  py::list events;
  for (const auto& e : b.events) {
    py::dict d;
    d["kind"] = std::string(to_string(e.kind));
    d["param"] = e.param_value;
    d["state"] = from_state(e.state);
    d["eigenvalue"] = e.eigenvalue;
    events.append(d);
  }
  py::dict out;
  out["parameter"] = std::string(to_string(b.parameter));
  out["param"] = param;
  out["u"] = u;
  out["v"] = v;
  out["i"] = i;
  out["max_real"] = max_real;
  out["stable"] = stable;
  out["events"] = events;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tumour/oncolytic-virus model: ODE, PDE and continuation routines";

  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<ModelParams> params(m, "ModelParams");
  params.def(py::init<>()).def_static("baseline", &ModelParams::baseline, py::arg("beta") = 0.002);
  for (const auto& f : param_fields()) {
    const auto member = f.member;
    params.def_property(
        std::string(f.name).c_str(), [member](const ModelParams& p) { return p.*member; },
        [member](ModelParams& p, double x) { p.*member = x; });
  }
  params.def("validate", &ModelParams::validate)
      .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; })
      .def("to_dict", [](const ModelParams& p) {
        py::dict d;
        for (const auto& f : param_fields()) d[py::str(std::string(f.name))] = p.*f.member;
        return d;
      })
      .def("__repr__", [](const ModelParams& p) {
        return "ModelParams(beta=" + std::to_string(p.beta) + ", alpha=" + std::to_string(p.alpha) +
               ", delta_v=" + std::to_string(p.delta_v) + ", delta_i=" + std::to_string(p.delta_i) + ")";
      });

  m.def("rhs", [](const Triple& s, const ModelParams& p) { return from_state(rhs_ode(to_state(s), p)); });
  m.def("jacobian", [](const Triple& s, const ModelParams& p) {
    const Mat3 j = jacobian_ode(to_state(s), p);
    std::vector<std::vector<double>> out(3, std::vector<double>(3));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out[r][c] = j[r][c];
    return out;
  });
  m.def("eigenvalues", [](const Triple& s, const ModelParams& p) {
    return eigenvalues(eigensolve_3x3(jacobian_ode(to_state(s), p)));
  });
  m.def("beta_star", &beta_star);
  m.def("coexistence", [](const ModelParams& p) -> py::object {
    const auto eq = coexistence_equilibrium(p);
    if (!eq) return py::none();
    py::dict d;
    d["state"] = from_state(eq->state);
    d["eigenvalues"] = eigenvalues(eq->eigen);
    d["stable"] = eq->eigen.stability == Stability::stable;
    d["biological"] = eq->biological;
    return d;
  });

  m.def(
      "integrate",
      [](const ModelParams& p, const Triple& s0, double t_end, double stride, double rel_tol, double abs_tol) {
        IntegrationConfig cfg;
        cfg.t_end = t_end;
        cfg.dense_output_stride = stride;
        cfg.rel_tol = rel_tol;
        cfg.abs_tol = abs_tol;
        const Trajectory t = integrate(p, to_state(s0), cfg);
        py::dict d;
        d["t"] = t.times;
        d["u"] = component_series(t, Component::u);
        d["v"] = component_series(t, Component::v);
        d["i"] = component_series(t, Component::i);
        return d;
      },
      py::arg("params"), py::arg("s0"), py::arg("t_end"), py::arg("stride") = 0.1, py::arg("rel_tol") = 1e-8,
      py::arg("abs_tol") = 1e-10);

  m.def(
      "continue_branch",
      [](const ModelParams& p, const std::string& param, double lo, double hi, const std::string& start) {
        const Param which = param_named(param);
        EquilibriumPoint first;
        if (start == "coexistence") {
          first = coexistence_point(p, which, lo);
        } else if (start == "capacity" || start == "origin") {
          ModelParams q = p;
          set(q, which, lo);
          first = newton_equilibrium(q, start == "capacity" ? State3{1, 0, 0} : State3{0, 0, 0}, which);
        } else {
          throw py::value_error("start must be coexistence, capacity or origin");
        }
        Branch b;
        {
          py::gil_scoped_release release;
          b = continue_branch(p, which, lo, hi, first);
        }
        return branch_dict(b);
      },
      py::arg("params"), py::arg("param"), py::arg("lo"), py::arg("hi"), py::arg("start") = "coexistence");

  m.def(
      "hopf_curve",
      [](const ModelParams& p, double beta) {
        const auto curves = hopf_curve_2param(p, {beta});
        const HopfCurve& c = curves.at(0);
        std::vector<double> dv, di;
        for (const auto& pt : c.points) {
          dv.push_back(pt.delta_v);
          di.push_back(pt.delta_i);
        }
        py::dict d;
        d["delta_v"] = dv;
        d["delta_i"] = di;
        d["axis_intersections"] = c.axis_intersections;
        d["area"] = enclosed_area(c);
        return d;
      },
      py::arg("params"), py::arg("beta"));

  m.def(
      "run_pde",
      [](const ModelParams& p, double t_end, double dr, double stride, const std::vector<double>& probes) {
        PdeRunConfig cfg;
        cfg.t_end = t_end;
        cfg.dr = dr;
        cfg.observable_stride = stride;
        cfg.probe_radii = probes;
        PdeResult r;
        {
          py::gil_scoped_release release;
          r = run_pde(p, cfg);
        }
        std::vector<double> t, total_u, tail_u;
        std::vector<std::optional<double>> front;
        std::vector<std::vector<double>> probe_u;
        for (const auto& row : r.observables) {
          t.push_back(row.t);
          total_u.push_back(row.total_u);
          tail_u.push_back(row.tail_u);
          front.push_back(row.front_u_mm);
          probe_u.push_back(row.probe_u);
        }
        py::dict d;
        d["t"] = t;
        d["total_u"] = total_u;
        d["tail_u"] = tail_u;
        d["front_u_mm"] = front;
        d["probe_u"] = probe_u;
        std::vector<double> radius(r.final_field.grid.n);
        for (std::size_t j = 0; j < radius.size(); ++j) radius[j] = r.final_field.grid.r(j);
        d["r"] = radius;
        d["u"] = r.final_field.u;
        d["v"] = r.final_field.v;
        d["i"] = r.final_field.i;
        return d;
      },
      py::arg("params"), py::arg("t_end"), py::arg("dr") = kDefaultDr, py::arg("stride") = 0.5,
      py::arg("probes") = std::vector<double>{});

  m.def("calibrate", [](bool unrounded) {
    const CalibrationInputs in;
    const CalibrationResult r = calibrate(in);
    py::dict d;
    d["growth_rate"] = r.growth_rate;
    d["front_speed"] = r.front_speed;
    d["diffusivity"] = r.diffusivity;
    d["virus_density"] = r.virus_density;
    d["initial_radius"] = r.initial_radius;
    d["lethal_radius"] = r.lethal_radius;
    d["params"] = r.params(unrounded);
    d["report"] = calibration_report(in, r);
    return d;
  }, py::arg("unrounded") = false);

  m.def("list_scenarios", [](const std::filesystem::path& config) { return list_scenarios(load_config(config)); });
  m.def("run_scenario", [](const std::filesystem::path& config, const std::string& name,
                           const std::filesystem::path& out_dir) {
    const RunConfig cfg = load_config(config);
    const Scenario* sc = cfg.find(name);
    if (!sc) throw ConfigError("unknown scenario '" + name + "'");
    py::gil_scoped_release release;
    return run_scenario(cfg, *sc, out_dir);
  });
}

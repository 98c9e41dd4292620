#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oncovir/model.hpp"
#include "oncovir/pde.hpp"

using namespace oncovir;

TEST_CASE("grid construction") {
  const RadialGrid g = RadialGrid::uniform(10.0, 0.05);
  CHECK(g.n == 201);
  CHECK(g.length() == doctest::Approx(10.0));
  CHECK_THROWS_AS(RadialGrid::uniform(1.0, 0.05), std::invalid_argument);
  CHECK_NOTHROW(RadialGrid::uniform(1.55, 0.05));
}

TEST_CASE("initial condition") {
  ModelParams p = ModelParams::baseline();
  const RadialGrid g = RadialGrid::uniform(p.domain_l, 0.05);
  const RadialField f = initial_condition(p, g);
  CHECK(f.u[52] == 1.0);
  CHECK(f.u[53] == 0.0);
  CHECK(f.v[10] == p.v0);
  CHECK(f.v[11] == 0.0);
  for (double x : f.i) CHECK(x == 0.0);

  // Quadrature of a step is exact up to one shell of nodes.
  const double ball = 4.0 / 3.0 * std::numbers::pi * std::pow(p.r_t, 3) * p.k;
  const double shell = 4.0 * std::numbers::pi * p.r_t * p.r_t * g.dr * p.k;
  CHECK(std::abs(total_cells(f, p, Population::u) - ball) < shell);
  CHECK(ball == doctest::Approx(7.36e7).epsilon(1e-3));
  const double virions = total_cells(f, p, Population::v);
  CHECK(virions == doctest::Approx(1.9e10 * 4.0 / 3.0 * std::numbers::pi * 0.125).epsilon(0.15));

  p.r_t = p.domain_l;
  const RadialField full = initial_condition(p, g);
  for (double x : full.u) CHECK(x == p.u0);
}

TEST_CASE("Laplacian of constants and quadratics") {
  const RadialGrid g = RadialGrid::uniform(4.0, 0.05);
  std::vector<double> c(g.n, 3.0), q(g.n);
  for (double x : spherical_laplacian(c, g)) CHECK(x == 0.0);
  for (std::size_t j = 0; j < g.n; ++j) q[j] = g.r(j) * g.r(j);
  const auto l = spherical_laplacian(q, g);
  for (std::size_t j = 0; j + 1 < g.n; ++j) CHECK(std::abs(l[j] - 6.0) < 1e-10);
}

TEST_CASE("Laplacian is second order") {
  auto max_error = [](double dr) {
    const double L = 10.0, k = std::numbers::pi / L;
    const RadialGrid g = RadialGrid::uniform(L, dr);
    std::vector<double> f(g.n);
    for (std::size_t j = 0; j < g.n; ++j) f[j] = std::cos(k * g.r(j));
    const auto l = spherical_laplacian(f, g);
    double err = 0.0;
    for (std::size_t j = 1; j + 1 < g.n; ++j) {
      const double r = g.r(j);
      const double exact = -k * k * std::cos(k * r) - 2.0 / r * k * std::sin(k * r);
      err = std::max(err, std::abs(l[j] - exact));
    }
    return err;
  };
  const double ratio = max_error(0.1) / max_error(0.05);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("total cells of uniform fields") {
  const RadialGrid g = RadialGrid::uniform(10.0, 10.0 / 511.0);
  CHECK(g.n == 512);
  std::vector<double> one(g.n, 1.0), zero(g.n, 0.0);
  const double exact = 4.0 / 3.0 * std::numbers::pi * 1000.0 * 1e6;
  CHECK(total_cells(one, g, 1e6) == doctest::Approx(exact).epsilon(5e-3));
  CHECK(total_cells(zero, g, 1e6) == 0.0);
}

TEST_CASE("front position") {
  const RadialGrid g = RadialGrid::uniform(10.0, 0.05);
  std::vector<double> step(g.n, 0.0);
  for (std::size_t j = 0; j <= 40; ++j) step[j] = 1.0;
  const auto f = front_position(step, g, 0.5);
  REQUIRE(f);
  CHECK(*f == doctest::Approx(g.r(40) + 0.5 * g.dr));
  CHECK_FALSE(front_position(step, g, 2.0));
  std::vector<double> full(g.n, 1.0);
  CHECK_FALSE(front_position(full, g, 0.5));
}

TEST_CASE("wave speed") {
  std::vector<std::pair<double, double>> s;
  for (int k = 0; k <= 20; ++k) s.emplace_back(k, 0.1 * k + 2.0);
  CHECK(wave_speed(s, 0, 20) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(wave_speed(s, 5.5, 5.9), std::invalid_argument);
}

TEST_CASE("tail density and volume") {
  RadialField f;
  f.grid = RadialGrid::uniform(10.0, 0.05);
  f.u.assign(f.grid.n, 0.42);
  f.v.assign(f.grid.n, 0.0);
  f.i.assign(f.grid.n, 0.0);
  CHECK(tail_density(f, Population::u) == doctest::Approx(0.42));
  CHECK(tumour_volume(2.6) == doctest::Approx(73.5).epsilon(1e-3));
  CHECK(tumour_volume(0.0) == 0.0);
  CHECK(tumour_volume(6.0) == doctest::Approx(903.7).epsilon(1e-3));
}

TEST_CASE("oscillation monitor") {
  std::vector<std::pair<double, double>> damped, steady;
  for (int k = 0; k <= 4000; ++k) {
    const double t = 0.01 * k;
    damped.emplace_back(t, std::exp(-t) * std::sin(t));
    steady.emplace_back(t, 2.0 + std::sin(3 * t));
  }
  CHECK(oscillation_monitor(damped, 10.0).kind == OscillationKind::damped);
  const auto r = oscillation_monitor(steady, 10.0);
  CHECK(r.kind == OscillationKind::persistent);
  CHECK_FALSE(r.low_confidence);
  CHECK(r.amplitudes.size() == 4);
  CHECK(r.amplitudes.back() == doctest::Approx(2.0).epsilon(1e-3));
  CHECK_THROWS_AS(oscillation_monitor(steady, 30.0), std::invalid_argument);
}

TEST_CASE("diffusion alone conserves mass") {
  ModelParams p = ModelParams::baseline();
  p.r_u = 1e-300;
  p.beta = 1e-300;
  p.delta_v = 1e-300;
  p.delta_i = 1e-300;
  PdeRunConfig cfg;
  cfg.t_end = 40.0;
  cfg.observable_stride = 10.0;
  const PdeResult r = run_pde(p, cfg);
  const auto& first = r.observables.front();
  const auto& last = r.observables.back();
  CHECK(last.total_u == doctest::Approx(first.total_u).epsilon(1e-3));
  CHECK(last.total_v == doctest::Approx(first.total_v).epsilon(1e-3));
}

TEST_CASE("zero diffusion reproduces the ODE at every node") {
  ModelParams p = ModelParams::baseline(0.005);
  p.d_u = 1e-300;
  p.d_v = 1e-300;
  p.v0 = 3.0;
  const RadialGrid g = RadialGrid::uniform(p.domain_l, 0.25);
  RadialField init = initial_condition(p, g);
  std::fill(init.u.begin(), init.u.end(), 0.8);
  std::fill(init.v.begin(), init.v.end(), 3.0);
  std::fill(init.i.begin(), init.i.end(), 0.01);
  PdeRunConfig cfg;
  cfg.dr = 0.25;
  cfg.t_end = 30.0;
  cfg.observable_stride = 30.0;
  cfg.integrator.rel_tol = 1e-10;
  cfg.integrator.abs_tol = 1e-12;
  const PdeResult r = run_pde(p, cfg, init);

  IntegrationConfig ic;
  ic.t_end = 30.0;
  ic.dense_output_stride = 30.0;
  ic.rel_tol = 1e-10;
  ic.abs_tol = 1e-12;
  const State3 s = integrate(p, {0.8, 3.0, 0.01}, ic).states.back();
  for (std::size_t j = 0; j < g.n; ++j) {
    CHECK(std::abs(r.final_field.u[j] - s.u) < 1e-6);
    CHECK(std::abs(r.final_field.v[j] - s.v) < 1e-6 * std::max(1.0, s.v));
    CHECK(std::abs(r.final_field.i[j] - s.i) < 1e-6);
  }
}

TEST_CASE("snapshots land on requested times") {
  const ModelParams p = ModelParams::baseline();
  PdeRunConfig cfg;
  cfg.t_end = 2.0;
  cfg.snapshot_times = {0.0, 0.75, 2.0};
  cfg.probe_radii = {1.0};
  const PdeResult r = run_pde(p, cfg);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots[1].time == doctest::Approx(0.75));
  CHECK(r.observables.size() == 5);
  CHECK(r.observables.back().probe_u.size() == 1);
  CHECK(r.min_density > -1e-6);
  PdeRunConfig bad = cfg;
  bad.snapshot_times = {3.0};
  CHECK_THROWS_AS(run_pde(p, bad), std::invalid_argument);
}

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oncovir/bifurcation.hpp"

using namespace oncovir;

namespace {

const BifurcationEvent* first_event(const Branch& b, EventKind kind) {
  for (const auto& e : b.events)
    if (e.kind == kind) return &e;
  return nullptr;
}

}  // namespace

TEST_CASE("Newton from nearby and trivial guesses") {
  const ModelParams p = ModelParams::baseline();
  const auto eq = coexistence_equilibrium(p);
  REQUIRE(eq);
  // (0.9, 0.1, 0.1) lies in the basin of the carrying-capacity state.
  const auto far = newton_equilibrium(p, {0.9, 0.1, 0.1});
  CHECK(max_abs(far.state - State3{1, 0, 0}) < 1e-10);
  const auto pt = newton_equilibrium(p, {0.6, 50.0, 0.05});
  CHECK(std::abs(pt.state.u - eq->state.u) < 1e-10);
  CHECK(std::abs(pt.state.v - eq->state.v) < 1e-10 * eq->state.v);
  CHECK(std::abs(pt.state.i - eq->state.i) < 1e-10);
  CHECK(newton_equilibrium(p, {1, 0, 0}).state == State3{1, 0, 0});
  CHECK(newton_equilibrium(p, {0, 0, 0}).state == State3{0, 0, 0});
}

TEST_CASE("trivial branch branch point sits at beta_star") {
  const ModelParams p = ModelParams::baseline();
  const EquilibriumPoint start = newton_equilibrium(ModelParams::baseline(0.0005), {1, 0, 0});
  const Branch b = continue_branch(p, Param::beta, 0.0005, 0.003, start);
  const auto* bp = first_event(b, EventKind::branch_point);
  REQUIRE(bp);
  CHECK(std::abs(bp->param_value / beta_star(p) - 1.0) < 1e-6);
  CHECK(std::abs(bp->eigenvalue.real()) < 1e-8);
  for (const auto& pt : b.points) CHECK(pt.state == State3{1, 0, 0});
}

TEST_CASE("coexistence branch in beta") {
  const ModelParams p = ModelParams::baseline();
  const double lo = 0.001, hi = 0.012;
  const Branch b = continue_branch(p, Param::beta, lo, hi, coexistence_point(p, Param::beta, lo));
  const auto* bp = first_event(b, EventKind::branch_point);
  const auto* hb = first_event(b, EventKind::hopf);
  REQUIRE(bp);
  REQUIRE(hb);
  CHECK(std::abs(bp->param_value - 0.00114) < 1e-5);
  CHECK(std::abs(hb->param_value - 0.00871) < 0.01 * 0.00871);
  CHECK(std::abs(hb->eigenvalue.real()) < 1e-8);
  CHECK(std::abs(hb->eigenvalue.imag()) > 1e-6);

  CHECK(b.points.front().param_value == lo);
  CHECK(b.points.back().param_value == hi);
  for (std::size_t k = 1; k < b.points.size(); ++k) {
    CHECK(b.points[k].param_value > b.points[k - 1].param_value);
  }
  for (const auto& pt : b.points) {
    const ModelParams q = ModelParams::baseline(pt.param_value);
    const auto eq = coexistence_equilibrium(q);
    REQUIRE(eq);
    CHECK(std::abs(pt.state.u - eq->state.u) < 1e-8);
    CHECK(std::abs(pt.state.i - eq->state.i) < 1e-8);
    CHECK(std::abs(pt.state.v - eq->state.v) < 1e-8 * std::max(1.0, std::abs(eq->state.v)));
    CHECK(max_abs(rhs_ode(pt.state, q)) < 1e-12 * std::max(1.0, rhs_term_scale(pt.state, q)));
  }
}

TEST_CASE("burst-size branch point is 1 + delta_v / beta") {
  const ModelParams p = ModelParams::baseline(0.005);
  const Branch b = continue_branch(p, Param::alpha, 100.0, 2000.0, coexistence_point(p, Param::alpha, 100.0));
  const auto* bp = first_event(b, EventKind::branch_point);
  REQUIRE(bp);
  CHECK(std::abs(bp->param_value / (1.0 + p.delta_v / p.beta) - 1.0) < 1e-8);
  CHECK(max_abs(bp->state - State3{1, 0, 0}) < 1e-6);
}

TEST_CASE("refine_hopf on a constructed family") {
  auto family = [](double x) {
    return FamilySample{State3{}, Mat3{{{x - 2.0, -1.5, 0}, {1.5, x - 2.0, 0}, {0, 0, -1}}}};
  };
  const auto ev = refine_hopf(family, 0.3, 3.7, 1e-12);
  CHECK(ev.param_value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(ev.eigenvalue.imag()) == doctest::Approx(1.5));
  CHECK_THROWS_AS(refine_hopf(family, 2.5, 3.7), std::invalid_argument);
}

TEST_CASE("limit-cycle amplitude grows away from the Hopf point") {
  const ModelParams p = ModelParams::baseline();
  const double hb = 0.0087102;
  LimitCycleOptions opts;
  opts.t_end = 3000;
  const auto lc = limit_cycle_branch(p, Param::beta, {1.05 * hb, 1.2 * hb, 1.6 * hb}, opts);
  REQUIRE(lc.size() == 3);
  const auto us = coexistence_equilibrium(ModelParams::baseline(1.05 * hb));
  CHECK(lc[0].u_max - us->state.u < 0.2);
  CHECK(lc[0].u_max < lc[1].u_max);
  CHECK(lc[1].u_max < lc[2].u_max);
  CHECK(lc[0].period < lc[1].period);
  CHECK(lc[1].period < lc[2].period);
}

TEST_CASE("Hopf curve geometry") {
  HopfCurveOptions opts;
  opts.delta_i_points = 120;
  opts.delta_v_points = 80;
  const ModelParams p = ModelParams::baseline();
  const auto curves = hopf_curve_2param(p, {0.001, 0.002, 0.005}, opts);
  REQUIRE(curves.size() == 3);
  const auto& c2 = curves[1];

  auto xs = delta_i_crossings(c2, 0.2);
  std::sort(xs.begin(), xs.end());
  REQUIRE(xs.size() == 2);
  CHECK(xs[0] == doctest::Approx(0.0126774).epsilon(0.02));
  CHECK(xs[1] == doctest::Approx(6.08135).epsilon(0.02));

  auto ys = delta_i_crossings(c2, 1.27662);
  CHECK(std::any_of(ys.begin(), ys.end(), [](double d) { return std::abs(d - 1.2) < 0.05; }));

  CHECK(enclosed_area(curves[0]) < enclosed_area(curves[1]));
  CHECK(enclosed_area(curves[1]) < enclosed_area(curves[2]));

  for (const auto& c : curves) {
    REQUIRE_FALSE(c.axis_intersections.empty());
    for (const auto& h : c.points) {
      ModelParams q = p;
      q.beta = c.beta;
      q.delta_v = h.delta_v;
      q.delta_i = h.delta_i;
      const auto re = coexistence_pair_real_part(q);
      REQUIRE(re);
      CHECK(std::abs(*re) < 1e-8);
    }
  }
  CHECK(curves[0].axis_intersections.back() < curves[1].axis_intersections.back());
  CHECK(curves[1].axis_intersections.back() < curves[2].axis_intersections.back());

  opts.reverse = true;
  const auto rev = hopf_curve_2param(p, {0.002}, opts)[0];
  REQUIRE(rev.points.size() == c2.points.size());
  auto key = [](const HopfPoint& h) { return std::pair{h.delta_i, h.delta_v}; };
  std::vector<std::pair<double, double>> a, b;
  for (const auto& h : c2.points) a.push_back(key(h));
  for (const auto& h : rev.points) b.push_back(key(h));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].first == doctest::Approx(b[k].first).epsilon(1e-12));
    CHECK(a[k].second == doctest::Approx(b[k].second).epsilon(1e-9));
  }
}

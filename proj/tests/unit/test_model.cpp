#include <cmath>
#include <random>

#include "doctest.h"
#include "oncovir/model.hpp"

using namespace oncovir;

namespace {

// Independent root of A U^2 + B U + C on [lo, hi] by plain bisection.
double bisect_quadratic(const EquilibriumQuadratic& q, double lo, double hi) {
  auto f = [&](double u) { return (q.a * u + q.b) * u + q.c; };
  double flo = f(lo);
  for (int k = 0; k < 200; ++k) {
    const double m = 0.5 * (lo + hi);
    const double fm = f(m);
    if ((fm < 0) == (flo < 0)) {
      lo = m;
      flo = fm;
    } else {
      hi = m;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("rhs vanishes at the two immediate fixed points") {
  for (double beta : {0.0005, 0.002, 0.1}) {
    ModelParams p = ModelParams::baseline(beta);
    CHECK(max_abs(rhs_ode({0, 0, 0}, p)) == 0.0);
    CHECK(max_abs(rhs_ode({1, 0, 0}, p)) == 0.0);
  }
}

TEST_CASE("rhs matches the written system term by term") {
  const ModelParams p = ModelParams::baseline();
  const State3 s{0.4, 12.0, 0.05};
  const State3 f = rhs_ode(s, p);
  CHECK(f.u == doctest::Approx(0.3 * 0.4 * (1 - 0.45) - 0.002 * 0.4 * 12.0).epsilon(1e-15));
  CHECK(f.v == doctest::Approx(3500 * 1.0 * 0.05 - 4.0 * 12.0 - 0.002 * 0.45 * 12.0).epsilon(1e-15));
  CHECK(f.i == doctest::Approx(0.002 * 0.4 * 12.0 - 0.05).epsilon(1e-15));
}

TEST_CASE("Jacobian agrees with central differences at random states") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ModelParams p = ModelParams::baseline();
  for (int trial = 0; trial < 100; ++trial) {
    const State3 s{unit(rng), 100.0 * unit(rng), unit(rng)};
    const Mat3 j = jacobian_ode(s, p);
    for (int c = 0; c < 3; ++c) {
      const double h = 1e-6 * std::max(1.0, std::abs(s[c]));
      State3 a = s, b = s;
      a[c] += h;
      b[c] -= h;
      const State3 fa = rhs_ode(a, p), fb = rhs_ode(b, p);
      for (int r = 0; r < 3; ++r) {
        const double fd = (fa[r] - fb[r]) / (2 * h);
        CHECK(std::abs(fd - j[r][c]) <= 1e-5 * std::max(1.0, std::abs(j[r][c])));
      }
    }
  }
}

TEST_CASE("origin spectrum is (r_u, -delta_i, -delta_v)") {
  const ModelParams p = ModelParams::baseline();
  const Eigentriple e = eigensolve_3x3(jacobian_ode({0, 0, 0}, p));
  CHECK(e.values[0].real() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(e.values[1].real() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(e.values[2].real() == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(e.stability == Stability::unstable);
}

TEST_CASE("spectrum at carrying capacity matches the closed form") {
  for (double beta : {0.0005, 0.002, 0.01}) {
    const ModelParams p = ModelParams::baseline(beta);
    const Eigentriple num = eigensolve_3x3(jacobian_ode({1, 0, 0}, p));
    const double b = beta + p.delta_i + p.delta_v;
    const double c = p.delta_i * (beta - p.alpha * beta + p.delta_v);
    const double disc = std::sqrt(b * b - 4 * c);
    const double expected[3] = {0.5 * (-b + disc), -p.r_u, 0.5 * (-b - disc)};
    std::array<double, 3> sorted = {expected[0], expected[1], expected[2]};
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(num.values[k].real() - sorted[k]) < 1e-9);
      CHECK(std::abs(num.values[k].imag()) < 1e-12);
    }
    const Eigentriple closed = capacity_eigenvalues(p);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(closed.values[k] - num.values[k]) < 1e-9);
  }
}

TEST_CASE("beta_star threshold") {
  CHECK(beta_star(ModelParams::baseline()) == doctest::Approx(4.0 / 3499.0).epsilon(1e-15));
  CHECK(std::abs(beta_star(ModelParams::baseline()) - 0.0011432) < 1e-7);
  ModelParams p = ModelParams::baseline();
  p.alpha = 2.0;
  CHECK(beta_star(p) == 4.0);
  p.alpha = 1.0;
  CHECK_THROWS_AS(beta_star(p), std::domain_error);

  // Inverted at beta = 0.002: delta_v = beta (alpha - 1).
  ModelParams q = ModelParams::baseline();
  q.delta_v = 0.002 * 3499.0;
  CHECK(q.delta_v == doctest::Approx(6.998));
  CHECK(beta_star(q) == doctest::Approx(0.002).epsilon(1e-14));
}

TEST_CASE("carrying capacity changes stability at beta_star") {
  const ModelParams base = ModelParams::baseline();
  const double bs = beta_star(base);
  for (double f : {0.2, 0.5, 0.9, 0.999}) {
    CHECK(eigensolve_3x3(jacobian_ode({1, 0, 0}, ModelParams::baseline(bs * f))).max_real() < 0.0);
  }
  for (double f : {1.001, 1.5, 5.0, 50.0}) {
    CHECK(eigensolve_3x3(jacobian_ode({1, 0, 0}, ModelParams::baseline(bs * f))).max_real() > 0.0);
  }
  CHECK(std::abs(capacity_eigenvalues(ModelParams::baseline(bs)).max_real()) < 1e-12);
}

TEST_CASE("coexistence equilibrium at beta = 0.002") {
  const ModelParams p = ModelParams::baseline();
  const auto eq = coexistence_equilibrium(p);
  REQUIRE(eq);
  CHECK(eq->biological);
  CHECK(eq->state.u == doctest::Approx(0.57161).epsilon(1e-5));
  CHECK(eq->state.u == doctest::Approx(0.5716098).epsilon(1e-6));
  CHECK(eq->state.v == doctest::Approx(54.852296).epsilon(1e-6));
  CHECK(eq->state.i == doctest::Approx(0.0627082).epsilon(1e-5));
  CHECK(max_abs(rhs_ode(eq->state, p)) < 1e-10);
  CHECK(eq->eigen.stability == Stability::stable);
}

TEST_CASE("below the branch point the coexistence state is non-biological") {
  const auto eq = coexistence_equilibrium(ModelParams::baseline(0.001));
  REQUIRE(eq);
  CHECK_FALSE(eq->biological);
  CHECK((eq->state.v < 0.0 || eq->state.i < 0.0));
}

TEST_CASE("coexistence root agrees with an independent bisection") {
  const ModelParams p = ModelParams::baseline(0.005);
  const auto eq = coexistence_equilibrium(p);
  REQUIRE(eq);
  const double u = bisect_quadratic(equilibrium_quadratic(p), 0.0, 1.0);
  CHECK(std::abs(eq->state.u - u) < 1e-10);
  CHECK(max_abs(rhs_ode(eq->state, p)) < 1e-10);
}

TEST_CASE("other root is negative and also an equilibrium") {
  const ModelParams p = ModelParams::baseline();
  const auto a = coexistence_equilibrium(p);
  const auto b = other_root_equilibrium(p);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(b->state.u < 0.0);
  CHECK_FALSE(b->biological);
  const auto q = equilibrium_quadratic(p);
  CHECK(a->state.u * b->state.u == doctest::Approx(q.c / q.a).epsilon(1e-12));
  // V is of order 1e6 here, so the residual is judged against the term size.
  CHECK(max_abs(rhs_ode(b->state, p)) < 1e-10 * std::max(1.0, rhs_term_scale(b->state, p)));
  CHECK(max_abs(rhs_ode(a->state, p)) < 1e-10);
}

TEST_CASE("coexistence U decreases in beta") {
  const ModelParams p = ModelParams::baseline();
  const double lo = beta_star(p) * 1.0001, hi = 10 * 0.00871;
  double prev = 2.0;
  for (int k = 0; k <= 200; ++k) {
    const double beta = lo + (hi - lo) * k / 200.0;
    const auto eq = coexistence_equilibrium(ModelParams::baseline(beta));
    REQUIRE(eq);
    CHECK(eq->state.u < prev);
    prev = eq->state.u;
  }
}

TEST_CASE("immortal virus equilibrium spectrum") {
  ModelParams p = ModelParams::baseline();
  p.delta_v = 0.0;
  auto e = immortal_virus_equilibrium_eigenvalues(0.0, p);
  CHECK(e.values[0] == Complex(0.3, 0));
  CHECK(e.values[1] == Complex(0.0, 0));
  CHECK(e.values[2] == Complex(-1.0, 0));
  e = immortal_virus_equilibrium_eigenvalues(p.r_u / p.beta, p);
  CHECK(std::abs(e.values[0].real()) < 1e-15);
  CHECK(std::abs(e.values[1].real()) < 1e-15);
  e = immortal_virus_equilibrium_eigenvalues(2 * p.r_u / p.beta, p);
  CHECK(e.values[0].real() == 0.0);
  CHECK(e.values[1].real() == doctest::Approx(-0.3).epsilon(1e-14));
  CHECK(e.values[2].real() == -1.0);
  CHECK_THROWS_AS(immortal_virus_equilibrium_eigenvalues(1.0, ModelParams::baseline()), std::invalid_argument);
}

TEST_CASE("parameter derivatives match finite differences") {
  const ModelParams p = ModelParams::baseline();
  const State3 s{0.6, 40.0, 0.07};
  for (Param which : {Param::beta, Param::alpha, Param::delta_v, Param::delta_i}) {
    const double x = get(p, which);
    const double h = 1e-6 * x;
    ModelParams a = p, b = p;
    set(a, which, x + h);
    set(b, which, x - h);
    const State3 fd = (1.0 / (2 * h)) * (rhs_ode(s, a) - rhs_ode(s, b));
    const State3 an = rhs_param_derivative(s, p, which);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(fd[k] - an[k]) <= 1e-6 * std::max(1.0, std::abs(an[k])));
  }
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(ModelParams::baseline().validate());
  ModelParams p = ModelParams::baseline();
  p.alpha = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ModelParams::baseline();
  p.r_v = 3.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ModelParams::baseline();
  p.d_u = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ModelParams::baseline();
  p.v0 = 0.0;
  CHECK_NOTHROW(p.validate());
  CHECK(set_field(p, "beta", 0.01));
  CHECK(p.beta == 0.01);
  CHECK_FALSE(set_field(p, "gamma", 1.0));
}

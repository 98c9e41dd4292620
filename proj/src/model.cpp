#include "oncovir/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oncovir {

State3 rhs_ode(const State3& s, const ModelParams& p) {
  const double infection = p.beta * s.u * s.v;
  return {
      p.r_u * s.u * (1.0 - (s.u + s.i)) - infection,
      p.alpha * p.delta_i * s.i - p.delta_v * s.v - p.beta * (s.u + s.i) * s.v,
      infection - p.delta_i * s.i,
  };
}

double rhs_term_scale(const State3& s, const ModelParams& p) {
  const double infection = std::abs(p.beta * s.u * s.v);
  return std::max({std::abs(p.r_u * s.u), std::abs(p.r_u * s.u * (s.u + s.i)), infection,
                   std::abs(p.alpha * p.delta_i * s.i), std::abs(p.delta_v * s.v),
                   std::abs(p.beta * (s.u + s.i) * s.v), std::abs(p.delta_i * s.i)});
}

Mat3 jacobian_ode(const State3& s, const ModelParams& p) {
  const double bv = p.beta * s.v;
  const double bu = p.beta * s.u;
  return {{
      {p.r_u * (1.0 - s.i - 2.0 * s.u) - bv, -bu, -p.r_u * s.u},
      {-bv, -(s.i + s.u) * p.beta - p.delta_v, -bv + p.alpha * p.delta_i},
      {bv, bu, -p.delta_i},
  }};
}

State3 rhs_param_derivative(const State3& s, const ModelParams& p, Param which) {
  switch (which) {
    case Param::beta: return {-s.u * s.v, -(s.u + s.i) * s.v, s.u * s.v};
    case Param::alpha: return {0.0, p.delta_i * s.i, 0.0};
    case Param::delta_v: return {0.0, -s.v, 0.0};
    case Param::delta_i: return {0.0, p.alpha * s.i, -s.i};
  }
  return {};
}

double beta_star(const ModelParams& p) {
  if (!(p.alpha > 1.0)) throw std::domain_error("beta_star: alpha must exceed 1");
  return p.delta_v / (p.alpha - 1.0);
}

Eigentriple capacity_eigenvalues(const ModelParams& p) {
  const double sum = p.beta + p.delta_i + p.delta_v;
  const double disc = sum * sum - 4.0 * p.delta_i * (p.beta - p.alpha * p.beta + p.delta_v);
  std::array<Complex, 3> vals;
  vals[0] = Complex(-p.r_u, 0.0);
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    vals[1] = Complex(0.5 * (-sum + root), 0.0);
    vals[2] = Complex(0.5 * (-sum - root), 0.0);
  } else {
    const double root = std::sqrt(-disc);
    vals[1] = Complex(-0.5 * sum, 0.5 * root);
    vals[2] = Complex(-0.5 * sum, -0.5 * root);
  }
  std::sort(vals.begin(), vals.end(), [](const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return {vals, classify(vals)};
}

EquilibriumQuadratic equilibrium_quadratic(const ModelParams& p) {
  const double r = p.r_u;
  const double b = p.beta;
  const double di = p.delta_i;
  const double dv = p.delta_v;
  return {
      p.alpha * b * b * r * di,
      di * b * (p.alpha * b * di - r * dv - b * di - r * b),
      -di * di * dv * b,
  };
}

State3 equilibrium_from_u(double u, const ModelParams& p) {
  // U-equation divided by U gives V; the I-equation then gives I.
  const double v = p.r_u * p.delta_i * (1.0 - u) / (p.beta * (p.r_u * u + p.delta_i));
  const double i = p.beta * u * v / p.delta_i;
  return {u, v, i};
}

namespace {

struct Roots {
  double larger, smaller;
};

std::optional<Roots> quadratic_roots(const EquilibriumQuadratic& q) {
  if (q.a == 0.0) return std::nullopt;
  const double disc = q.b * q.b - 4.0 * q.a * q.c;
  if (disc < 0.0 || !std::isfinite(disc)) return std::nullopt;
  const double half = -0.5 * (q.b + std::copysign(std::sqrt(disc), q.b));
  const double r1 = half / q.a;
  const double r2 = half != 0.0 ? q.c / half : 0.0;
  return Roots{std::max(r1, r2), std::min(r1, r2)};
}

bool in_unit_interval(double u) { return u > 0.0 && u <= 1.0; }

Equilibrium make_equilibrium(double u, const ModelParams& p) {
  Equilibrium e;
  e.state = equilibrium_from_u(u, p);
  e.eigen = eigensolve_3x3(jacobian_ode(e.state, p));
  e.biological = in_unit_interval(e.state.u) && e.state.v >= 0.0 && e.state.i >= 0.0;
  return e;
}

// Returns {coexistence root, other root}.
std::optional<std::pair<double, double>> ordered_roots(const ModelParams& p) {
  const auto roots = quadratic_roots(equilibrium_quadratic(p));
  if (!roots) return std::nullopt;
  const bool big_ok = in_unit_interval(roots->larger);
  const bool small_ok = in_unit_interval(roots->smaller);
  if (small_ok && !big_ok) return std::pair{roots->smaller, roots->larger};
  return std::pair{roots->larger, roots->smaller};
}

}  // namespace

std::optional<Equilibrium> coexistence_equilibrium(const ModelParams& p) {
  const auto roots = ordered_roots(p);
  if (!roots) return std::nullopt;
  return make_equilibrium(roots->first, p);
}

std::optional<Equilibrium> other_root_equilibrium(const ModelParams& p) {
  const auto roots = ordered_roots(p);
  if (!roots) return std::nullopt;
  return make_equilibrium(roots->second, p);
}

Eigentriple immortal_virus_equilibrium_eigenvalues(double v, const ModelParams& p) {
  if (p.delta_v != 0.0) {
    throw std::invalid_argument("immortal_virus_equilibrium_eigenvalues: requires delta_v == 0");
  }
  std::array<Complex, 3> vals{Complex(0.0), Complex(p.r_u - v * p.beta), Complex(-p.delta_i)};
  std::sort(vals.begin(), vals.end(),
            [](const Complex& x, const Complex& y) { return x.real() > y.real(); });
  return {vals, classify(vals)};
}

}  // namespace oncovir

#pragma once

#include <optional>

#include "oncovir/linalg3.hpp"
#include "oncovir/params.hpp"

namespace oncovir {

/// Right-hand side of the well-mixed (diffusion-free) system.
State3 rhs_ode(const State3& s, const ModelParams& p);

/// Largest absolute value among the individual terms of rhs_ode at `s`.
/// Residuals are only meaningful relative to this (plus one).
double rhs_term_scale(const State3& s, const ModelParams& p);

Mat3 jacobian_ode(const State3& s, const ModelParams& p);

/// Partial derivative of rhs_ode with respect to one continuation parameter.
State3 rhs_param_derivative(const State3& s, const ModelParams& p, Param which);

/// Infectivity above which the failed-therapy state (1, 0, 0) is unstable.
/// Throws std::domain_error when alpha <= 1.
double beta_star(const ModelParams& p);

/// Closed-form spectrum at (1, 0, 0): -r_u and the two roots of
/// lambda^2 + (beta + delta_i + delta_v) lambda + delta_i (beta - alpha beta + delta_v).
Eigentriple capacity_eigenvalues(const ModelParams& p);

/// Coefficients of A U^2 + B U + C = 0 whose roots are the U components of
/// the two parameter-dependent equilibria.
struct EquilibriumQuadratic {
  double a, b, c;
};
EquilibriumQuadratic equilibrium_quadratic(const ModelParams& p);

struct Equilibrium {
  State3 state;
  Eigentriple eigen;
  /// U in (0, 1] and V, I >= 0.
  bool biological = false;
};

/// Tumour/virus coexistence equilibrium. The root with U in (0, 1] is chosen;
/// if both or neither qualify the larger root is returned, flagged
/// non-biological. Absent when the quadratic has no real root.
std::optional<Equilibrium> coexistence_equilibrium(const ModelParams& p);

/// The remaining root of the equilibrium quadratic.
std::optional<Equilibrium> other_root_equilibrium(const ModelParams& p);

/// Equilibrium state for a given root U of the quadratic, with V and I
/// recovered from the U and I steady-state equations.
State3 equilibrium_from_u(double u, const ModelParams& p);

/// Spectrum (0, r_u - v beta, -delta_i) of the (0, v, 0) equilibrium that
/// exists when the virus never decays. Throws std::invalid_argument unless
/// p.delta_v == 0.
Eigentriple immortal_virus_equilibrium_eigenvalues(double v, const ModelParams& p);

}  // namespace oncovir

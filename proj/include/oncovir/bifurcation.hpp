#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oncovir/integrator.hpp"
#include "oncovir/linalg3.hpp"
#include "oncovir/model.hpp"
#include "oncovir/params.hpp"

namespace oncovir {

class ContinuationError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct EquilibriumPoint {
  double param_value = 0.0;
  State3 state;
  Eigentriple eigen;

  bool stable() const { return eigen.stability == Stability::stable; }
};

enum class EventKind { branch_point, hopf };
std::string_view to_string(EventKind kind);

struct BifurcationEvent {
  EventKind kind = EventKind::branch_point;
  double param_value = 0.0;
  Complex eigenvalue;  // the crossing eigenvalue (upper member for Hopf)
  State3 state;
};

struct Branch {
  Param parameter = Param::beta;
  std::vector<EquilibriumPoint> points;
  std::vector<BifurcationEvent> events;
};

struct NewtonOptions {
  /// Converged when ||rhs||_inf <= tol * max(1, rhs_term_scale).
  double tol = 1e-12;
  int max_iterations = 60;
};

/// Damped Newton on rhs_ode = 0. Throws ContinuationError on non-convergence
/// or a singular Jacobian.
EquilibriumPoint newton_equilibrium(const ModelParams& p, const State3& guess, Param active = Param::beta,
                                    const NewtonOptions& opts = {});

struct ContinuationOptions {
  /// Initial, minimum and maximum arclength steps, as fractions of |hi - lo|
  /// in the parameter direction (state components are scaled by their
  /// starting magnitude).
  double initial_step = 1e-3;
  double min_step = 1e-9;
  double max_step = 0.02;
  int corrector_max_iterations = 12;
  double corrector_tol = 1e-12;
  /// Components of the state may not leave these bounds (V is not bounded by
  /// the carrying capacity, so it gets its own limit).
  double max_abs_ui = 10.0;
  double max_abs_v = 1e7;
  std::size_t max_points = 200000;
  /// Tolerance on the crossing eigenvalue's real part for refined events.
  double event_tol = 1e-10;
};

/// Pseudo-arclength continuation of an equilibrium branch in one parameter
/// over [lo, hi], starting from `start` (whose param_value must be lo or hi).
/// Eigenvalues are computed at every accepted point; sign changes of det(J)
/// (real crossing) or of the real part of a complex pair (Hopf) are refined
/// by bisection along the branch and recorded as events.
Branch continue_branch(const ModelParams& p, Param parameter, double lo, double hi,
                       const EquilibriumPoint& start, const ContinuationOptions& opts = {});

/// Coexistence equilibrium at `value` (closed form, Newton-polished).
EquilibriumPoint coexistence_point(const ModelParams& p, Param parameter, double value);

/// State and Jacobian of a one-parameter family, as seen by refine_hopf.
struct FamilySample {
  State3 state;
  Mat3 jacobian;
};
using MatrixFamily = std::function<FamilySample(double param)>;

/// Bisection plus secant polish of the real part of the complex pair of
/// family(param) on [a, b], until |Re| < tol. Throws std::invalid_argument if
/// the pair is missing at either end or its real part does not change sign.
BifurcationEvent refine_hopf(const MatrixFamily& family, double a, double b, double tol = 1e-9);

/// refine_hopf on an equilibrium branch between two bracketing points,
/// re-solving the equilibrium at every trial parameter.
BifurcationEvent refine_hopf(const ModelParams& p, Param parameter, const EquilibriumPoint& a,
                             const EquilibriumPoint& b, double tol = 1e-9);

struct LimitCycleSample {
  double param_value = 0.0;
  double u_max = 0.0;
  double u_min = 0.0;
  double period = 0.0;
  bool converged = false;
};

struct LimitCycleOptions {
  double t_end = 3000.0;
  double stride = 0.02;
  double transient_fraction = kDefaultTransientFraction;
  std::size_t peak_window = 5;
  double spread_tol = 1e-4;
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  /// Initial state is the coexistence equilibrium with u scaled by this.
  double perturbation = 0.9;
};

/// Stabilised maximum, minimum and period of u at each parameter value,
/// measured by long integrations.
std::vector<LimitCycleSample> limit_cycle_branch(const ModelParams& p, Param parameter,
                                                 const std::vector<double>& values,
                                                 const LimitCycleOptions& opts = {});

struct HopfPoint {
  double delta_v = 0.0;
  double delta_i = 0.0;
  /// Consecutive points with equal segment ids form one connected piece.
  int segment = 0;
};

struct HopfCurve {
  double beta = 0.0;
  std::vector<HopfPoint> points;
  /// delta_i values where the curve meets delta_v = 0, ascending. The
  /// largest is the threshold above which an immortal virus eradicates.
  std::vector<double> axis_intersections;
};

struct HopfCurveOptions {
  double delta_i_min = 1e-3;
  double delta_i_max = 100.0;
  std::size_t delta_i_points = 400;
  double delta_v_min = 1e-6;
  std::size_t delta_v_points = 160;
  /// delta_v used to evaluate the curve's limit on the delta_v = 0 axis.
  double axis_delta_v = 1e-9;
  double tol = 1e-12;
  bool reverse = false;
};

/// Hopf locus of the coexistence equilibrium in the (delta_v, delta_i)
/// plane, one curve per beta: on a log grid of delta_i, every sign change
/// of Re(pair) in delta_v is bracketed and bisected.
std::vector<HopfCurve> hopf_curve_2param(const ModelParams& p, const std::vector<double>& beta_values,
                                         const HopfCurveOptions& opts = {});

/// delta_i values where the curve crosses the line delta_v = level
/// (linear interpolation in log delta_i between curve points).
std::vector<double> delta_i_crossings(const HopfCurve& curve, double delta_v_level);

/// Area between the curve and the delta_i axis (trapezoid in delta_i).
double enclosed_area(const HopfCurve& curve);

/// Real part of the coexistence equilibrium's complex pair, if it has one.
std::optional<double> coexistence_pair_real_part(const ModelParams& p);

}  // namespace oncovir

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oncovir/linalg3.hpp"
#include "oncovir/params.hpp"

namespace oncovir {

/// Raised for failures of a numerical method (as opposed to bad input).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationError : public NumericError {
 public:
  enum class Kind { step_underflow, non_finite, too_many_steps };
  IntegrationError(Kind kind, double t, const std::string& what)
      : NumericError(what), kind_(kind), time_(t) {}
  Kind kind() const { return kind_; }
  /// Time of the last accepted step (the blow-up time for underflow).
  double time() const { return time_; }

 private:
  Kind kind_;
  double time_;
};

struct IntegrationConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double t_start = 0.0;
  double t_end = 1.0;
  double max_step = std::numeric_limits<double>::infinity();
  double dense_output_stride = 0.1;
  /// When non-empty, the observer is called at exactly these (sorted) times
  /// instead of on the stride grid.
  std::vector<double> output_times;
  /// Zero picks a starting step automatically.
  double initial_step = 0.0;
  std::size_t max_steps = 50'000'000;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

using RhsFunction = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
using SampleObserver = std::function<void(double t, std::span<const double> y)>;

/// Dormand-Prince 5(4) with step-size PI control and the 4th-order continuous
/// extension. The observer is called at t_start, every multiple of the
/// stride, and t_end (or at `output_times`). On return `y` holds the state at t_end.
StepStats integrate_system(const RhsFunction& rhs, std::vector<double>& y,
                           const IntegrationConfig& cfg, const SampleObserver& observer);

struct Trajectory {
  std::vector<double> times;
  std::vector<State3> states;
  StepStats step_stats;
};

/// Integrates the well-mixed model from `s0`.
Trajectory integrate(const ModelParams& p, const State3& s0, const IntegrationConfig& cfg);

enum class Component { u, v, i };

std::vector<double> component_series(const Trajectory& traj, Component c);

struct Peak {
  double time;
  double value;
};

/// Local maxima of a sampled signal at t >= t_discard, each refined by the
/// vertex of the parabola through the sample triple around it.
std::vector<Peak> detect_peaks(std::span<const double> times, std::span<const double> values,
                               double t_discard);
std::vector<Peak> detect_peaks(const Trajectory& traj, Component c, double t_discard);

/// Default fraction of an integration window treated as transient when
/// measuring a limit cycle.
inline constexpr double kDefaultTransientFraction = 0.6;

struct LimitCycleMeasure {
  double max_value = 0.0;  // mean of the last stabilised maxima
  double min_value = 0.0;  // mean of the last stabilised minima
  double period = 0.0;     // mean spacing of the last maxima
  double max_spread = 0.0; // spread of the maxima used
  std::size_t peak_count = 0;
  bool converged = false;
};

/// Summarises oscillations after `t_discard` using the last `window` peaks.
/// Converged when at least `window` peaks exist and their values agree to
/// within `spread_tol`.
LimitCycleMeasure measure_limit_cycle(std::span<const double> times, std::span<const double> values,
                                      double t_discard, std::size_t window = 5,
                                      double spread_tol = 1e-4);

}  // namespace oncovir

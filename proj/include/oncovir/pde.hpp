#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "oncovir/integrator.hpp"
#include "oncovir/params.hpp"

namespace oncovir {

/// Uniform radial grid r_j = j * dr, j = 0..n-1, with r_{n-1} the domain radius.
struct RadialGrid {
  std::size_t n = 0;
  double dr = 0.0;

  /// Grid on [0, length] whose spacing is the closest to `target_dr` that
  /// divides the length evenly. Throws std::invalid_argument if fewer than 32
  /// nodes would result.
  static RadialGrid uniform(double length, double target_dr);

  double r(std::size_t j) const { return static_cast<double>(j) * dr; }
  double length() const { return r(n - 1); }
};

inline constexpr std::size_t kMinGridNodes = 32;

enum class Population { u, v, i, tumour };

struct RadialField {
  RadialGrid grid;
  std::vector<double> u, v, i;
  double time = 0.0;

  /// Node values of one population (`tumour` is u + i).
  std::vector<double> values(Population pop) const;
};

/// Step profiles: u = u0 inside r_t, v = v0 inside r_v, no infected cells.
RadialField initial_condition(const ModelParams& p, const RadialGrid& g);

/// (1/r^2) d/dr (r^2 df/dr) by second-order central differences, with the
/// 3 f'' limit at r = 0 and zero-flux ghost nodes at both ends.
void spherical_laplacian(std::span<const double> f, const RadialGrid& g, std::span<double> out);
std::vector<double> spherical_laplacian(std::span<const double> f, const RadialGrid& g);

/// 4 pi k * integral of r^2 pop(r) dr, composite trapezoid. For the virus
/// this is a virion count, otherwise a cell count.
double total_cells(const RadialField& f, const ModelParams& p, Population pop);
double total_cells(std::span<const double> values, const RadialGrid& g, double k);

/// Outermost radius where the profile falls through `level`, linearly
/// interpolated between the bracketing nodes. Absent when the profile never
/// reaches `level` or is still above it at the outer boundary.
std::optional<double> front_position(std::span<const double> values, const RadialGrid& g, double level);
std::optional<double> front_position(const RadialField& f, Population pop, double level);

/// Least-squares slope of position against time over [t_from, t_to].
/// Throws std::invalid_argument for fewer than two samples or a degenerate window.
double wave_speed(std::span<const std::pair<double, double>> series, double t_from, double t_to);

/// Mean nodal density over the innermost 10% of the domain.
double tail_density(const RadialField& f, Population pop);

/// Caliper volume 0.523 L W^2 with L = W = 2 r.
double tumour_volume(double front_radius);

/// Value of a profile at radius r by linear interpolation.
double sample_at(std::span<const double> values, const RadialGrid& g, double r);

enum class OscillationKind { damped, persistent };

struct OscillationReport {
  OscillationKind kind = OscillationKind::damped;
  bool low_confidence = false;
  /// Peak-to-trough amplitude of each consecutive window, oldest first,
  /// ending at the last sample. Windows without a full oscillation report 0.
  std::vector<double> amplitudes;
};

/// Persistent iff the amplitude in the final window is at least half the
/// amplitude one window earlier. Amplitudes below `noise_floor` times the
/// mean |value| of the final window count as zero.
OscillationReport oscillation_monitor(std::span<const std::pair<double, double>> series, double window,
                                      double noise_floor = 1e-4);

inline constexpr double kDefaultDr = 0.05;

inline IntegrationConfig default_pde_integrator() {
  IntegrationConfig c;
  c.rel_tol = 1e-6;
  c.abs_tol = 1e-9;
  return c;
}

struct PdeRunConfig {
  double t_end = 40.0;
  std::vector<double> snapshot_times;
  double dr = kDefaultDr;
  /// Spacing of the observable time series, days.
  double observable_stride = 0.5;
  /// Radii (mm) at which u is recorded alongside the observables.
  std::vector<double> probe_radii;
  /// Level at which the uninfected-cell front is tracked.
  double front_level = 0.5;
  /// Virus front is tracked at this fraction of the instantaneous maximum.
  double virus_front_fraction = 0.01;
  /// rel_tol, abs_tol, max_step and max_steps are used; the time window and
  /// outputs come from the fields above.
  IntegrationConfig integrator = default_pde_integrator();

  void validate(const ModelParams& p) const;
};

struct ObservableRow {
  double t = 0.0;
  double total_u = 0.0;
  double total_i = 0.0;
  double total_v = 0.0;
  std::optional<double> front_u_mm;
  double tail_u = 0.0;
  std::optional<double> front_v_mm;
  std::vector<double> probe_u;
};

struct PdeResult {
  std::vector<RadialField> snapshots;
  std::vector<ObservableRow> observables;
  /// First sampled time at which uninfected plus infected cells number fewer than one.
  std::optional<double> eradication_time;
  /// Smallest nodal value of any population over all samples.
  double min_density = 0.0;
  RadialField final_field;
  StepStats step_stats;
};

/// Method-of-lines solve of the spherically symmetric reaction-diffusion
/// system. Throws NumericError (with the failure time) on blow-up.
PdeResult run_pde(const ModelParams& p, const PdeRunConfig& cfg);

/// Same run from an arbitrary initial field (grid taken from the field).
PdeResult run_pde(const ModelParams& p, const PdeRunConfig& cfg, RadialField initial);

std::vector<std::pair<double, double>> front_series(const PdeResult& r);
std::vector<std::pair<double, double>> virus_front_series(const PdeResult& r);
std::vector<std::pair<double, double>> probe_series(const PdeResult& r, std::size_t probe);

}  // namespace oncovir

#pragma once

#include <string>

#include "oncovir/params.hpp"

namespace oncovir {

/// Experimental inputs from which the published parameter table is derived.
struct CalibrationInputs {
  double doubling_time = 1.875;     // days (45 h)
  double initial_radius = 2.6;      // mm
  double final_radius = 6.0;        // mm
  double observation_span = 40.0;   // days
  double dose = 1.0e10;             // virions
  double injection_radius = 0.5;    // mm
  double initial_volume = 70.0;     // mm^3
  double lethal_volume = 2500.0;    // mm^3
  double carrying_capacity = 1.0e6; // cells/mm^3

  /// Throws std::invalid_argument.
  void validate() const;
};

double growth_rate_from_doubling(double doubling_time);

/// Front speed c = (final - initial radius) / span, then D = (c/2)^2 / r_u.
double front_speed(const CalibrationInputs& in);
double diffusivity_from_front(const CalibrationInputs& in, double growth_rate);

double injection_density(double dose, double radius);

/// Inverse of tumour_volume: r = (vol / 4.184)^(1/3).
double radius_from_volume(double volume);

struct CalibrationResult {
  double growth_rate = 0.0;
  double front_speed = 0.0;
  double diffusivity = 0.0;          // from the unrounded growth rate
  double diffusivity_table_rate = 0.0;  // from the tabulated growth rate
  double virus_density = 0.0;        // virions/mm^3
  double initial_radius = 0.0;
  double lethal_radius = 0.0;

  /// Table parameters, or the derived ones when `unrounded` is set.
  ModelParams params(bool unrounded = false) const;
};

CalibrationResult calibrate(const CalibrationInputs& in);

/// Plain-text table comparing derived and tabulated values.
std::string calibration_report(const CalibrationInputs& in, const CalibrationResult& r);

}  // namespace oncovir

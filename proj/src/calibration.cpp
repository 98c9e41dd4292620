#include "oncovir/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oncovir/format.hpp"

namespace oncovir {

void CalibrationInputs::validate() const {
  const double fields[] = {doubling_time, initial_radius, final_radius, observation_span, dose,
                           injection_radius, initial_volume, lethal_volume, carrying_capacity};
  for (double f : fields) {
    if (!(f > 0.0)) throw std::invalid_argument("CalibrationInputs: all inputs must be positive");
  }
  if (!(final_radius > initial_radius)) {
    throw std::invalid_argument("CalibrationInputs: final_radius must exceed initial_radius");
  }
}

double growth_rate_from_doubling(double doubling_time) {
  if (!(doubling_time > 0.0)) throw std::invalid_argument("growth_rate_from_doubling: need a positive time");
  return std::numbers::ln2 / doubling_time;
}

double front_speed(const CalibrationInputs& in) {
  return (in.final_radius - in.initial_radius) / in.observation_span;
}

double diffusivity_from_front(const CalibrationInputs& in, double growth_rate) {
  if (!(growth_rate > 0.0)) throw std::invalid_argument("diffusivity_from_front: growth rate must be positive");
  const double half = 0.5 * front_speed(in);
  return half * half / growth_rate;
}

double injection_density(double dose, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("injection_density: radius must be positive");
  return dose / (4.0 / 3.0 * std::numbers::pi * radius * radius * radius);
}

double radius_from_volume(double volume) {
  if (volume < 0.0) throw std::invalid_argument("radius_from_volume: negative volume");
  return std::cbrt(volume / (0.523 * 8.0));
}

CalibrationResult calibrate(const CalibrationInputs& in) {
  in.validate();
  const ModelParams table = ModelParams::baseline();
  CalibrationResult r;
  r.growth_rate = growth_rate_from_doubling(in.doubling_time);
  r.front_speed = front_speed(in);
  r.diffusivity = diffusivity_from_front(in, r.growth_rate);
  r.diffusivity_table_rate = diffusivity_from_front(in, table.r_u);
  r.virus_density = injection_density(in.dose, in.injection_radius);
  r.initial_radius = radius_from_volume(in.initial_volume);
  r.lethal_radius = radius_from_volume(in.lethal_volume);
  return r;
}

ModelParams CalibrationResult::params(bool unrounded) const {
  ModelParams p = ModelParams::baseline();
  if (!unrounded) return p;
  p.r_u = growth_rate;
  p.d_u = diffusivity;
  p.v0 = virus_density / p.k;
  p.r_t = initial_radius;
  p.domain_l = std::max(p.domain_l, lethal_radius);
  return p;
}

std::string calibration_report(const CalibrationInputs& in, const CalibrationResult& r) {
  const ModelParams t = ModelParams::baseline();
  std::string out;
  auto row = [&out](std::string_view name, double derived, double table, std::string_view unit) {
    std::string line(name);
    line.resize(12, ' ');
    line += format_number(derived);
    line += "  ";
    line += format_number(table);
    line += "  ";
    line += unit;
    out += line + "\n";
  };
  out += "quantity    derived          table            unit\n";
  row("r_u", r.growth_rate, t.r_u, "1/day");
  row("c", r.front_speed, 2.0 * std::sqrt(t.r_u * t.d_u), "mm/day");
  row("d_u", r.diffusivity_table_rate, t.d_u, "mm^2/day");
  row("d_u_exact", r.diffusivity, t.d_u, "mm^2/day");
  row("v0", r.virus_density / in.carrying_capacity, t.v0, "scaled");
  row("r_t", r.initial_radius, t.r_t, "mm");
  row("r_lethal", r.lethal_radius, 8.4, "mm");
  return out;
}

}  // namespace oncovir

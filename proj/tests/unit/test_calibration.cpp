#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oncovir/calibration.hpp"
#include "oncovir/pde.hpp"

using namespace oncovir;

TEST_CASE("growth rate from doubling time") {
  CHECK(growth_rate_from_doubling(1.875) == doctest::Approx(0.3697).epsilon(1e-4));
  CHECK(growth_rate_from_doubling(1.0) == doctest::Approx(0.6931).epsilon(1e-4));
  CHECK(growth_rate_from_doubling(std::numbers::ln2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("diffusivity from the front") {
  CalibrationInputs in;
  CHECK(front_speed(in) == doctest::Approx(0.085).epsilon(1e-12));
  CHECK(diffusivity_from_front(in, 0.3) == doctest::Approx(0.00602).epsilon(1e-3));
  CalibrationInputs still = in;
  still.final_radius = still.initial_radius;
  CHECK(diffusivity_from_front(still, 0.3) == 0.0);
  const double d = diffusivity_from_front(in, 0.3);
  CHECK(std::abs(2.0 * std::sqrt(0.3 * d) - front_speed(in)) < 1e-12);
}

TEST_CASE("injection density") {
  CHECK(injection_density(1e10, 0.5) == doctest::Approx(1.9099e10).epsilon(1e-4));
  CHECK(injection_density(0.0, 0.5) == 0.0);
  CHECK(injection_density(1e10, 1.0) == doctest::Approx(injection_density(1e10, 0.5) / 8.0));
}

TEST_CASE("radius from volume") {
  CHECK(radius_from_volume(70) == doctest::Approx(2.56).epsilon(2e-3));
  CHECK(radius_from_volume(2500) == doctest::Approx(8.42).epsilon(1e-3));
  CHECK(radius_from_volume(0) == 0.0);
  for (double r : {0.1, 2.6, 6.0, 8.4}) {
    CHECK(std::abs(radius_from_volume(tumour_volume(r)) - r) < 1e-12 * r);
  }
}

TEST_CASE("calibration reproduces the table within its rounding") {
  const CalibrationResult r = calibrate(CalibrationInputs{});
  const ModelParams t = ModelParams::baseline();
  CHECK(std::round(r.growth_rate * 10) / 10 == doctest::Approx(0.4));  // rounds to 0.4, table says 0.3
  CHECK(r.diffusivity_table_rate == doctest::Approx(t.d_u).epsilon(0.01));
  CHECK(r.virus_density / t.k == doctest::Approx(t.v0).epsilon(0.01));
  CHECK(r.initial_radius == doctest::Approx(t.r_t).epsilon(0.02));
  CHECK(r.params() == t);
  const ModelParams u = r.params(true);
  CHECK(u.r_u == r.growth_rate);
  CHECK(u.d_u == r.diffusivity);
  CHECK_THROWS_AS(calibrate(CalibrationInputs{.doubling_time = -1}), std::invalid_argument);
}

TEST_CASE("report is deterministic") {
  const CalibrationInputs in;
  CHECK(calibration_report(in, calibrate(in)) == calibration_report(in, calibrate(in)));
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "oncovir/linalg3.hpp"

using namespace oncovir;

TEST_CASE("identity spectrum") {
  const Mat3 m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  const Eigentriple e = eigensolve_3x3(m);
  for (const auto& v : e.values) CHECK(std::abs(v - Complex(1, 0)) < 1e-12);
  CHECK(e.stability == Stability::unstable);
}

TEST_CASE("companion matrix of (l-1)(l-2)(l-3)") {
  const Mat3 m{{{6, -11, 6}, {1, 0, 0}, {0, 1, 0}}};
  const Eigentriple e = eigensolve_3x3(m);
  CHECK(std::abs(e.values[0] - Complex(3, 0)) < 1e-12);
  CHECK(std::abs(e.values[1] - Complex(2, 0)) < 1e-12);
  CHECK(std::abs(e.values[2] - Complex(1, 0)) < 1e-12);
}

TEST_CASE("rotation block gives an ordered complex pair") {
  const Mat3 m{{{-0.5, -2, 0}, {2, -0.5, 0}, {0, 0, -3}}};
  const Eigentriple e = eigensolve_3x3(m);
  REQUIRE(e.complex_pair());
  CHECK(*e.complex_pair() == 0);
  CHECK(std::abs(e.values[0] - Complex(-0.5, 2)) < 1e-12);
  CHECK(std::abs(e.values[1] - Complex(-0.5, -2)) < 1e-12);
  CHECK(e.stability == Stability::stable);
  CHECK_FALSE(e.real_nearest_zero() == std::nullopt);
  CHECK(*e.real_nearest_zero() == doctest::Approx(-3));
}

TEST_CASE("eigen residuals on random matrices") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 500; ++trial) {
    Mat3 m;
    for (auto& row : m)
      for (auto& x : row) x = g(rng) * std::pow(10.0, trial % 4);
    const Eigentriple e = eigensolve_3x3(m);
    for (const auto& l : e.values) CHECK(eigen_residual(m, l) <= 1e-9 * norm_inf(m));
    for (int k = 0; k < 2; ++k) CHECK(e.values[k].real() >= e.values[k + 1].real());
  }
}

TEST_CASE("stability deadband") {
  CHECK(classify({Complex(-1e-9, 0), Complex(-1, 0), Complex(-2, 0)}) == Stability::marginal);
  CHECK(classify({Complex(-2e-8, 0), Complex(-1, 0), Complex(-2, 0)}) == Stability::stable);
  CHECK(classify({Complex(2e-8, 0), Complex(-1, 0), Complex(-2, 0)}) == Stability::unstable);
}

TEST_CASE("solve3") {
  const Mat3 m{{{2, 1, 0}, {1, 3, 1}, {0, 1, 4}}};
  const auto x = solve3(m, {3, 5, 5});
  REQUIRE(x);
  CHECK((*x)[0] == doctest::Approx(1));
  CHECK((*x)[1] == doctest::Approx(1));
  CHECK((*x)[2] == doctest::Approx(1));
  const Mat3 singular{{{1, 2, 3}, {2, 4, 6}, {0, 1, 1}}};
  CHECK_FALSE(solve3(singular, {1, 2, 3}));
}

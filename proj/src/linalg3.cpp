#include "oncovir/linalg3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace oncovir {

double max_abs(const State3& s) {
  return std::max({std::abs(s.u), std::abs(s.v), std::abs(s.i)});
}

bool is_finite(const State3& s) {
  return std::isfinite(s.u) && std::isfinite(s.v) && std::isfinite(s.i);
}

double norm_inf(const Mat3& m) {
  double best = 0.0;
  for (const auto& row : m) {
    best = std::max(best, std::abs(row[0]) + std::abs(row[1]) + std::abs(row[2]));
  }
  return best;
}

std::optional<std::array<double, 3>> solve3(const Mat3& m, const std::array<double, 3>& b,
                                            double rel_pivot_tol) {
  Mat3 a = m;
  std::array<double, 3> x = b;
  const double floor = rel_pivot_tol * std::max(norm_inf(m), 1e-300);
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) <= floor) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(x[piv], x[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
      x[r] -= f * x[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = x[r];
    for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

std::optional<int> Eigentriple::complex_pair() const {
  for (int k = 0; k < 2; ++k) {
    if (values[k].imag() != 0.0 && values[k] == std::conj(values[k + 1])) return k;
  }
  return std::nullopt;
}

std::optional<double> Eigentriple::real_nearest_zero() const {
  std::optional<double> best;
  for (const auto& z : values) {
    if (z.imag() != 0.0) continue;
    if (!best || std::abs(z.real()) < std::abs(*best)) best = z.real();
  }
  return best;
}

Stability classify(const std::array<Complex, 3>& values, double tol) {
  bool all_stable = true;
  for (const auto& z : values) {
    if (z.real() > tol) return Stability::unstable;
    if (z.real() >= -tol) all_stable = false;
  }
  return all_stable ? Stability::stable : Stability::marginal;
}

namespace {

struct Cubic {
  // lambda^3 + a lambda^2 + b lambda + c
  double a, b, c;

  Complex eval(Complex z) const { return ((z + a) * z + b) * z + c; }
  Complex deriv(Complex z) const { return (3.0 * z + 2.0 * a) * z + b; }
};

Cubic characteristic(const Mat3& m) {
  const double tr = m[0][0] + m[1][1] + m[2][2];
  const double minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] -
                        m[0][2] * m[2][0] + m[1][1] * m[2][2] - m[1][2] * m[2][1];
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  return {-tr, minors, -det};
}

Complex polish(const Cubic& p, Complex z, int iterations) {
  for (int k = 0; k < iterations; ++k) {
    const Complex d = p.deriv(z);
    if (std::abs(d) == 0.0) break;
    const Complex next = z - p.eval(z) / d;
    if (!(std::abs(p.eval(next)) < std::abs(p.eval(z)))) break;
    z = next;
  }
  return z;
}

// One real root of the cubic; the largest in magnitude when all three are real.
double real_root(const Cubic& p) {
  const double shift = p.a / 3.0;
  const double pp = p.b - p.a * shift;
  const double qq = 2.0 * shift * shift * shift - shift * p.b + p.c;
  const double disc = 0.25 * qq * qq + pp * pp * pp / 27.0;
  double t = 0.0;
  if (disc >= 0.0) {
    const double big = -std::copysign(std::cbrt(0.5 * std::abs(qq) + std::sqrt(disc)), qq);
    t = big + (big != 0.0 ? -pp / (3.0 * big) : 0.0);
  } else {
    const double rho = 2.0 * std::sqrt(-pp / 3.0);
    const double arg = std::clamp(3.0 * qq / (pp * rho), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    double best = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double cand = rho * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0);
      if (std::abs(cand - shift) > std::abs(best - shift) || k == 0) best = cand;
    }
    t = best;
  }
  return polish(p, Complex(t - shift, 0.0), 3).real();
}

}  // namespace

Eigentriple eigensolve_3x3(const Mat3& m) {
  const Cubic p = characteristic(m);
  const double r = real_root(p);

  // Deflate to lambda^2 + e lambda + f.
  const double e = p.a + r;
  const double f = p.b + r * e;
  const double disc = e * e - 4.0 * f;

  std::array<Complex, 3> vals;
  vals[0] = Complex(r, 0.0);
  if (disc >= 0.0) {
    const double q = -0.5 * (e + std::copysign(std::sqrt(disc), e));
    const double r1 = q;
    const double r2 = q != 0.0 ? f / q : 0.0;
    vals[1] = Complex(polish(p, Complex(r1, 0.0), 2).real(), 0.0);
    vals[2] = Complex(polish(p, Complex(r2, 0.0), 2).real(), 0.0);
  } else {
    Complex z(-0.5 * e, 0.5 * std::sqrt(-disc));
    z = polish(p, z, 2);
    if (z.imag() < 0.0) z = std::conj(z);
    vals[1] = z;
    vals[2] = std::conj(z);
  }

  std::sort(vals.begin(), vals.end(), [](const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return {vals, classify(vals)};
}

std::array<Complex, 3> eigenvector(const Mat3& m, Complex lambda) {
  std::array<std::array<Complex, 3>, 3> rows;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rows[r][c] = m[r][c] - (r == c ? lambda : Complex(0.0));
  }
  auto cross = [](const std::array<Complex, 3>& x, const std::array<Complex, 3>& y) {
    return std::array<Complex, 3>{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2],
                                  x[0] * y[1] - x[1] * y[0]};
  };
  auto norm = [](const std::array<Complex, 3>& x) {
    return std::sqrt(std::norm(x[0]) + std::norm(x[1]) + std::norm(x[2]));
  };

  std::array<Complex, 3> best{};
  double best_norm = 0.0;
  for (auto [a, b] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    auto c = cross(rows[a], rows[b]);
    const double n = norm(c);
    if (n > best_norm) {
      best = c;
      best_norm = n;
    }
  }
  if (best_norm == 0.0) {
    // (m - lambda I) has rank <= 1: any vector orthogonal to its nonzero row works.
    for (const auto& row : rows) {
      if (norm(row) == 0.0) continue;
      const std::array<Complex, 3> trial{Complex(1.0), Complex(0.0), Complex(0.0)};
      auto c = cross(row, trial);
      if (norm(c) == 0.0) c = cross(row, {Complex(0.0), Complex(1.0), Complex(0.0)});
      const double n = norm(c);
      return {c[0] / n, c[1] / n, c[2] / n};
    }
    return {Complex(1.0), Complex(0.0), Complex(0.0)};
  }
  return {best[0] / best_norm, best[1] / best_norm, best[2] / best_norm};
}

double eigen_residual(const Mat3& m, Complex lambda) {
  const auto x = eigenvector(m, lambda);
  double sum = 0.0;
  for (int r = 0; r < 3; ++r) {
    Complex acc = -lambda * x[r];
    for (int c = 0; c < 3; ++c) acc += m[r][c] * x[c];
    sum += std::norm(acc);
  }
  return std::sqrt(sum);
}

}  // namespace oncovir

#pragma once

#include <array>
#include <complex>
#include <optional>

namespace oncovir {

/// Well-mixed (U, V, I) state, tumour populations scaled by carrying capacity.
struct State3 {
  double u = 0.0;
  double v = 0.0;
  double i = 0.0;

  constexpr double operator[](int k) const { return k == 0 ? u : (k == 1 ? v : i); }
  constexpr double& operator[](int k) { return k == 0 ? u : (k == 1 ? v : i); }

  friend constexpr State3 operator+(State3 a, State3 b) { return {a.u + b.u, a.v + b.v, a.i + b.i}; }
  friend constexpr State3 operator-(State3 a, State3 b) { return {a.u - b.u, a.v - b.v, a.i - b.i}; }
  friend constexpr State3 operator*(double s, State3 a) { return {s * a.u, s * a.v, s * a.i}; }
  bool operator==(const State3&) const = default;
};

double max_abs(const State3& s);
bool is_finite(const State3& s);

using Mat3 = std::array<std::array<double, 3>, 3>;
using Complex = std::complex<double>;

double norm_inf(const Mat3& m);
/// Solves m x = b by Gaussian elimination with partial pivoting. Returns
/// nullopt when a pivot falls below `rel_pivot_tol * norm_inf(m)`.
std::optional<std::array<double, 3>> solve3(const Mat3& m, const std::array<double, 3>& b,
                                            double rel_pivot_tol = 1e-14);

enum class Stability { stable, unstable, marginal };

/// Real parts within this band of zero are classified as marginal.
inline constexpr double kMarginalTolerance = 1e-8;

/// Eigenvalues of a 3x3 real matrix sorted by descending real part (and
/// descending imaginary part on ties, so the +i member of a pair comes first).
struct Eigentriple {
  std::array<Complex, 3> values{};
  Stability stability = Stability::marginal;

  double max_real() const { return values[0].real(); }
  /// Index of the first member of a complex-conjugate pair, if any.
  std::optional<int> complex_pair() const;
  /// Eigenvalue of smallest modulus among the real ones, if any are real.
  std::optional<double> real_nearest_zero() const;
};

Stability classify(const std::array<Complex, 3>& values, double tol = kMarginalTolerance);

/// Eigenvalues from the characteristic cubic, each polished by Newton.
Eigentriple eigensolve_3x3(const Mat3& m);

/// Unit eigenvector for a (possibly complex) eigenvalue, from the cross
/// product of the two most independent rows of (m - lambda I).
std::array<Complex, 3> eigenvector(const Mat3& m, Complex lambda);
/// ||(m - lambda I) x|| for the eigenvector above.
double eigen_residual(const Mat3& m, Complex lambda);

}  // namespace oncovir

#include "oncovir/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace oncovir {

RadialGrid RadialGrid::uniform(double length, double target_dr) {
  if (!(length > 0.0) || !(target_dr > 0.0)) {
    throw std::invalid_argument("RadialGrid: length and spacing must be positive");
  }
  const auto intervals = static_cast<std::size_t>(std::llround(length / target_dr));
  const std::size_t n = std::max<std::size_t>(intervals, 1) + 1;
  if (n < kMinGridNodes) {
    throw std::invalid_argument("RadialGrid: " + std::to_string(n) + " nodes, need at least " +
                                std::to_string(kMinGridNodes));
  }
  return {n, length / static_cast<double>(n - 1)};
}

std::vector<double> RadialField::values(Population pop) const {
  switch (pop) {
    case Population::u: return u;
    case Population::v: return v;
    case Population::i: return i;
    case Population::tumour: {
      std::vector<double> out(u.size());
      for (std::size_t j = 0; j < u.size(); ++j) out[j] = u[j] + i[j];
      return out;
    }
  }
  return {};
}

RadialField initial_condition(const ModelParams& p, const RadialGrid& g) {
  RadialField f;
  f.grid = g;
  f.u.assign(g.n, 0.0);
  f.v.assign(g.n, 0.0);
  f.i.assign(g.n, 0.0);
  const double eps = 1e-9 * g.dr;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double r = g.r(j);
    if (r <= p.r_t + eps) f.u[j] = p.u0;
    if (r <= p.r_v + eps) f.v[j] = p.v0;
  }
  return f;
}

void spherical_laplacian(std::span<const double> f, const RadialGrid& g, std::span<double> out) {
  const std::size_t n = g.n;
  const double inv_dr2 = 1.0 / (g.dr * g.dr);
  out[0] = 6.0 * (f[1] - f[0]) * inv_dr2;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double w = 1.0 / static_cast<double>(j);
    out[j] = ((f[j + 1] - 2.0 * f[j] + f[j - 1]) + w * (f[j + 1] - f[j - 1])) * inv_dr2;
  }
  out[n - 1] = 2.0 * (f[n - 2] - f[n - 1]) * inv_dr2;
}

std::vector<double> spherical_laplacian(std::span<const double> f, const RadialGrid& g) {
  if (f.size() != g.n) throw std::invalid_argument("spherical_laplacian: size mismatch");
  std::vector<double> out(g.n);
  spherical_laplacian(f, g, out);
  return out;
}

double total_cells(std::span<const double> values, const RadialGrid& g, double k) {
  double sum = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double r = g.r(j);
    const double w = (j == 0 || j + 1 == g.n) ? 0.5 : 1.0;
    sum += w * r * r * values[j];
  }
  return 4.0 * std::numbers::pi * k * sum * g.dr;
}

double total_cells(const RadialField& f, const ModelParams& p, Population pop) {
  return total_cells(f.values(pop), f.grid, p.k);
}

std::optional<double> front_position(std::span<const double> values, const RadialGrid& g, double level) {
  std::size_t j = values.size();
  while (j > 0 && values[j - 1] < level) --j;
  if (j == 0 || j == values.size()) return std::nullopt;
  const std::size_t a = j - 1;  // last node at or above the level
  const double fa = values[a];
  const double fb = values[a + 1];
  return g.r(a) + (fa - level) / (fa - fb) * g.dr;
}

std::optional<double> front_position(const RadialField& f, Population pop, double level) {
  const auto vals = f.values(pop);
  return front_position(vals, f.grid, level);
}

double wave_speed(std::span<const std::pair<double, double>> series, double t_from, double t_to) {
  double st = 0.0, sx = 0.0, stt = 0.0, stx = 0.0;
  std::size_t n = 0;
  for (const auto& [t, x] : series) {
    if (t < t_from || t > t_to) continue;
    st += t;
    sx += x;
    stt += t * t;
    stx += t * x;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("wave_speed: fewer than two samples in the fit window");
  const double nn = static_cast<double>(n);
  const double denom = nn * stt - st * st;
  if (!(denom > 0.0)) throw std::invalid_argument("wave_speed: degenerate fit window");
  return (nn * stx - st * sx) / denom;
}

double tail_density(const RadialField& f, Population pop) {
  const auto vals = f.values(pop);
  const double cutoff = 0.1 * f.grid.length() * (1.0 + 1e-12);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < f.grid.n && f.grid.r(j) <= cutoff; ++j) {
    sum += vals[j];
    ++count;
  }
  return sum / static_cast<double>(count);
}

double tumour_volume(double front_radius) {
  const double d = 2.0 * front_radius;
  return 0.523 * d * d * d;
}

double sample_at(std::span<const double> values, const RadialGrid& g, double r) {
  const double x = std::clamp(r / g.dr, 0.0, static_cast<double>(g.n - 1));
  const auto j = std::min(static_cast<std::size_t>(x), g.n - 2);
  const double w = x - static_cast<double>(j);
  return (1.0 - w) * values[j] + w * values[j + 1];
}

namespace {

struct Extrema {
  std::vector<double> maxima, minima;
};

Extrema local_extrema(std::span<const std::pair<double, double>> s, std::size_t begin, std::size_t end) {
  Extrema e;
  for (std::size_t k = std::max<std::size_t>(begin, 1); k + 1 < end && k + 1 < s.size(); ++k) {
    const double a = s[k - 1].second, b = s[k].second, c = s[k + 1].second;
    if (b > a && b >= c) e.maxima.push_back(b);
    if (b < a && b <= c) e.minima.push_back(b);
  }
  return e;
}

double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

OscillationReport oscillation_monitor(std::span<const std::pair<double, double>> series, double window,
                                      double noise_floor) {
  if (!(window > 0.0)) throw std::invalid_argument("oscillation_monitor: window must be positive");
  if (series.size() < 3 || series.back().first - series.front().first < 2.0 * window * (1.0 - 1e-12)) {
    throw std::invalid_argument("oscillation_monitor: series must span at least two windows");
  }
  const double t_last = series.back().first;
  const double t_first = series.front().first;
  const auto count = static_cast<std::size_t>(std::floor((t_last - t_first) / window * (1.0 + 1e-12)));

  OscillationReport report;
  std::size_t final_peaks = 0;
  double final_scale = 0.0;
  for (std::size_t w = count; w >= 1; --w) {
    const double lo = t_last - static_cast<double>(w) * window;
    const double hi = lo + window;
    auto first = std::lower_bound(series.begin(), series.end(), lo - 1e-12 * window,
                                  [](const auto& s, double t) { return s.first < t; });
    auto last = std::upper_bound(series.begin(), series.end(), hi + 1e-12 * window,
                                 [](double t, const auto& s) { return t < s.first; });
    const auto b = static_cast<std::size_t>(first - series.begin());
    const auto e = static_cast<std::size_t>(last - series.begin());
    const Extrema ex = local_extrema(series, b, e);
    const double amp = (ex.maxima.empty() || ex.minima.empty()) ? 0.0 : mean(ex.maxima) - mean(ex.minima);
    report.amplitudes.push_back(std::max(amp, 0.0));
    if (w == 1) {
      final_peaks = ex.maxima.size();
      double s = 0.0;
      for (std::size_t k = b; k < e; ++k) s += std::abs(series[k].second);
      final_scale = e > b ? s / static_cast<double>(e - b) : 0.0;
    }
  }
  for (double& a : report.amplitudes) {
    if (a < noise_floor * final_scale) a = 0.0;
  }

  const double last_amp = report.amplitudes.back();
  const double prev_amp = report.amplitudes[report.amplitudes.size() - 2];
  if (final_peaks < 2) {
    report.kind = OscillationKind::damped;
    report.low_confidence = true;
    return report;
  }
  report.kind = (last_amp > 0.0 && last_amp >= 0.5 * prev_amp) ? OscillationKind::persistent
                                                                : OscillationKind::damped;
  return report;
}

void PdeRunConfig::validate(const ModelParams& p) const {
  if (!(t_end > 0.0)) throw std::invalid_argument("PdeRunConfig: t_end must be positive");
  for (double t : snapshot_times) {
    if (t < 0.0 || t > t_end) throw std::invalid_argument("PdeRunConfig: snapshot time outside [0, t_end]");
  }
  if (!(observable_stride > 0.0)) throw std::invalid_argument("PdeRunConfig: observable_stride must be positive");
  for (double r : probe_radii) {
    if (r < 0.0 || r > p.domain_l) throw std::invalid_argument("PdeRunConfig: probe radius outside the domain");
  }
  if (!(virus_front_fraction > 0.0 && virus_front_fraction < 1.0)) {
    throw std::invalid_argument("PdeRunConfig: virus_front_fraction must lie in (0, 1)");
  }
}

namespace {

class ReactionDiffusion {
 public:
  ReactionDiffusion(const ModelParams& p, const RadialGrid& g) : p_(p), g_(g), lap_(g.n) {}

  void operator()(double, std::span<const double> y, std::span<double> dy) {
    const std::size_t n = g_.n;
    const auto u = y.subspan(0, n);
    const auto v = y.subspan(n, n);
    const auto i = y.subspan(2 * n, n);
    auto du = dy.subspan(0, n);
    auto dv = dy.subspan(n, n);
    auto di = dy.subspan(2 * n, n);

    spherical_laplacian(u, g_, lap_);
    for (std::size_t j = 0; j < n; ++j) du[j] = p_.d_u * lap_[j];
    spherical_laplacian(v, g_, lap_);
    for (std::size_t j = 0; j < n; ++j) dv[j] = p_.d_v * lap_[j];
    spherical_laplacian(i, g_, lap_);
    for (std::size_t j = 0; j < n; ++j) di[j] = p_.d_u * lap_[j];

    for (std::size_t j = 0; j < n; ++j) {
      const double infection = p_.beta * u[j] * v[j];
      du[j] += p_.r_u * u[j] * (1.0 - (u[j] + i[j])) - infection;
      dv[j] += p_.alpha * p_.delta_i * i[j] - p_.delta_v * v[j] - p_.beta * (u[j] + i[j]) * v[j];
      di[j] += infection - p_.delta_i * i[j];
    }
  }

 private:
  const ModelParams& p_;
  const RadialGrid& g_;
  std::vector<double> lap_;
};

RadialField unpack(std::span<const double> y, const RadialGrid& g, double t) {
  RadialField f;
  f.grid = g;
  f.time = t;
  f.u.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(g.n));
  f.v.assign(y.begin() + static_cast<std::ptrdiff_t>(g.n), y.begin() + static_cast<std::ptrdiff_t>(2 * g.n));
  f.i.assign(y.begin() + static_cast<std::ptrdiff_t>(2 * g.n), y.end());
  return f;
}

bool contains_time(const std::vector<double>& times, double t) {
  return std::any_of(times.begin(), times.end(), [t](double s) { return std::abs(s - t) <= 1e-9 * std::max(1.0, t); });
}

}  // namespace

PdeResult run_pde(const ModelParams& p, const PdeRunConfig& cfg) {
  return run_pde(p, cfg, initial_condition(p, RadialGrid::uniform(p.domain_l, cfg.dr)));
}

PdeResult run_pde(const ModelParams& p, const PdeRunConfig& cfg, RadialField initial) {
  cfg.validate(p);
  const RadialGrid g = initial.grid;
  const std::size_t n = g.n;
  if (initial.u.size() != n || initial.v.size() != n || initial.i.size() != n) {
    throw std::invalid_argument("run_pde: initial field does not match its grid");
  }

  std::vector<double> y;
  y.reserve(3 * n);
  y.insert(y.end(), initial.u.begin(), initial.u.end());
  y.insert(y.end(), initial.v.begin(), initial.v.end());
  y.insert(y.end(), initial.i.begin(), initial.i.end());

  IntegrationConfig ic = cfg.integrator;
  ic.t_start = initial.time;
  ic.t_end = initial.time + cfg.t_end;
  ic.output_times.clear();
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * cfg.observable_stride;
    if (t >= cfg.t_end - 1e-9 * cfg.observable_stride) break;
    ic.output_times.push_back(initial.time + t);
  }
  ic.output_times.push_back(ic.t_end);
  std::vector<double> snaps;
  for (double t : cfg.snapshot_times) snaps.push_back(initial.time + t);
  for (double t : snaps) {
    if (!contains_time(ic.output_times, t)) ic.output_times.push_back(t);
  }
  std::sort(ic.output_times.begin(), ic.output_times.end());

  PdeResult result;
  result.min_density = std::numeric_limits<double>::infinity();
  ReactionDiffusion rhs(p, g);
  std::vector<double> tumour(n);

  auto observe = [&](double t, std::span<const double> state) {
    RadialField f = unpack(state, g, t);
    for (std::size_t j = 0; j < 3 * n; ++j) {
      if (!std::isfinite(state[j])) {
        throw NumericError("run_pde: non-finite density at t = " + std::to_string(t));
      }
      result.min_density = std::min(result.min_density, state[j]);
    }

    const double t_rel = t - initial.time;
    const double stride_pos = t_rel / cfg.observable_stride;
    const bool on_grid = std::abs(stride_pos - std::round(stride_pos)) < 1e-9 || t == ic.t_end;
    if (on_grid) {
      ObservableRow row;
      row.t = t;
      row.total_u = total_cells(f.u, g, p.k);
      row.total_i = total_cells(f.i, g, p.k);
      row.total_v = total_cells(f.v, g, p.k);
      row.front_u_mm = front_position(f.u, g, cfg.front_level);
      row.tail_u = tail_density(f, Population::u);
      const double vmax = *std::max_element(f.v.begin(), f.v.end());
      if (vmax > 0.0) row.front_v_mm = front_position(f.v, g, cfg.virus_front_fraction * vmax);
      for (double r : cfg.probe_radii) row.probe_u.push_back(sample_at(f.u, g, r));
      if (!result.eradication_time && row.total_u + row.total_i < 1.0) result.eradication_time = t;
      result.observables.push_back(std::move(row));
    }
    if (contains_time(snaps, t) &&
        (result.snapshots.empty() || result.snapshots.back().time != t)) {
      result.snapshots.push_back(f);
    }
  };

  try {
    result.step_stats = integrate_system(std::ref(rhs), y, ic, observe);
  } catch (const IntegrationError& e) {
    throw NumericError(std::string("run_pde: ") + e.what());
  }
  result.final_field = unpack(y, g, ic.t_end);
  return result;
}

std::vector<std::pair<double, double>> front_series(const PdeResult& r) {
  std::vector<std::pair<double, double>> out;
  for (const auto& row : r.observables) {
    if (row.front_u_mm) out.emplace_back(row.t, *row.front_u_mm);
  }
  return out;
}

std::vector<std::pair<double, double>> virus_front_series(const PdeResult& r) {
  std::vector<std::pair<double, double>> out;
  for (const auto& row : r.observables) {
    if (row.front_v_mm) out.emplace_back(row.t, *row.front_v_mm);
  }
  return out;
}

std::vector<std::pair<double, double>> probe_series(const PdeResult& r, std::size_t probe) {
  std::vector<std::pair<double, double>> out;
  out.reserve(r.observables.size());
  for (const auto& row : r.observables) out.emplace_back(row.t, row.probe_u.at(probe));
  return out;
}

}  // namespace oncovir

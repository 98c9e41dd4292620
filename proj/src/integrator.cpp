#include "oncovir/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oncovir/model.hpp"

namespace oncovir {

void IntegrationConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("IntegrationConfig: ") + what); };
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) fail("rel_tol must lie in (0, 1e-2]");
  if (!(abs_tol > 0.0 && abs_tol <= 1e-2)) fail("abs_tol must lie in (0, 1e-2]");
  if (!(t_end > t_start)) fail("t_end must exceed t_start");
  if (!(dense_output_stride > 0.0)) fail("dense_output_stride must be positive");
  if (!(max_step > 0.0)) fail("max_step must be positive");
  if (initial_step < 0.0) fail("initial_step must be nonnegative");
  if (!std::is_sorted(output_times.begin(), output_times.end())) fail("output_times must be sorted");
  if (!output_times.empty() && (output_times.front() < t_start || output_times.back() > t_end)) {
    fail("output_times must lie within [t_start, t_end]");
  }
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kBetaPI = 0.04;
constexpr double kMaxShrink = 5.0;  // h_new >= h / 5
constexpr double kMaxGrow = 10.0;   // h_new <= 10 h

class Dopri5 {
 public:
  Dopri5(const RhsFunction& rhs, std::size_t n, const IntegrationConfig& cfg)
      : rhs_(rhs), cfg_(cfg), k1_(n), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n), k7_(n), tmp_(n),
        ynew_(n), err_(n), r1_(n), r2_(n), r3_(n), r4_(n), r5_(n) {}

  StepStats run(std::vector<double>& y, const SampleObserver& observer);

 private:
  void eval(double t, std::span<const double> y, std::vector<double>& out) {
    rhs_(t, y, out);
    ++stats_.rhs_evaluations;
  }
  double error_norm(const std::vector<double>& y) const;
  double initial_step(double t, const std::vector<double>& y);
  void prepare_dense(const std::vector<double>& y, double h);
  void dense(double theta, std::vector<double>& out) const;

  const RhsFunction& rhs_;
  const IntegrationConfig& cfg_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_, err_;
  std::vector<double> r1_, r2_, r3_, r4_, r5_;
  StepStats stats_;
};

double Dopri5::error_norm(const std::vector<double>& y) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double sk = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[j]), std::abs(ynew_[j]));
    const double q = err_[j] / sk;
    sum += q * q;
  }
  return std::sqrt(sum / static_cast<double>(y.size()));
}

double Dopri5::initial_step(double t, const std::vector<double>& y) {
  const std::size_t n = y.size();
  double d0 = 0.0, d1n = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[j]);
    d0 += (y[j] / sk) * (y[j] / sk);
    d1n += (k1_[j] / sk) * (k1_[j] / sk);
  }
  d0 = std::sqrt(d0 / n);
  d1n = std::sqrt(d1n / n);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  h0 = std::min(h0, cfg_.max_step);
  for (std::size_t j = 0; j < n; ++j) tmp_[j] = y[j] + h0 * k1_[j];
  eval(t + h0, tmp_, k2_);
  double d2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[j]);
    const double q = (k2_[j] - k1_[j]) / sk;
    d2 += q * q;
  }
  d2 = std::sqrt(d2 / n) / h0;
  const double dmax = std::max(d1n, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, cfg_.max_step});
}

void Dopri5::prepare_dense(const std::vector<double>& y, double h) {
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double ydiff = ynew_[j] - y[j];
    const double bspl = h * k1_[j] - ydiff;
    r1_[j] = y[j];
    r2_[j] = ydiff;
    r3_[j] = bspl;
    r4_[j] = ydiff - h * k7_[j] - bspl;
    r5_[j] = h * (d1 * k1_[j] + d3 * k3_[j] + d4 * k4_[j] + d5 * k5_[j] + d6 * k6_[j] + d7 * k7_[j]);
  }
}

void Dopri5::dense(double theta, std::vector<double>& out) const {
  const double theta1 = 1.0 - theta;
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = r1_[j] + theta * (r2_[j] + theta1 * (r3_[j] + theta * (r4_[j] + theta1 * r5_[j])));
  }
}

StepStats Dopri5::run(std::vector<double>& y, const SampleObserver& observer) {
  const std::size_t n = y.size();
  const double t0 = cfg_.t_start;
  const double t_end = cfg_.t_end;
  const double sample_eps = 1e-12 * std::max(1.0, std::abs(t_end));

  const auto& explicit_times = cfg_.output_times;
  auto sample_time = [&](std::size_t k) {
    if (!explicit_times.empty()) {
      return k < explicit_times.size() ? std::min(explicit_times[k], t_end)
                                       : std::numeric_limits<double>::infinity();
    }
    const double ts = t0 + static_cast<double>(k) * cfg_.dense_output_stride;
    return ts < t_end - sample_eps ? ts : t_end;
  };
  bool finished_sampling = false;

  double t = t0;
  for (double v : y) {
    if (!std::isfinite(v)) throw IntegrationError(IntegrationError::Kind::non_finite, t, "initial state is not finite");
  }
  std::size_t next_sample = 0;
  while (observer && sample_time(next_sample) <= t0 + sample_eps) {
    observer(t0, y);
    ++next_sample;
  }

  eval(t, y, k1_);
  double h = cfg_.initial_step > 0.0 ? std::min(cfg_.initial_step, cfg_.max_step) : initial_step(t, y);
  double facold = 1e-4;
  bool last_rejected = false;
  bool last_trial_non_finite = false;
  std::vector<double> sample(n);

  while (t < t_end) {
    if (stats_.accepted + stats_.rejected >= cfg_.max_steps) {
      throw IntegrationError(IntegrationError::Kind::too_many_steps, t, "integrate: step budget exhausted");
    }
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < h_min) {
      if (last_trial_non_finite) {
        throw IntegrationError(IntegrationError::Kind::non_finite, t,
                               "integrate: state became non-finite near t = " + std::to_string(t));
      }
      throw IntegrationError(IntegrationError::Kind::step_underflow, t,
                             "integrate: step size underflow at t = " + std::to_string(t));
    }
    bool last_step = false;
    if (t + 1.01 * h >= t_end) {
      h = t_end - t;
      last_step = true;
    }

    for (std::size_t j = 0; j < n; ++j) tmp_[j] = y[j] + h * a21 * k1_[j];
    eval(t + c2 * h, tmp_, k2_);
    for (std::size_t j = 0; j < n; ++j) tmp_[j] = y[j] + h * (a31 * k1_[j] + a32 * k2_[j]);
    eval(t + c3 * h, tmp_, k3_);
    for (std::size_t j = 0; j < n; ++j) tmp_[j] = y[j] + h * (a41 * k1_[j] + a42 * k2_[j] + a43 * k3_[j]);
    eval(t + c4 * h, tmp_, k4_);
    for (std::size_t j = 0; j < n; ++j) {
      tmp_[j] = y[j] + h * (a51 * k1_[j] + a52 * k2_[j] + a53 * k3_[j] + a54 * k4_[j]);
    }
    eval(t + c5 * h, tmp_, k5_);
    for (std::size_t j = 0; j < n; ++j) {
      tmp_[j] = y[j] + h * (a61 * k1_[j] + a62 * k2_[j] + a63 * k3_[j] + a64 * k4_[j] + a65 * k5_[j]);
    }
    const double t_new = last_step ? t_end : t + h;
    eval(t_new, tmp_, k6_);
    for (std::size_t j = 0; j < n; ++j) {
      ynew_[j] = y[j] + h * (a71 * k1_[j] + a73 * k3_[j] + a74 * k4_[j] + a75 * k5_[j] + a76 * k6_[j]);
    }
    eval(t_new, ynew_, k7_);
    for (std::size_t j = 0; j < n; ++j) {
      err_[j] = h * (e1 * k1_[j] + e3 * k3_[j] + e4 * k4_[j] + e5 * k5_[j] + e6 * k6_[j] + e7 * k7_[j]);
    }

    double err = error_norm(y);
    last_trial_non_finite = !std::isfinite(err);
    if (last_trial_non_finite) {
      ++stats_.rejected;
      h /= kMaxShrink;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(std::max(err, 1e-300), 0.2 - kBetaPI * 0.75);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, kBetaPI);
      fac = std::clamp(fac / kSafety, 1.0 / kMaxGrow, kMaxShrink);
      double h_new = h / fac;
      facold = std::max(err, 1e-4);
      ++stats_.accepted;

      if (observer && !finished_sampling) {
        bool prepared = false;
        while (true) {
          const double ts = sample_time(next_sample);
          if (ts > t_new + sample_eps) break;
          if (!prepared) {
            prepare_dense(y, h);
            prepared = true;
          }
          if (ts >= t_end - sample_eps) {
            observer(t_end, ynew_);
            ++next_sample;
            if (explicit_times.empty() || next_sample >= explicit_times.size()) {
              finished_sampling = true;
              break;
            }
            continue;
          }
          dense((ts - t) / h, sample);
          observer(ts, sample);
          ++next_sample;
        }
      }

      y.swap(ynew_);
      k1_.swap(k7_);
      t = t_new;
      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
      h = std::min(h_new, cfg_.max_step);
    } else {
      ++stats_.rejected;
      h /= std::min(kMaxShrink, fac11 / kSafety);
      last_rejected = true;
    }
  }
  return stats_;
}

}  // namespace

StepStats integrate_system(const RhsFunction& rhs, std::vector<double>& y, const IntegrationConfig& cfg,
                           const SampleObserver& observer) {
  cfg.validate();
  if (y.empty()) throw std::invalid_argument("integrate_system: empty state");
  Dopri5 solver(rhs, y.size(), cfg);
  return solver.run(y, observer);
}

Trajectory integrate(const ModelParams& p, const State3& s0, const IntegrationConfig& cfg) {
  Trajectory traj;
  std::vector<double> y{s0.u, s0.v, s0.i};
  auto rhs = [&p](double, std::span<const double> x, std::span<double> dx) {
    const State3 d = rhs_ode({x[0], x[1], x[2]}, p);
    dx[0] = d.u;
    dx[1] = d.v;
    dx[2] = d.i;
  };
  traj.step_stats = integrate_system(rhs, y, cfg, [&traj](double t, std::span<const double> x) {
    traj.times.push_back(t);
    traj.states.push_back({x[0], x[1], x[2]});
  });
  return traj;
}

std::vector<double> component_series(const Trajectory& traj, Component c) {
  std::vector<double> out;
  out.reserve(traj.states.size());
  const int idx = static_cast<int>(c);
  for (const auto& s : traj.states) out.push_back(s[idx]);
  return out;
}

std::vector<Peak> detect_peaks(std::span<const double> times, std::span<const double> values, double t_discard) {
  if (times.size() != values.size()) throw std::invalid_argument("detect_peaks: size mismatch");
  std::vector<Peak> peaks;
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    if (times[k] < t_discard) continue;
    const double y0 = values[k - 1], y1 = values[k], y2 = values[k + 1];
    if (!(y1 > y0 && y1 >= y2)) continue;
    const double t0 = times[k - 1], t1 = times[k], t2 = times[k + 1];
    // Vertex of the parabola through the three samples (non-uniform spacing).
    const double denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
    const double a = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / denom;
    const double b = (t2 * t2 * (y0 - y1) + t1 * t1 * (y2 - y0) + t0 * t0 * (y1 - y2)) / denom;
    const double c = (t1 * t2 * (t1 - t2) * y0 + t2 * t0 * (t2 - t0) * y1 + t0 * t1 * (t0 - t1) * y2) / denom;
    if (a < 0.0) {
      const double tv = std::clamp(-b / (2.0 * a), t0, t2);
      peaks.push_back({tv, (a * tv + b) * tv + c});
    } else {
      peaks.push_back({t1, y1});
    }
  }
  return peaks;
}

std::vector<Peak> detect_peaks(const Trajectory& traj, Component c, double t_discard) {
  const auto values = component_series(traj, c);
  return detect_peaks(traj.times, values, t_discard);
}

LimitCycleMeasure measure_limit_cycle(std::span<const double> times, std::span<const double> values,
                                      double t_discard, std::size_t window, double spread_tol) {
  LimitCycleMeasure m;
  const auto maxima = detect_peaks(times, values, t_discard);
  std::vector<double> negated(values.begin(), values.end());
  for (double& v : negated) v = -v;
  const auto minima = detect_peaks(times, negated, t_discard);
  m.peak_count = maxima.size();
  if (maxima.size() < 2 || minima.empty()) return m;

  const std::size_t used = std::max<std::size_t>(2, std::min(window, maxima.size()));
  const auto first = maxima.end() - static_cast<std::ptrdiff_t>(used);
  double lo = first->value, hi = first->value, sum = 0.0;
  for (auto it = first; it != maxima.end(); ++it) {
    lo = std::min(lo, it->value);
    hi = std::max(hi, it->value);
    sum += it->value;
  }
  m.max_value = sum / static_cast<double>(used);
  m.max_spread = hi - lo;
  m.period = (maxima.back().time - first->time) / static_cast<double>(used - 1);

  const std::size_t used_min = std::min(window, minima.size());
  double msum = 0.0;
  for (auto it = minima.end() - static_cast<std::ptrdiff_t>(used_min); it != minima.end(); ++it) msum -= it->value;
  m.min_value = msum / static_cast<double>(used_min);
  m.converged = maxima.size() >= window && m.max_spread < spread_tol;
  return m;
}

}  // namespace oncovir

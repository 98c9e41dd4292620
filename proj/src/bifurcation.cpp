#include "oncovir/bifurcation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oncovir {

std::string_view to_string(EventKind kind) {
  return kind == EventKind::hopf ? "hopf" : "branch_point";
}

namespace {

double residual_norm(const State3& f) { return max_abs(f); }

bool residual_ok(const State3& x, const ModelParams& p, double tol) {
  return residual_norm(rhs_ode(x, p)) <= tol * std::max(1.0, rhs_term_scale(x, p));
}

template <std::size_t N>
std::optional<std::array<double, N>> solve_dense(std::array<std::array<double, N>, N> a, std::array<double, N> b) {
  double scale = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    scale = std::max(scale, s);
  }
  const double floor = 1e-15 * std::max(scale, 1e-300);
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) <= floor) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, N> x{};
  for (std::size_t r = N; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < N; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

ModelParams with(const ModelParams& p, Param which, double value) {
  ModelParams q = p;
  set(q, which, value);
  return q;
}

EquilibriumPoint make_point(const ModelParams& p, Param which, const State3& x) {
  return {get(p, which), x, eigensolve_3x3(jacobian_ode(x, p))};
}

double det3(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

std::optional<double> pair_real(const Eigentriple& e) {
  if (auto k = e.complex_pair()) return e.values[*k].real();
  return std::nullopt;
}

using Vec4 = std::array<double, 4>;

double dot(const Vec4& a, const Vec4& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

Vec4 normalized(Vec4 v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
  return v;
}

// Pseudo-arclength machinery in scaled coordinates w = (x / sx, lambda / s_lambda).
class ArclengthSolver {
 public:
  ArclengthSolver(const ModelParams& p, Param which, const State3& start, double param_range,
                  const ContinuationOptions& opts)
      : base_(p), which_(which), opts_(opts) {
    for (int k = 0; k < 3; ++k) sx_[k] = std::max(1.0, std::abs(start[k]));
    s_lambda_ = param_range;
  }

  Vec4 to_w(const State3& x, double lambda) const {
    return {x.u / sx_[0], x.v / sx_[1], x.i / sx_[2], lambda / s_lambda_};
  }
  State3 state(const Vec4& w) const { return {w[0] * sx_[0], w[1] * sx_[1], w[2] * sx_[2]}; }
  double param(const Vec4& w) const { return w[3] * s_lambda_; }
  ModelParams params_at(const Vec4& w) const { return with(base_, which_, param(w)); }

  // Rows of dF/dw (3 x 4).
  std::array<Vec4, 3> jacobian_w(const Vec4& w) const {
    const ModelParams q = params_at(w);
    const State3 x = state(w);
    const Mat3 j = jacobian_ode(x, q);
    const State3 fl = rhs_param_derivative(x, q, which_);
    std::array<Vec4, 3> out{};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out[r][c] = j[r][c] * sx_[c];
      out[r][3] = fl[r] * s_lambda_;
    }
    return out;
  }

  // Unit tangent oriented to have positive projection on `reference`.
  std::optional<Vec4> tangent(const Vec4& w, const Vec4& reference) const {
    const auto jw = jacobian_w(w);
    std::array<Vec4, 4> a{jw[0], jw[1], jw[2], reference};
    const auto t = solve_dense<4>(a, {0.0, 0.0, 0.0, 1.0});
    if (!t) return std::nullopt;
    Vec4 v = normalized(*t);
    if (dot(v, reference) < 0.0) {
      for (double& x : v) x = -x;
    }
    return v;
  }

  struct Corrected {
    Vec4 w;
    int iterations;
  };

  // Newton on [F(w); tau . (w - w_pred)] = 0.
  std::optional<Corrected> correct(const Vec4& w_pred, const Vec4& tau) const {
    Vec4 w = w_pred;
    for (int it = 1; it <= opts_.corrector_max_iterations; ++it) {
      const ModelParams q = params_at(w);
      const State3 x = state(w);
      const State3 f = rhs_ode(x, q);
      const auto jw = jacobian_w(w);
      Vec4 diff{w[0] - w_pred[0], w[1] - w_pred[1], w[2] - w_pred[2], w[3] - w_pred[3]};
      std::array<Vec4, 4> a{jw[0], jw[1], jw[2], tau};
      const auto dw = solve_dense<4>(a, {-f.u, -f.v, -f.i, -dot(tau, diff)});
      if (!dw) return std::nullopt;
      double step = 0.0;
      for (int k = 0; k < 4; ++k) {
        w[k] += (*dw)[k];
        step = std::max(step, std::abs((*dw)[k]));
      }
      for (double v : w) {
        if (!std::isfinite(v)) return std::nullopt;
      }
      if (step <= 1e-11 && residual_ok(state(w), params_at(w), opts_.corrector_tol)) {
        return Corrected{w, it};
      }
    }
    const Vec4 wf = w;
    if (residual_ok(state(wf), params_at(wf), opts_.corrector_tol * 10.0)) {
      return Corrected{wf, opts_.corrector_max_iterations};
    }
    return std::nullopt;
  }

  EquilibriumPoint point(const Vec4& w) const {
    const ModelParams q = params_at(w);
    return make_point(q, which_, state(w));
  }

 private:
  ModelParams base_;
  Param which_;
  ContinuationOptions opts_;
  std::array<double, 3> sx_{};
  double s_lambda_ = 1.0;
};

// Bisection then one secant polish on g(s) over [0, s_hi], where g(0) and
// g(s_hi) have opposite signs. `eval` returns the test value at s and the
// point found there; `done` decides if a point is accurate enough.
template <class Eval, class Done>
EquilibriumPoint bisect_secant(Eval eval, double s_hi, double g_lo, double g_hi, Done done) {
  double a = 0.0, b = s_hi;
  double ga = g_lo, gb = g_hi;
  std::optional<EquilibriumPoint> best;
  double best_abs = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    auto [gm, pt] = eval(m);
    if (std::abs(gm) < best_abs) {
      best_abs = std::abs(gm);
      best = pt;
    }
    if (done(pt) || b - a <= 1e-15 * std::max(1.0, std::abs(s_hi))) break;
    if ((gm < 0.0) == (ga < 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
      gb = gm;
    }
    if (gm == 0.0) break;
  }
  if (best && !done(*best) && ga != gb) {
    const double s = a - ga * (b - a) / (gb - ga);
    if (s > a && s < b) {
      auto [gs, pt] = eval(s);
      if (std::abs(gs) < best_abs) best = pt;
    }
  }
  return *best;
}

}  // namespace

EquilibriumPoint newton_equilibrium(const ModelParams& p, const State3& guess, Param active,
                                    const NewtonOptions& opts) {
  if (!is_finite(guess)) throw ContinuationError("newton_equilibrium: non-finite guess");
  State3 x = guess;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    const State3 f = rhs_ode(x, p);
    const double fn = residual_norm(f);
    const double scale = std::max(1.0, rhs_term_scale(x, p));
    if (fn <= opts.tol * scale) {
      // One polishing step; kept only if it does not worsen the residual.
      if (fn > 0.0) {
        if (const auto dx = solve3(jacobian_ode(x, p), {-f.u, -f.v, -f.i})) {
          const State3 polished = x + State3{(*dx)[0], (*dx)[1], (*dx)[2]};
          if (is_finite(polished) && residual_norm(rhs_ode(polished, p)) <= fn) x = polished;
        }
      }
      return make_point(p, active, x);
    }
    if (it == opts.max_iterations) break;

    const auto dx = solve3(jacobian_ode(x, p), {-f.u, -f.v, -f.i});
    if (!dx) throw ContinuationError("newton_equilibrium: singular Jacobian (fold or branch point)");
    double damping = 1.0;
    bool improved = false;
    while (damping >= 1.0 / 1024.0) {
      const State3 trial = x + damping * State3{(*dx)[0], (*dx)[1], (*dx)[2]};
      if (is_finite(trial) && residual_norm(rhs_ode(trial, p)) < fn) {
        x = trial;
        improved = true;
        break;
      }
      damping *= 0.5;
    }
    if (!improved) {
      // Stalled at round-off level.
      if (fn <= 1e3 * opts.tol * scale) return make_point(p, active, x);
      throw ContinuationError("newton_equilibrium: no residual decrease");
    }
  }
  throw ContinuationError("newton_equilibrium: maximum iterations reached");
}

EquilibriumPoint coexistence_point(const ModelParams& p, Param parameter, double value) {
  const ModelParams q = with(p, parameter, value);
  const auto eq = coexistence_equilibrium(q);
  if (!eq) throw ContinuationError("coexistence_point: no real equilibrium");
  return newton_equilibrium(q, eq->state, parameter);
}

BifurcationEvent refine_hopf(const MatrixFamily& family, double a, double b, double tol) {
  auto pair_at = [&](double x) -> std::pair<std::optional<double>, Eigentriple> {
    const FamilySample s = family(x);
    const Eigentriple e = eigensolve_3x3(s.jacobian);
    return {pair_real(e), e};
  };
  auto [ra, ea] = pair_at(a);
  auto [rb, eb] = pair_at(b);
  if (!ra || !rb) throw std::invalid_argument("refine_hopf: no complex pair at a bracket end");
  if ((*ra < 0.0) == (*rb < 0.0)) throw std::invalid_argument("refine_hopf: bracket has no sign change");

  double lo = a, hi = b, glo = *ra, ghi = *rb;
  double best_x = std::abs(glo) < std::abs(ghi) ? lo : hi;
  double best_g = std::min(std::abs(glo), std::abs(ghi));
  for (int it = 0; it < 200 && best_g >= tol; ++it) {
    // Secant proposal, falling back to bisection when it leaves the bracket
    // or stalls on one side.
    double x = hi - ghi * (hi - lo) / (ghi - glo);
    if (!(x > std::min(lo, hi) && x < std::max(lo, hi)) || it % 3 == 2) x = 0.5 * (lo + hi);
    auto [gx, ex] = pair_at(x);
    if (!gx) {
      x = 0.5 * (lo + hi);
      std::tie(gx, ex) = pair_at(x);
      if (!gx) throw std::invalid_argument("refine_hopf: complex pair lost inside the bracket");
    }
    if (std::abs(*gx) < best_g) {
      best_g = std::abs(*gx);
      best_x = x;
    }
    if ((*gx < 0.0) == (glo < 0.0)) {
      lo = x;
      glo = *gx;
    } else {
      hi = x;
      ghi = *gx;
    }
    if (std::abs(hi - lo) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
  }
  const FamilySample s = family(best_x);
  const Eigentriple e = eigensolve_3x3(s.jacobian);
  BifurcationEvent ev;
  ev.kind = EventKind::hopf;
  ev.param_value = best_x;
  ev.state = s.state;
  ev.eigenvalue = e.values[*e.complex_pair()];
  return ev;
}

BifurcationEvent refine_hopf(const ModelParams& p, Param parameter, const EquilibriumPoint& a,
                             const EquilibriumPoint& b, double tol) {
  const double span = b.param_value - a.param_value;
  if (span == 0.0) throw std::invalid_argument("refine_hopf: empty bracket");
  auto family = [&](double x) {
    const double w = (x - a.param_value) / span;
    const State3 guess = (1.0 - w) * a.state + w * b.state;
    const ModelParams q = with(p, parameter, x);
    const EquilibriumPoint pt = newton_equilibrium(q, guess, parameter);
    return FamilySample{pt.state, jacobian_ode(pt.state, q)};
  };
  return refine_hopf(family, a.param_value, b.param_value, tol);
}

namespace {

// Bisection in the parameter itself. Each trial is seeded from the midpoint
// of the current bracket, and a solve that lands far from that seed is taken
// to have jumped to a crossing branch.
std::optional<EquilibriumPoint> refine_branch_point(const ModelParams& p, Param parameter, EquilibriumPoint a,
                                                    EquilibriumPoint b, double tol) {
  auto g = [&](const EquilibriumPoint& pt) {
    return det3(jacobian_ode(pt.state, with(p, parameter, pt.param_value)));
  };
  double ga = g(a);
  const double gb = g(b);
  if (a.param_value == b.param_value || ga == 0.0 || gb == 0.0 || (ga < 0.0) == (gb < 0.0)) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double x = 0.5 * (a.param_value + b.param_value);
    const State3 guess = 0.5 * (a.state + b.state);
    EquilibriumPoint m;
    try {
      m = newton_equilibrium(with(p, parameter, x), guess, parameter);
    } catch (const ContinuationError&) {
      return std::nullopt;
    }
    if (max_abs(m.state - guess) > 0.25 * max_abs(a.state - b.state) + 1e-14 * (1.0 + max_abs(guess))) {
      return std::nullopt;
    }
    const auto r = m.eigen.real_nearest_zero();
    if ((r && std::abs(*r) < tol) ||
        std::abs(b.param_value - a.param_value) <= 1e-15 * std::max(1.0, std::abs(x))) {
      return m;
    }
    const double gm = g(m);
    if (gm == 0.0) return m;
    if ((gm < 0.0) == (ga < 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return std::nullopt;
}

}  // namespace

Branch continue_branch(const ModelParams& p, Param parameter, double lo, double hi, const EquilibriumPoint& start,
                       const ContinuationOptions& opts) {
  if (!(hi > lo)) throw std::invalid_argument("continue_branch: need lo < hi");
  const double range = hi - lo;
  const double at = start.param_value;
  const bool forward = std::abs(at - lo) <= std::abs(at - hi);
  if (std::min(std::abs(at - lo), std::abs(at - hi)) > 1e-9 * range) {
    throw std::invalid_argument("continue_branch: start must sit at a range boundary");
  }
  const double end = forward ? hi : lo;

  Branch branch;
  branch.parameter = parameter;
  ArclengthSolver solver(p, parameter, start.state, range, opts);

  const EquilibriumPoint first = newton_equilibrium(with(p, parameter, at), start.state, parameter);
  branch.points.push_back(first);

  Vec4 w = solver.to_w(first.state, first.param_value);
  const Vec4 dir{0.0, 0.0, 0.0, forward ? 1.0 : -1.0};
  auto tau = solver.tangent(w, dir);
  if (!tau) throw ContinuationError("continue_branch: cannot form the initial tangent");

  auto bounds_ok = [&](const State3& x) {
    return std::abs(x.u) <= opts.max_abs_ui && std::abs(x.i) <= opts.max_abs_ui && std::abs(x.v) <= opts.max_abs_v;
  };
  auto past_end = [&](double lambda) { return forward ? lambda >= end : lambda <= end; };

  auto detect_events = [&](const Vec4& wa, const Vec4& ta, double ds, const EquilibriumPoint& pa,
                           const EquilibriumPoint& pb) {
    const ModelParams qa = with(p, parameter, pa.param_value);
    const ModelParams qb = with(p, parameter, pb.param_value);
    const double da = det3(jacobian_ode(pa.state, qa));
    const double db = det3(jacobian_ode(pb.state, qb));
    std::vector<BifurcationEvent> found;
    if (da != 0.0 && db != 0.0 && (da < 0.0) != (db < 0.0)) {
      auto eval = [&](double s) {
        Vec4 wp{};
        for (int k = 0; k < 4; ++k) wp[k] = wa[k] + s * ta[k];
        const auto c = solver.correct(wp, ta);
        const EquilibriumPoint pt = solver.point(c ? c->w : wp);
        const double g = det3(jacobian_ode(pt.state, with(p, parameter, pt.param_value)));
        return std::pair{g, pt};
      };
      auto done = [&](const EquilibriumPoint& pt) {
        const auto r = pt.eigen.real_nearest_zero();
        return r && std::abs(*r) < opts.event_tol;
      };
      const auto direct = refine_branch_point(p, parameter, pa, pb, opts.event_tol);
      const EquilibriumPoint pt = direct ? *direct : bisect_secant(eval, ds, da, db, done);
      BifurcationEvent ev;
      ev.kind = EventKind::branch_point;
      ev.param_value = pt.param_value;
      ev.state = pt.state;
      ev.eigenvalue = Complex(pt.eigen.real_nearest_zero().value_or(0.0), 0.0);
      found.push_back(ev);
    }
    const auto ra = pair_real(pa.eigen);
    const auto rb = pair_real(pb.eigen);
    if (ra && rb && (*ra < 0.0) != (*rb < 0.0)) {
      try {
        found.push_back(refine_hopf(p, parameter, pa, pb, opts.event_tol));
      } catch (const std::exception&) {
        // Pair degenerated inside the step; fall back to the arclength bracket.
        auto eval = [&](double s) {
          Vec4 wp{};
          for (int k = 0; k < 4; ++k) wp[k] = wa[k] + s * ta[k];
          const auto c = solver.correct(wp, ta);
          const EquilibriumPoint pt = solver.point(c ? c->w : wp);
          return std::pair{pair_real(pt.eigen).value_or(pt.eigen.max_real()), pt};
        };
        auto done = [&](const EquilibriumPoint& pt) {
          const auto r = pair_real(pt.eigen);
          return r && std::abs(*r) < opts.event_tol;
        };
        const EquilibriumPoint pt = bisect_secant(eval, ds, *ra, *rb, done);
        BifurcationEvent ev;
        ev.kind = EventKind::hopf;
        ev.param_value = pt.param_value;
        ev.state = pt.state;
        ev.eigenvalue = pt.eigen.complex_pair() ? pt.eigen.values[*pt.eigen.complex_pair()] : pt.eigen.values[0];
        found.push_back(ev);
      }
    }
    std::sort(found.begin(), found.end(), [forward](const auto& x, const auto& y) {
      return forward ? x.param_value < y.param_value : x.param_value > y.param_value;
    });
    for (auto& ev : found) branch.events.push_back(ev);
  };

  double ds = opts.initial_step;
  while (true) {
    if (branch.points.size() >= opts.max_points) throw ContinuationError("continue_branch: too many points");
    Vec4 wp{};
    for (int k = 0; k < 4; ++k) wp[k] = w[k] + ds * (*tau)[k];
    const auto c = solver.correct(wp, *tau);
    if (!c) {
      ds *= 0.5;
      if (ds < opts.min_step) {
        throw ContinuationError("continue_branch: step size underflow near " + std::string(to_string(parameter)) +
                                " = " + std::to_string(solver.param(w)));
      }
      continue;
    }

    EquilibriumPoint next = solver.point(c->w);
    Vec4 w_next = c->w;
    double ds_taken = ds;
    const bool finishing = past_end(next.param_value);
    if (finishing) {
      // Land exactly on the range end.
      const EquilibriumPoint& prev = branch.points.back();
      const double frac = (end - prev.param_value) / (next.param_value - prev.param_value);
      const State3 guess = (1.0 - frac) * prev.state + frac * next.state;
      next = newton_equilibrium(with(p, parameter, end), guess, parameter);
      next.param_value = end;
      w_next = solver.to_w(next.state, end);
      ds_taken = ds * frac;
    }
    if (!bounds_ok(next.state)) {
      throw ContinuationError("continue_branch: branch left the state bounds at " +
                              std::string(to_string(parameter)) + " = " + std::to_string(next.param_value));
    }

    detect_events(w, *tau, ds_taken, branch.points.back(), next);
    branch.points.push_back(next);
    if (finishing) break;

    const auto tnew = solver.tangent(w_next, *tau);
    if (!tnew) throw ContinuationError("continue_branch: singular tangent system");
    w = w_next;
    tau = tnew;
    if (c->iterations <= 3) {
      ds = std::min(ds * 1.5, opts.max_step);
    } else if (c->iterations >= 8) {
      ds = std::max(ds * 0.7, opts.min_step);
    }
  }
  return branch;
}

std::optional<double> coexistence_pair_real_part(const ModelParams& p) {
  const auto eq = coexistence_equilibrium(p);
  if (!eq) return std::nullopt;
  return pair_real(eq->eigen);
}

std::vector<LimitCycleSample> limit_cycle_branch(const ModelParams& p, Param parameter,
                                                 const std::vector<double>& values,
                                                 const LimitCycleOptions& opts) {
  std::vector<LimitCycleSample> out;
  out.reserve(values.size());
  for (double value : values) {
    const ModelParams q = with(p, parameter, value);
    State3 s0{0.5, 1.0, 0.1};
    if (const auto eq = coexistence_equilibrium(q); eq && eq->biological) {
      s0 = eq->state;
      s0.u *= opts.perturbation;
    }
    IntegrationConfig cfg;
    cfg.rel_tol = opts.rel_tol;
    cfg.abs_tol = opts.abs_tol;
    cfg.t_end = opts.t_end;
    cfg.dense_output_stride = opts.stride;
    const Trajectory traj = integrate(q, s0, cfg);
    const auto u = component_series(traj, Component::u);
    const LimitCycleMeasure m =
        measure_limit_cycle(traj.times, u, opts.transient_fraction * opts.t_end, opts.peak_window, opts.spread_tol);
    out.push_back({value, m.max_value, m.min_value, m.period, m.converged});
  }
  return out;
}

namespace {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t k = 0; k < n; ++k) {
    g[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  return g;
}

// Roots of f over a log-spaced scan of [lo, hi], each bisected to `tol`
// (relative). NaN marks points where f is undefined.
template <class F>
std::vector<double> scan_roots(F f, double lo, double hi, std::size_t n, double tol) {
  std::vector<double> roots;
  const auto grid = log_grid(lo, hi, n);
  std::vector<double> vals(n);
  for (std::size_t k = 0; k < n; ++k) vals[k] = f(grid[k]);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double fa = vals[k], fb = vals[k + 1];
    if (std::isnan(fa) || std::isnan(fb) || (fa < 0.0) == (fb < 0.0)) continue;
    double a = grid[k], b = grid[k + 1], ga = fa;
    for (int it = 0; it < 200 && (b - a) > tol * b; ++it) {
      const double m = std::sqrt(a * b);
      const double gm = f(m);
      if (std::isnan(gm)) break;
      if ((gm < 0.0) == (ga < 0.0)) {
        a = m;
        ga = gm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

}  // namespace

std::vector<HopfCurve> hopf_curve_2param(const ModelParams& p, const std::vector<double>& beta_values,
                                         const HopfCurveOptions& opts) {
  std::vector<HopfCurve> curves;
  for (double beta : beta_values) {
    ModelParams q = p;
    q.beta = beta;
    HopfCurve curve;
    curve.beta = beta;
    // Coexistence is biological only for delta_v below beta (alpha - 1).
    const double dv_max = beta * (q.alpha - 1.0) * (1.0 - 1e-9);

    auto grid = log_grid(opts.delta_i_min, opts.delta_i_max, opts.delta_i_points);
    if (opts.reverse) std::reverse(grid.begin(), grid.end());
    int segment = 0;
    bool previous_found = false;
    for (double di : grid) {
      q.delta_i = di;
      auto f = [&q](double dv) {
        ModelParams r = q;
        r.delta_v = dv;
        return coexistence_pair_real_part(r).value_or(std::numeric_limits<double>::quiet_NaN());
      };
      const auto roots = scan_roots(f, opts.delta_v_min, dv_max, opts.delta_v_points, opts.tol);
      if (roots.empty() && previous_found) ++segment;
      previous_found = !roots.empty();
      for (double dv : roots) curve.points.push_back({dv, di, segment});
    }

    ModelParams axis = p;
    axis.beta = beta;
    axis.delta_v = opts.axis_delta_v;
    auto g = [&axis](double di) {
      ModelParams r = axis;
      r.delta_i = di;
      return coexistence_pair_real_part(r).value_or(std::numeric_limits<double>::quiet_NaN());
    };
    curve.axis_intersections = scan_roots(g, opts.delta_i_min, opts.delta_i_max, opts.delta_i_points, opts.tol);
    curves.push_back(std::move(curve));
  }
  return curves;
}

namespace {

std::vector<HopfPoint> sorted_by_delta_i(const HopfCurve& curve) {
  std::vector<HopfPoint> pts = curve.points;
  std::stable_sort(pts.begin(), pts.end(), [](const HopfPoint& a, const HopfPoint& b) {
    return a.delta_i < b.delta_i;
  });
  return pts;
}

}  // namespace

std::vector<double> delta_i_crossings(const HopfCurve& curve, double level) {
  const auto pts = sorted_by_delta_i(curve);
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const auto& a = pts[k];
    const auto& b = pts[k + 1];
    if (a.segment != b.segment || a.delta_i == b.delta_i) continue;
    const double fa = a.delta_v - level, fb = b.delta_v - level;
    if (fa == 0.0) {
      out.push_back(a.delta_i);
      continue;
    }
    if ((fa < 0.0) == (fb < 0.0)) continue;
    const double w = fa / (fa - fb);
    out.push_back(std::exp((1.0 - w) * std::log(a.delta_i) + w * std::log(b.delta_i)));
  }
  return out;
}

double enclosed_area(const HopfCurve& curve) {
  const auto pts = sorted_by_delta_i(curve);
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if (pts[k].segment != pts[k + 1].segment) continue;
    area += 0.5 * (pts[k].delta_v + pts[k + 1].delta_v) * (pts[k + 1].delta_i - pts[k].delta_i);
  }
  return area;
}

}  // namespace oncovir

#pragma once

// Adaptive embedded Runge-Kutta 4(5) (Dormand-Prince pair) with PI step
// control, cubic-Hermite dense output, and event location by bracketed root
// refinement on the interpolant. Also: adaptive Gauss-Kronrod quadrature for
// the conservative-case time-of-flight integral with square-root substitution
// at simple turning points.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "twsolve/detail/poly.hpp"
#include "twsolve/errors.hpp"
#include "twsolve/model.hpp"

namespace twsolve {

enum class ErrorPolicy {
  throw_on_failure,  // StepSizeUnderflow / MaxStepsExceeded propagate
  truncate           // stop early, flag the trajectory as truncated
};

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_step = 0.0;  // 0 -> automatic
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 1'000'000;
  double blowup_norm = 1e8;  // |state|_inf guard
  ErrorPolicy policy = ErrorPolicy::throw_on_failure;
};

/// Event g(T, state) = 0. `direction`: +1 only minus->plus crossings along
/// the direction of integration, -1 only plus->minus, 0 any. A terminal event
/// stops the integration at the hit; if `qualifier` is set, only qualifying
/// hits terminate (non-qualifying ones are still reported).
struct EventSpec {
  std::function<double(double, const PhaseState&)> g;
  int direction = 0;
  bool terminal = false;
  std::function<bool(double, const PhaseState&)> qualifier;
};

struct EventHit {
  std::size_t event_index = 0;
  double T = 0.0;
  PhaseState state;
};

namespace detail {

inline PhaseState hermite(double t0, const PhaseState& y0, const PhaseState& f0,
                          double t1, const PhaseState& y1, const PhaseState& f1,
                          double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return {h00 * y0.U + h10 * h * f0.U + h01 * y1.U + h11 * h * f1.U,
          h00 * y0.W + h10 * h * f0.W + h01 * y1.W + h11 * h * f1.W};
}

}  // namespace detail

/// Dense numerical orbit: nodes plus the field values there; evaluation
/// between nodes is cubic Hermite per accepted step (locally order 3, exact
/// at the nodes).
struct Trajectory {
  std::vector<double> ts;
  std::vector<PhaseState> ys;
  std::vector<PhaseState> fs;
  double abs_tol = 0.0;
  double rel_tol = 0.0;
  bool truncated = false;         // stopped by blowup / step failure
  bool event_terminated = false;  // stopped by a terminal event

  bool empty() const { return ts.empty(); }
  std::size_t size() const { return ts.size(); }
  double t_begin() const { return ts.front(); }
  double t_end() const { return ts.back(); }

  /// Interpolated state; T is clamped to the covered span.
  PhaseState at(double T) const {
    if (ts.empty()) throw InvalidParams("Trajectory::at on empty trajectory");
    if (ts.size() == 1) return ys.front();
    const bool fwd = ts.back() >= ts.front();
    // Locate the containing step on the monotone node list.
    std::size_t lo = 0, hi = ts.size() - 1;
    const double tc = fwd ? std::clamp(T, ts.front(), ts.back())
                          : std::clamp(T, ts.back(), ts.front());
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      const bool left = fwd ? (tc <= ts[mid]) : (tc >= ts[mid]);
      (left ? hi : lo) = mid;
    }
    return detail::hermite(ts[lo], ys[lo], fs[lo], ts[hi], ys[hi], fs[hi], tc);
  }
};

struct IntegrationResult {
  Trajectory trajectory;
  std::vector<EventHit> events;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5,
                                   8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
// 5th-order weights are row 6 of a; error weights = b5 - b4.
inline constexpr double dp_e[7] = {71.0 / 57600,  0.0,          -71.0 / 16695,
                                   71.0 / 1920,   -17253.0 / 339200,
                                   22.0 / 525,    -1.0 / 40};

inline double inf_norm(const PhaseState& y) {
  return std::max(std::abs(y.U), std::abs(y.W));
}

}  // namespace detail

/// Integrates dy/dT = field(T, y) over [t0, t1] (either direction).
/// Embedded per-step error is kept at or below the mixed tolerance
/// atol + rtol*|y|; event hits are refined on the dense output to 1e-12 in T.
template <class Field>
IntegrationResult integrate_adaptive(Field&& field, PhaseState y0, double t0,
                                     double t1,
                                     const IntegratorOptions& opt = {},
                                     const std::vector<EventSpec>& events = {}) {
  if (!(opt.abs_tol > 0.0) || !(opt.rel_tol > 0.0))
    throw InvalidParams("integrate_adaptive: tolerances must be positive");
  if (t0 == t1) throw InvalidParams("integrate_adaptive: empty time span");

  IntegrationResult res;
  Trajectory& tr = res.trajectory;
  tr.abs_tol = opt.abs_tol;
  tr.rel_tol = opt.rel_tol;

  const double dir = (t1 > t0) ? 1.0 : -1.0;
  double t = t0;
  PhaseState y = y0;
  PhaseState f = field(t, y);

  enum class FailKind { underflow, max_steps };
  const auto fail = [&](FailKind kind, const char* what) {
    if (opt.policy == ErrorPolicy::truncate) {
      tr.truncated = true;
      return;
    }
    if (kind == FailKind::max_steps) throw MaxStepsExceeded(what);
    throw StepSizeUnderflow(what);
  };

  // Initial step: conservative curvature-based guess (Hairer-style).
  double h;
  if (opt.initial_step > 0.0) {
    h = opt.initial_step;
  } else {
    const double d0 = detail::inf_norm(y), d1 = detail::inf_norm(f);
    double h0 = (d1 > 1e-10) ? 0.01 * (d0 + opt.abs_tol) / d1 : 1e-6;
    h0 = std::min(h0, std::abs(t1 - t0));
    const PhaseState y1{y.U + dir * h0 * f.U, y.W + dir * h0 * f.W};
    const PhaseState f1 = field(t + dir * h0, y1);
    const double d2 =
        detail::inf_norm({f1.U - f.U, f1.W - f.W}) / std::max(h0, 1e-300);
    const double m = std::max(d1, d2);
    const double h1 = (m > 1e-15) ? std::pow(0.01 / m, 0.2) : 1e-3;
    h = std::min({100.0 * h0, h1, std::abs(t1 - t0)});
    h = std::max(h, 1e-12);
  }
  h = std::min(h, opt.max_step);

  tr.ts.push_back(t);
  tr.ys.push_back(y);
  tr.fs.push_back(f);

  double errold = 1e-4;
  std::size_t steps = 0;
  bool done = false;

  std::array<PhaseState, 7> k;
  while (!done) {
    if (++steps > opt.max_steps) {
      fail(FailKind::max_steps, "max step count exceeded");
      break;
    }
    if ((t + dir * h - t1) * dir > 0.0) {
      h = std::abs(t1 - t);
      done = true;
    }
    if (h < 16.0 * std::numeric_limits<double>::epsilon() *
                std::max(1.0, std::abs(t))) {
      fail(FailKind::underflow, "step size underflow");
      break;
    }

    k[0] = f;
    for (int i = 1; i < 7; ++i) {
      PhaseState acc{0.0, 0.0};
      for (int j = 0; j < i; ++j) {
        acc.U += detail::dp_a[i][j] * k[j].U;
        acc.W += detail::dp_a[i][j] * k[j].W;
      }
      const PhaseState yi{y.U + dir * h * acc.U, y.W + dir * h * acc.W};
      k[i] = field(t + dir * h * detail::dp_c[i], yi);
    }
    // k[6] is the field at the 5th-order solution point (FSAL).
    PhaseState ynew{y.U, y.W};
    for (int j = 0; j < 6; ++j) {
      ynew.U += dir * h * detail::dp_a[6][j] * k[j].U;
      ynew.W += dir * h * detail::dp_a[6][j] * k[j].W;
    }
    PhaseState errv{0.0, 0.0};
    for (int j = 0; j < 7; ++j) {
      errv.U += detail::dp_e[j] * k[j].U;
      errv.W += detail::dp_e[j] * k[j].W;
    }
    errv.U *= dir * h;
    errv.W *= dir * h;
    const double scU =
        opt.abs_tol + opt.rel_tol * std::max(std::abs(y.U), std::abs(ynew.U));
    const double scW =
        opt.abs_tol + opt.rel_tol * std::max(std::abs(y.W), std::abs(ynew.W));
    const double err = std::sqrt(0.5 * ((errv.U / scU) * (errv.U / scU) +
                                        (errv.W / scW) * (errv.W / scW)));

    if (err <= 1.0) {  // accept
      const double tnew = done ? t1 : t + dir * h;
      const PhaseState fnew = k[6];

      if (detail::inf_norm(ynew) > opt.blowup_norm) {
        fail(FailKind::underflow,
             "step size underflow: solution norm exceeded blowup guard");
        break;
      }

      // --- event processing on [t, tnew] via the step's Hermite ---
      bool stop_event = false;
      double t_stop = tnew;
      if (!events.empty()) {
        const auto dense = [&](double tt) {
          return detail::hermite(t, y, f, tnew, ynew, fnew, tt);
        };
        struct RawHit {
          double T;
          std::size_t idx;
        };
        std::vector<RawHit> raw;
        constexpr int M = 9;
        for (std::size_t ei = 0; ei < events.size(); ++ei) {
          const EventSpec& ev = events[ei];
          double tprev = t;
          double gprev = ev.g(tprev, y);
          for (int i = 1; i <= M; ++i) {
            const double ti = t + (tnew - t) * double(i) / double(M);
            const double gi = ev.g(ti, dense(ti));
            const bool crossing =
                (gprev < 0.0 && gi > 0.0 && ev.direction >= 0) ||
                (gprev > 0.0 && gi < 0.0 && ev.direction <= 0) ||
                (gprev != 0.0 && gi == 0.0);
            if (crossing) {
              // bisection + secant refinement to 1e-12 in T
              double lo = tprev, hi_ = ti, glo = gprev, ghi = gi;
              for (int it = 0; it < 200; ++it) {
                if (std::abs(hi_ - lo) <=
                    1e-13 * std::max(1.0, std::abs(lo)))
                  break;
                double cand = (glo != ghi)
                                  ? lo - glo * (hi_ - lo) / (ghi - glo)
                                  : 0.5 * (lo + hi_);
                const double w = std::abs(hi_ - lo);
                if (!((cand > std::min(lo, hi_) + 1e-3 * w) &&
                      (cand < std::max(lo, hi_) - 1e-3 * w)))
                  cand = 0.5 * (lo + hi_);
                const double gc = ev.g(cand, dense(cand));
                if (gc == 0.0) {
                  lo = hi_ = cand;
                  glo = ghi = gc;
                  break;
                }
                if ((gc < 0.0) == (glo < 0.0)) {
                  lo = cand;
                  glo = gc;
                } else {
                  hi_ = cand;
                  ghi = gc;
                }
              }
              raw.push_back({0.5 * (lo + hi_), ei});
            }
            tprev = ti;
            gprev = gi;
          }
        }
        std::sort(raw.begin(), raw.end(),
                  [&](const RawHit& a, const RawHit& b) {
                    return (a.T - b.T) * dir < 0.0;
                  });
        for (const RawHit& rh : raw) {
          const PhaseState ys = dense(rh.T);
          // De-dup against the previous hit of the same event.
          bool dup = false;
          for (auto it = res.events.rbegin(); it != res.events.rend(); ++it)
            if (it->event_index == rh.idx &&
                std::abs(it->T - rh.T) <= 1e-10 * std::max(1.0, std::abs(rh.T)))
              dup = true;
          if (dup) continue;
          res.events.push_back({rh.idx, rh.T, ys});
          const EventSpec& ev = events[rh.idx];
          if (ev.terminal && (!ev.qualifier || ev.qualifier(rh.T, ys))) {
            stop_event = true;
            t_stop = rh.T;
            break;
          }
        }
      }

      if (stop_event) {
        const PhaseState yst =
            detail::hermite(t, y, f, tnew, ynew, fnew, t_stop);
        tr.ts.push_back(t_stop);
        tr.ys.push_back(yst);
        tr.fs.push_back(field(t_stop, yst));
        tr.event_terminated = true;
        break;
      }

      t = tnew;
      y = ynew;
      f = fnew;
      tr.ts.push_back(t);
      tr.ys.push_back(y);
      tr.fs.push_back(f);
      if (done) break;

      const double fac = std::clamp(
          0.9 * std::pow(err > 1e-14 ? err : 1e-14, -0.17) *
              std::pow(errold, 0.04),
          0.2, 5.0);
      errold = std::max(err, 1e-10);
      h = std::min(h * fac, opt.max_step);
    } else {  // reject
      done = false;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
  }
  return res;
}

// ------------------------------------------------------------ quadrature ----

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1] (positive half; the rule
// is symmetric). Kronrod nodes xgk include the Gauss nodes at odd indices.
inline constexpr double gk_xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk_wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// One GK15 application; returns (kronrod, |kronrod - gauss|).
template <class F>
std::pair<double, double> gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), hl = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = hl * gk_xgk[i];
    double fsum;
    if (i == 7) {
      fsum = f(c);
      resg += gk_wg[3] * fsum;
    } else {
      fsum = f(c - x) + f(c + x);
      if (i % 2 == 1) resg += gk_wg[i / 2] * fsum;
    }
    resk += gk_wgk[i] * fsum;
  }
  return {resk * hl, std::abs((resk - resg) * hl)};
}

/// Adaptive bisection on GK15 down to an absolute tolerance. The width floor
/// stops refinement once panels reach relative machine scale, where the
/// error estimate is dominated by roundoff and cannot contract further.
template <class F>
double adaptive_gk(F&& f, double a, double b, double tol, int depth = 0) {
  auto [val, err] = gk15(f, a, b);
  if (err <= tol || depth >= 26 ||
      (b - a) <= 1e-12 * (std::abs(a) + std::abs(b) + 1.0))
    return val;
  const double m = 0.5 * (a + b);
  return adaptive_gk(f, a, m, 0.5 * tol, depth + 1) +
         adaptive_gk(f, m, b, 0.5 * tol, depth + 1);
}

/// Synthetic division: ascending coefficients of p(u)/(u - r), remainder
/// dropped. Used to evaluate a polynomial stably right at a simple root.
inline std::vector<double> deflate(const std::vector<double>& c, double r) {
  const std::size_t n = c.size() - 1;
  std::vector<double> q(n);
  q[n - 1] = c[n];
  for (std::size_t k = n - 1; k-- > 0;) q[k] = c[k + 1] + r * q[k + 1];
  return q;
}

}  // namespace detail

/// Time of flight xi = int du / sqrt(2H + 2 delta^{-1} (l0 u + l1 u^2/2 +
/// l2 u^3/3 + l3 u^4/4)) between two U values on an energy level. Simple
/// turning points at the endpoints are handled by the substitution u = a+s^2;
/// the integrable 1/sqrt endpoint singularity then disappears. Relative
/// accuracy ~1e-9.
inline double time_of_flight(const HamiltonianCase& c, double H, double u_from,
                             double u_to) {
  if (c.delta == 0.0)
    throw InvalidParams("time_of_flight: delta must be nonzero");
  if (u_from == u_to) return 0.0;
  const double lo = std::min(u_from, u_to), hi = std::max(u_from, u_to);

  // Radicand polynomial R(u), ascending coefficients.
  const std::vector<double> R{2.0 * H, 2.0 * c.lambda[0] / c.delta,
                              c.lambda[1] / c.delta,
                              2.0 * c.lambda[2] / (3.0 * c.delta),
                              c.lambda[3] / (2.0 * c.delta)};
  const std::vector<double> Rp = detail::derivative(R);
  const auto Rv = [&](double u) { return detail::horner(R, u); };

  double scale = 0.0;
  for (int i = 0; i <= 16; ++i)
    scale = std::max(scale, std::abs(Rv(lo + (hi - lo) * i / 16.0)));
  if (scale == 0.0)
    throw InvalidParams("time_of_flight: radicand identically zero");

  // Root analysis: endpoint roots -> turning points; interior roots or
  // negative interior values -> the integrand leaves the real domain.
  const double edge_tol = 1e-8 * (1.0 + hi - lo);
  // Simple roots have |R'| ~ scale/width; a multiple root split by the root
  // finder leaves |R'| ~ sqrt(eps)*scale at the polished location.
  const double slope_tol = 1e-5 * scale / (1.0 + hi - lo);
  bool turn_lo = false, turn_hi = false;
  double root_lo = lo, root_hi = hi;  // polished roots once matched
  for (double r : detail::real_roots(R)) {
    const bool at_lo = std::abs(r - lo) <= edge_tol;
    const bool at_hi = std::abs(r - hi) <= edge_tol;
    if (at_lo || at_hi) {
      // A second root on the same edge means the polisher split a multiple
      // root; |R'| at an exact multiple root is 0 directly.
      if ((at_lo && turn_lo) || (at_hi && turn_hi) ||
          std::abs(detail::horner(Rp, r)) <= slope_tol)
        throw TurningPointOrderTooHigh(
            "time_of_flight: endpoint root of the radicand is not simple");
      if (at_lo) { turn_lo = true; root_lo = r; }
      else       { turn_hi = true; root_hi = r; }
    } else if (r > lo && r < hi) {
      throw RadicandNegative(
          "time_of_flight: radicand vanishes inside the interval");
    }
  }
  // Value-based fallback: a multiple endpoint root splits into a complex
  // pair under the root finder and would otherwise slip through as a
  // divergent 1/sqrt integral.
  for (bool at_lo : {true, false}) {
    bool& turn = at_lo ? turn_lo : turn_hi;
    if (turn) continue;
    const double edge = at_lo ? lo : hi;
    if (std::abs(Rv(edge)) > 1e-9 * scale) continue;
    const double slope = detail::horner(Rp, edge);
    if (std::abs(slope) <= slope_tol)
      throw TurningPointOrderTooHigh(
          "time_of_flight: endpoint root of the radicand is not simple");
    turn = true;
    (at_lo ? root_lo : root_hi) = edge - Rv(edge) / slope;
  }
  if (!turn_lo && Rv(lo) < 0.0)
    throw RadicandNegative("time_of_flight: radicand negative at u_from");
  if (!turn_hi && Rv(hi) < 0.0)
    throw RadicandNegative("time_of_flight: radicand negative at u_to");

  const auto direct = [&](double a, double b) {
    return detail::adaptive_gk(
        [&](double u) {
          const double r = Rv(u);
          if (r <= 0.0)
            throw RadicandNegative(
                "time_of_flight: radicand negative in the interior");
          return 1.0 / std::sqrt(r);
        },
        a, b, 1e-12);
  };
  // Substituted integrand from a turning point at `edge` toward `inner`:
  // u = edge -+ s^2, du = -+2s ds, ds-integrand 2s/sqrt(R(u)). With the
  // radicand deflated at the (polished) edge root, R = sgn*s^2*Q(u), so the
  // integrand collapses to 2/sqrt(sgn*Q) -- smooth, and free of the Horner
  // cancellation that otherwise drowns R near its root.
  const auto from_turning = [&](double edge, double inner) {
    const double sgn = (inner > edge) ? 1.0 : -1.0;
    const double L = std::sqrt(std::abs(inner - edge));
    const std::vector<double> Q = detail::deflate(R, edge);
    return detail::adaptive_gk(
        [&](double s) {
          const double q = sgn * detail::horner(Q, edge + sgn * s * s);
          if (q <= 0.0)
            throw RadicandNegative(
                "time_of_flight: radicand negative in the interior");
          return 2.0 / std::sqrt(q);
        },
        0.0, L, 1e-12);
  };

  double val;
  if (!turn_lo && !turn_hi) {
    val = direct(lo, hi);
  } else if (turn_lo && !turn_hi) {
    val = from_turning(root_lo, hi);
  } else if (!turn_lo && turn_hi) {
    val = from_turning(root_hi, lo);
  } else {
    const double mid = 0.5 * (root_lo + root_hi);
    val = from_turning(root_lo, mid) + from_turning(root_hi, mid);
  }
  return val;
}

}  // namespace twsolve

#pragma once

// Homoclinic bifurcation of the planar system by invariant-manifold shooting:
// the unstable separatrix of the saddle B0 is integrated forward and the
// stable one backward until each first crosses the section
// Sigma = {W = 0, U > 0.5}; the signed gap m(mu) between the two crossing
// U-values changes sign at the bifurcation, which bisection + secant locates.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "twsolve/errors.hpp"
#include "twsolve/integrate.hpp"
#include "twsolve/model.hpp"

namespace twsolve {

enum class Manifold { unstable, stable };

enum class RegimeLabel { cycle_regime, homoclinic, connection_regime };

inline std::string to_string(RegimeLabel r) {
  switch (r) {
    case RegimeLabel::cycle_regime: return "cycle_regime";
    case RegimeLabel::homoclinic: return "homoclinic";
    case RegimeLabel::connection_regime: return "connection_regime";
  }
  return "homoclinic";
}

struct ShootOptions {
  double offset = 1e-6;     // seed distance from B0 along the eigendirection
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double t_budget = 200.0;  // per-leg integration budget
  double section_u_min = 0.5;
};

/// Saddle rates at B0: alpha (unstable) and beta (negated stable rate) are
/// the positive roots of r^2 + A*mu*r - 1 = 0 and r^2 - A*mu*r - 1 = 0.
inline std::pair<double, double> saddle_rates(double A, double mu) {
  const double s = std::sqrt(A * A * mu * mu + 4.0);
  return {0.5 * (-A * mu + s), 0.5 * (A * mu + s)};
}

/// Seed point B0 + offset*e on the requested invariant manifold, oriented
/// into the half-plane U > 0. The Jacobian at B0 is [[0,-1],[-1,-A*mu]], so
/// the eigenvector for eigenvalue l is (1, -l).
inline PhaseState manifold_seed(double A, double mu, Manifold which,
                                double offset) {
  if (offset <= 0.0) throw InvalidParams("manifold_seed: offset must be > 0");
  const auto [alpha, beta] = saddle_rates(A, mu);
  const double l = (which == Manifold::unstable) ? alpha : -beta;
  const double n = std::sqrt(1.0 + l * l);
  return {offset / n, -l * offset / n};
}

struct SectionCrossing {
  double U = 0.0;       // U value on Sigma
  double T = 0.0;       // time of the crossing
  Trajectory leg;       // the integrated manifold leg up to the crossing
};

/// Integrates one manifold leg (unstable forward / stable backward) until its
/// first qualifying crossing of Sigma. Throws SectionMiss when the leg blows
/// up or exhausts its budget before reaching the section.
template <class Field>
SectionCrossing section_crossing(Field&& field, const PhaseState& seed,
                                 bool forward, const ShootOptions& opt) {
  IntegratorOptions io;
  io.abs_tol = opt.abs_tol;
  io.rel_tol = opt.rel_tol;
  io.policy = ErrorPolicy::truncate;  // blowups diagnosed as SectionMiss
  EventSpec ev;
  ev.g = [](double, const PhaseState& s) { return s.W; };
  ev.direction = 0;
  ev.terminal = true;
  const double umin = opt.section_u_min;
  ev.qualifier = [umin](double, const PhaseState& s) { return s.U > umin; };

  auto res = integrate_adaptive(field, seed, 0.0,
                                forward ? opt.t_budget : -opt.t_budget, io,
                                {ev});
  if (!res.trajectory.event_terminated)
    throw SectionMiss(res.trajectory.truncated
                          ? "section_crossing: orbit blew up before Sigma"
                          : "section_crossing: budget exhausted before Sigma");
  for (auto it = res.events.rbegin(); it != res.events.rend(); ++it)
    if (it->state.U > umin)
      return {it->state.U, it->T, std::move(res.trajectory)};
  throw SectionMiss("section_crossing: no qualifying section hit recorded");
}

struct ShootResult {
  double mismatch = 0.0;    // U_unstable - U_stable on Sigma
  double U_unstable = 0.0;
  double U_stable = 0.0;
  Trajectory unstable_leg;
  Trajectory stable_leg;
};

/// Shoots both separatrix legs of B0 at the given mu and measures the gap on
/// Sigma. m(mu*) = 0 characterizes the homoclinic loop.
inline ShootResult shoot(double A, double mu, const ShootOptions& opt = {}) {
  const auto field = [A, mu](double, const PhaseState& s) {
    return vector_field(s, A, mu);
  };
  auto up = section_crossing(field, manifold_seed(A, mu, Manifold::unstable,
                                                  opt.offset),
                             true, opt);
  auto st = section_crossing(field, manifold_seed(A, mu, Manifold::stable,
                                                  opt.offset),
                             false, opt);
  return {up.U - st.U, up.U, st.U, std::move(up.leg), std::move(st.leg)};
}

/// Signed section gap m(mu); `tol` sets both integrator tolerances.
inline double shoot_mismatch(double A, double mu, double offset = 1e-6,
                             double tol = 1e-10) {
  if (offset <= 0.0 || tol <= 0.0)
    throw InvalidParams("shoot_mismatch: offset and tol must be > 0");
  ShootOptions opt;
  opt.offset = offset;
  opt.abs_tol = opt.rel_tol = tol;
  return shoot(A, mu, opt).mismatch;
}

struct HomoclinicResult {
  double A = 0.0;
  double mu_star = 0.0;
  double x_star = 0.0;   // U-coordinate of the loop on Sigma
  double alpha = 0.0;    // unstable saddle rate at mu_star
  double beta = 0.0;     // negated stable saddle rate at mu_star
  int iterations = 0;
  std::vector<std::pair<double, double>> mismatch_history;  // (mu, m)
  double mu_tol = 0.0;
  double mismatch_tol = 0.0;
};

/// Locates mu* in the bracket by bisection with secant acceleration on the
/// section mismatch, then polishes until |m| <= mismatch_tol. The mismatch is
/// found by event detection and is only piecewise smooth, so every candidate
/// stays inside the maintained sign-change bracket.
inline HomoclinicResult find_homoclinic(double A, double bracket_lo,
                                        double bracket_hi,
                                        double mu_tol = 1e-6,
                                        double mismatch_tol = 1e-8,
                                        const ShootOptions& opt = {}) {
  if (!(bracket_lo < bracket_hi))
    throw InvalidParams("find_homoclinic: empty bracket");
  if (mu_tol <= 0.0)
    throw InvalidParams("find_homoclinic: mu_tol must be > 0");

  HomoclinicResult out;
  out.A = A;
  out.mu_tol = mu_tol;
  out.mismatch_tol = mismatch_tol;

  const auto eval = [&](double mu) {
    const double m = shoot(A, mu, opt).mismatch;
    out.mismatch_history.emplace_back(mu, m);
    ++out.iterations;
    return m;
  };

  double lo = bracket_lo, hi = bracket_hi;
  double mlo = eval(lo), mhi = eval(hi);
  if (mlo == 0.0) { lo = hi = bracket_lo; }
  else if (mhi == 0.0) { lo = hi = bracket_hi; }
  else if ((mlo < 0.0) == (mhi < 0.0)) {
    throw NoSignChange("find_homoclinic: mismatch does not change sign "
                       "across the bracket");
  }

  double best_mu = (std::abs(mlo) <= std::abs(mhi)) ? lo : hi;
  double best_m = (std::abs(mlo) <= std::abs(mhi)) ? mlo : mhi;

  for (int it = 0; it < 120 && lo < hi; ++it) {
    const bool narrow = (hi - lo) <= mu_tol;
    if (narrow && std::abs(best_m) <= mismatch_tol) break;
    if (narrow && it >= 80) break;  // mismatch floor reached; keep best

    double cand = (mhi != mlo) ? lo - mlo * (hi - lo) / (mhi - mlo)
                               : 0.5 * (lo + hi);
    const double w = hi - lo;
    if (!(cand > lo + 0.05 * w && cand < hi - 0.05 * w))
      cand = 0.5 * (lo + hi);
    const double mc = eval(cand);
    if (std::abs(mc) < std::abs(best_m)) {
      best_m = mc;
      best_mu = cand;
    }
    if (mc == 0.0) { lo = hi = cand; break; }
    if ((mc < 0.0) == (mlo < 0.0)) {
      lo = cand;
      mlo = mc;
    } else {
      hi = cand;
      mhi = mc;
    }
  }

  out.mu_star = best_mu;
  const auto final_shot = shoot(A, out.mu_star, opt);
  out.x_star = final_shot.U_unstable;
  const auto [alpha, beta] = saddle_rates(A, out.mu_star);
  out.alpha = alpha;
  out.beta = beta;
  return out;
}

/// Fig.-2 style regime labels relative to a previously computed mu_star.
inline RegimeLabel classify_regime(double /*A*/, double mu, double mu_star,
                                   double tol) {
  if (std::abs(mu - mu_star) <= tol) return RegimeLabel::homoclinic;
  return (mu < mu_star) ? RegimeLabel::cycle_regime
                        : RegimeLabel::connection_regime;
}

/// Default portrait seeds: both orientations of the B0 separatrices plus
/// small radial offsets at B1 and B2 (foci at the parameter ranges of
/// interest, so no real eigendirection exists there).
inline std::vector<PhaseState> default_portrait_seeds(double A, double mu,
                                                      double offset = 1e-6) {
  const PhaseState eu = manifold_seed(A, mu, Manifold::unstable, offset);
  const PhaseState es = manifold_seed(A, mu, Manifold::stable, offset);
  return {eu,
          {-eu.U, -eu.W},
          es,
          {-es.U, -es.W},
          {-1.0 + 1e-3, 0.0},
          {1.0 + 1e-3, 0.0}};
}

/// Integrates each seed forward and backward within the budget (blowups
/// truncate the individual orbit and set its `truncated` flag) and splices
/// the two legs into one trajectory with ascending T.
inline std::vector<Trajectory> portrait(double A, double mu,
                                        const std::vector<PhaseState>& seeds,
                                        double t_budget,
                                        double abs_tol = 1e-10,
                                        double rel_tol = 1e-10) {
  if (t_budget <= 0.0) throw InvalidParams("portrait: t_budget must be > 0");
  const auto field = [A, mu](double, const PhaseState& s) {
    return vector_field(s, A, mu);
  };
  IntegratorOptions io;
  io.abs_tol = abs_tol;
  io.rel_tol = rel_tol;
  io.policy = ErrorPolicy::truncate;

  std::vector<Trajectory> out;
  out.reserve(seeds.size());
  for (const PhaseState& seed : seeds) {
    auto back = integrate_adaptive(field, seed, 0.0, -t_budget, io).trajectory;
    auto fwd = integrate_adaptive(field, seed, 0.0, t_budget, io).trajectory;
    Trajectory tr;
    tr.abs_tol = abs_tol;
    tr.rel_tol = rel_tol;
    tr.truncated = back.truncated || fwd.truncated;
    tr.ts.reserve(back.size() + fwd.size());
    tr.ys.reserve(back.size() + fwd.size());
    tr.fs.reserve(back.size() + fwd.size());
    for (std::size_t i = back.size(); i-- > 1;) {  // skip duplicate T=0 node
      tr.ts.push_back(back.ts[i]);
      tr.ys.push_back(back.ys[i]);
      tr.fs.push_back(back.fs[i]);
    }
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      tr.ts.push_back(fwd.ts[i]);
      tr.ys.push_back(fwd.ys[i]);
      tr.fs.push_back(fwd.fs[i]);
    }
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace twsolve

// Exhaustive least-squares fit of a rational-exponential ansatz
//   U(T) = sum_{k=1..m} a_k E^k / (1 + sum_{r=1..m+1} b_r E^r),  E = e^{aT}
// against a sampled profile, over m <= 3 and a grid of decay rates. Used to
// show that the numerical homoclinic orbit is NOT of this closed form: the
// smallest achievable sup-residual stays well above the fit tolerance.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "oracles.hpp"

namespace testsup {

struct RatFit {
  int m = 0;
  double alpha = 0.0;
  std::vector<double> a, b;  // numerator a[1..m], denominator b[1..m+1]
  double sup_residual = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double ratfit_eval(const RatFit& c, double T) {
  const double E = std::exp(c.alpha * T);
  double num = 0.0, den = 1.0, Ek = 1.0;
  for (std::size_t k = 0; k < c.a.size(); ++k) {
    Ek *= E;
    num += c.a[k] * Ek;
    den += c.b[k] * Ek;
  }
  den += c.b.back() * Ek * E;
  if (std::abs(den) < 1e-12) return std::numeric_limits<double>::infinity();
  return num / den;
}

inline double ratfit_sup(const RatFit& c,
                         const std::function<double(double)>& Uref, double lo,
                         double hi, int n) {
  double sup = 0.0;
  for (int i = 0; i < n; ++i) {
    const double T = lo + (hi - lo) * i / (n - 1);
    const double v = ratfit_eval(c, T);
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    sup = std::max(sup, std::abs(v - Uref(T)));
  }
  return sup;
}

}  // namespace detail

/// One fit at fixed (m, alpha): linearized least squares seeded into a few
/// Levenberg-damped Gauss-Newton steps. Returns the candidate scored by its
/// sup-residual on [lo, hi] (infinite when the solve degenerates).
inline RatFit rational_exp_fit(const std::function<double(double)>& Uref,
                               int m, double alpha, double lo, double hi) {
  const int ns = 401, nsup = 1201;
  const int p = 2 * m + 1;  // a_1..a_m, b_1..b_{m+1}
  std::vector<double> T(ns), U(ns);
  for (int i = 0; i < ns; ++i) {
    T[i] = lo + (hi - lo) * i / (ns - 1);
    U[i] = Uref(T[i]);
  }
  const auto design_row = [&](int i, const std::vector<double>& theta,
                              bool linearized, std::vector<double>& row,
                              double& rhs) {
    const double E = std::exp(alpha * T[i]);
    std::vector<double> Ek(m + 2, 1.0);
    for (int k = 1; k <= m + 1; ++k) Ek[k] = Ek[k - 1] * E;
    if (linearized) {
      // U*(1 + sum b_r E^r) = sum a_k E^k  ->  U = [E^k; -U E^r] theta
      for (int k = 1; k <= m; ++k) row[k - 1] = Ek[k];
      for (int r = 1; r <= m + 1; ++r) row[m + r - 1] = -U[i] * Ek[r];
      rhs = U[i];
    } else {
      double num = 0.0, den = 1.0;
      for (int k = 1; k <= m; ++k) num += theta[k - 1] * Ek[k];
      for (int r = 1; r <= m + 1; ++r) den += theta[m + r - 1] * Ek[r];
      for (int k = 1; k <= m; ++k) row[k - 1] = Ek[k] / den;
      for (int r = 1; r <= m + 1; ++r)
        row[m + r - 1] = -num * Ek[r] / (den * den);
      rhs = U[i] - num / den;  // negative residual; GN step solves J d = rhs
    }
  };

  const auto normal_solve = [&](const std::vector<double>& theta,
                                bool linearized, double ridge,
                                std::vector<double>& sol) {
    Matrix ata(p, std::vector<double>(p, 0.0));
    std::vector<double> atb(p, 0.0), row(p);
    double rhs = 0.0;
    for (int i = 0; i < ns; ++i) {
      design_row(i, theta, linearized, row, rhs);
      bool ok = std::isfinite(rhs);
      for (int j = 0; j < p && ok; ++j) ok = std::isfinite(row[j]);
      if (!ok) return false;
      for (int j = 0; j < p; ++j) {
        atb[j] += row[j] * rhs;
        for (int k = j; k < p; ++k) ata[j][k] += row[j] * row[k];
      }
    }
    double scale = 0.0;
    for (int j = 0; j < p; ++j) {
      for (int k = 0; k < j; ++k) ata[j][k] = ata[k][j];
      scale = std::max(scale, ata[j][j]);
    }
    for (int j = 0; j < p; ++j) ata[j][j] += ridge * scale;
    try {
      sol = lu_solve(ata, atb);
    } catch (const std::exception&) {
      return false;
    }
    for (int j = 0; j < p; ++j)
      if (!std::isfinite(sol[j])) return false;
    return true;
  };

  RatFit best;
  best.m = m;
  best.alpha = alpha;

  std::vector<double> theta;
  if (!normal_solve({}, true, 1e-12, theta)) return best;

  const auto pack = [&](const std::vector<double>& th) {
    RatFit c;
    c.m = m;
    c.alpha = alpha;
    c.a.assign(th.begin(), th.begin() + m);
    c.b.assign(th.begin() + m, th.end());
    c.sup_residual = detail::ratfit_sup(c, Uref, lo, hi, nsup);
    return c;
  };
  best = pack(theta);

  // Gauss-Newton polish with increasing ridge on rejected steps.
  double ridge = 1e-10;
  for (int it = 0; it < 12; ++it) {
    std::vector<double> step;
    if (!normal_solve(theta, false, ridge, step)) break;
    std::vector<double> cand(p);
    for (int j = 0; j < p; ++j) cand[j] = theta[j] + step[j];
    const RatFit c = pack(cand);
    if (c.sup_residual < best.sup_residual) {
      best = c;
      theta = cand;
      ridge = std::max(ridge * 0.3, 1e-12);
    } else {
      ridge *= 10.0;
      if (ridge > 1e2) break;
    }
  }
  return best;
}

/// Exhaustive search over m in {1,2,3} and a uniform 24-point rate grid on
/// [0.2, 2.5]; returns the best candidate found.
inline RatFit best_rational_exp_fit(const std::function<double(double)>& Uref,
                                    double lo = -6.0, double hi = 6.0) {
  RatFit best;
  for (int m = 1; m <= 3; ++m) {
    for (int g = 0; g < 24; ++g) {
      const double alpha = 0.2 + (2.5 - 0.2) * g / 23.0;
      const RatFit c = rational_exp_fit(Uref, m, alpha, lo, hi);
      if (c.sup_residual < best.sup_residual) best = c;
    }
  }
  return best;
}

}  // namespace testsup

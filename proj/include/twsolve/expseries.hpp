#pragma once

// Two-sided exponential-series approximation of the solitary wave
//   U(T) = sum a_k exp[alpha k T]  (T < 0),   sum b_k exp[-beta k T]  (T > 0),
// sewed at T = 0 where U(0) = x_star. The T>0 branch comes from a convolution
// recurrence with a free amplitude b1 calibrated to hit x_star; the T<0
// branch from Cauchy data at 0 through a (dual) Vandermonde system solved by
// Bjorck-Pereyra elimination. High-order internals run in long double: the
// Taylor-derivative recursion and the Vandermonde right-hand side lose digits
// quickly in plain double.

#include <cmath>
#include <cstddef>
#include <vector>

#include "twsolve/errors.hpp"
#include "twsolve/integrate.hpp"

namespace twsolve {

struct IndicialPair {
  double alpha = 0.0;  // positive root of r^2 + A*mu*r - 1 = 0
  double beta = 0.0;   // positive root of r^2 - A*mu*r - 1 = 0
};

/// Decay rates of the two branches; they coincide with the saddle rates of
/// B0 (same characteristic polynomial), so alpha*beta = 1.
inline IndicialPair indicial_roots(double A, double mu) {
  if (A <= 0.0) throw InvalidParams("indicial_roots: A must be > 0");
  const double s = std::sqrt(A * A * mu * mu + 4.0);
  return {0.5 * (-A * mu + s), 0.5 * (A * mu + s)};
}

/// True iff no finite rational-exponential profile can solve the damped
/// equation: the two indicial equations r^2 +- A*mu*r - 1 = 0 share a root
/// only when A*mu = 0.
inline bool lemma1_check(double A, double mu) { return A * mu != 0.0; }

namespace detail {

inline long double beta_ld(double A, double mu) {
  const long double Am = static_cast<long double>(A) * mu;
  return 0.5L * (Am + std::sqrt(Am * Am + 4.0L));
}

inline long double alpha_ld(double A, double mu) {
  const long double Am = static_cast<long double>(A) * mu;
  return 0.5L * (-Am + std::sqrt(Am * Am + 4.0L));
}

// Shared body of the two one-sided recurrences. The coefficient of
// exp[-/+ rate*k*T] in the substituted equation gives
//   L(k) * c_k = conv_sign * A * rate * sum_{i+j=k} i c_i c_j
//                - sum_{i+j+l=k} c_i c_j c_l,
// with L(k) = (rate*k)^2 -+ A*mu*rate*k - 1. k = 1 reproduces the indicial
// equation L(1) = 0, leaving c_1 free.
inline std::vector<long double> one_sided_coeffs(double A, double mu,
                                                 long double rate,
                                                 long double Lsign,
                                                 long double conv_sign,
                                                 long double c1, int N) {
  if (N < 1) throw InvalidParams("series coefficients: N must be >= 1");
  std::vector<long double> c(N + 1, 0.0L);
  std::vector<long double> sq(2 * N + 2, 0.0L);  // sq[m] = sum_{i+j=m} c_i c_j
  c[1] = c1;
  sq[2] = c1 * c1;
  const long double Am = static_cast<long double>(A) * mu;
  for (int k = 2; k <= N; ++k) {
    const long double rk = rate * k;
    const long double Lk = rk * rk + Lsign * Am * rk - 1.0L;
    if (std::abs(Lk) <= 1e-12L * (1.0L + rk * rk)) throw ResonantIndex(k);
    long double conv2 = 0.0L;  // sum_{i+j=k} i c_i c_j
    for (int i = 1; i < k; ++i) conv2 += static_cast<long double>(i) * c[i] * c[k - i];
    long double conv3 = 0.0L;  // sum_{i+j+l=k} c_i c_j c_l
    for (int m = 2; m < k; ++m) conv3 += sq[m] * c[k - m];
    c[k] = (conv_sign * static_cast<long double>(A) * rate * conv2 - conv3) / Lk;
    for (int i = 1; i < k; ++i) sq[k + i] += 2.0L * c[k] * c[i];
    sq[2 * k] += c[k] * c[k];
  }
  return c;
}

}  // namespace detail

/// Coefficients b_1..b_N of the T>0 branch from the convolution recurrence
///   L(k) b_k = A*beta*sum_{i+j=k} i b_i b_j - sum_{i+j+l=k} b_i b_j b_l,
/// L(k) = (beta k)^2 - A*mu*beta k - 1. b_1 is free; L(1) = 0 is the indicial
/// equation. The positive root of L is beta itself, so resonance is only
/// possible at k = 1 and the ResonantIndex guard exists for robustness.
inline std::vector<double> lower_branch_coeffs(double A, double mu, double b1,
                                               int N) {
  const auto c = detail::one_sided_coeffs(A, mu, detail::beta_ld(A, mu),
                                          -1.0L, +1.0L,
                                          static_cast<long double>(b1), N);
  std::vector<double> out(N);
  for (int k = 1; k <= N; ++k) out[k - 1] = static_cast<double>(c[k]);
  return out;
}

/// Same recurrence applied to the T<0 branch (rate alpha, opposite signs).
/// Kept as an explicit demonstration: on this branch the recurrence limit
/// does not reproduce the true solution, which is why the Cauchy/Vandermonde
/// method below exists.
inline std::vector<double> upper_branch_coeffs_recurrence(double A, double mu,
                                                          double a1, int N) {
  const auto c = detail::one_sided_coeffs(A, mu, detail::alpha_ld(A, mu),
                                          +1.0L, -1.0L,
                                          static_cast<long double>(a1), N);
  std::vector<double> out(N);
  for (int k = 1; k <= N; ++k) out[k - 1] = static_cast<double>(c[k]);
  return out;
}

namespace detail {

/// Calibrates the free amplitude of a one-sided series so the truncated sum
/// equals x_star. By homogeneity c_k(c1) = c_k(1) * c1^k, so the sum is a
/// polynomial in c1; scan a log grid over (0, 10*x_star] for the first sign
/// change, then refine by bisection + secant.
template <class CoeffFn>
double calibrate_amplitude(double x_star, int N, CoeffFn&& unit_coeffs,
                           const char* who) {
  if (N < 2) throw InvalidParams(std::string(who) + ": N must be >= 2");
  if (x_star == 0.0) return 0.0;
  if (x_star < 0.0)
    throw CalibrationFailed(std::string(who) +
                            ": bracket (0, 10*x_star] is empty");
  const std::vector<long double> c = unit_coeffs();  // c[k] for c1 = 1
  const auto sum_at = [&](long double c1) {
    long double acc = 0.0L;  // Horner in c1
    for (int k = N; k >= 1; --k) acc = acc * c1 + c[k];
    return acc * c1 - static_cast<long double>(x_star);
  };

  const int M = 400;
  const long double top = 10.0L * static_cast<long double>(x_star);
  long double prev = top * 1e-6L;
  long double fprev = sum_at(prev);
  long double lo = 0.0L, hi = 0.0L, flo = 0.0L, fhi = 0.0L;
  bool found = false;
  for (int i = 1; i < M && !found; ++i) {
    const long double p =
        top * std::pow(1e-6L, 1.0L - static_cast<long double>(i) / (M - 1));
    const long double fp = sum_at(p);
    if (fprev == 0.0L) { lo = hi = prev; found = true; break; }
    if ((fprev < 0.0L) != (fp < 0.0L)) {
      lo = prev; hi = p; flo = fprev; fhi = fp;
      found = true;
      break;
    }
    prev = p;
    fprev = fp;
  }
  if (!found && fprev == 0.0L) { lo = hi = prev; found = true; }
  if (!found)
    throw CalibrationFailed(std::string(who) +
                            ": no sign change of the truncated sum in "
                            "(0, 10*x_star]");
  for (int it = 0; it < 200 && lo < hi; ++it) {
    if (hi - lo <= 1e-12L * std::max(1.0L, std::abs(lo))) break;
    long double cand = (fhi != flo) ? lo - flo * (hi - lo) / (fhi - flo)
                                    : 0.5L * (lo + hi);
    const long double w = hi - lo;
    if (!(cand > lo + 1e-3L * w && cand < hi - 1e-3L * w))
      cand = 0.5L * (lo + hi);
    const long double fc = sum_at(cand);
    if (fc == 0.0L) { lo = hi = cand; break; }
    if ((fc < 0.0L) == (flo < 0.0L)) {
      lo = cand;
      flo = fc;
    } else {
      hi = cand;
      fhi = fc;
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

}  // namespace detail

/// b1 such that the truncated T>0 series hits x_star at T = 0.
inline double calibrate_b1(double A, double mu, double x_star, int N) {
  return detail::calibrate_amplitude(
      x_star, N,
      [&] {
        return detail::one_sided_coeffs(A, mu, detail::beta_ld(A, mu), -1.0L,
                                        +1.0L, 1.0L, N);
      },
      "calibrate_b1");
}

/// a1 for the (demonstration) recurrence on the T<0 branch.
inline double calibrate_a1_recurrence(double A, double mu, double x_star,
                                      int N) {
  return detail::calibrate_amplitude(
      x_star, N,
      [&] {
        return detail::one_sided_coeffs(A, mu, detail::alpha_ld(A, mu), +1.0L,
                                        -1.0L, 1.0L, N);
      },
      "calibrate_a1_recurrence");
}

namespace detail {

/// Taylor coefficients c_j (so U^{(j)}(0) = j! c_j) of the solution with
/// Cauchy data (x0, x1), from the ODE recursion
///   (j+2)(j+1) c_{j+2} = -A*mu*(j+1) c_{j+1} - A*(U U')_j - (U^3)_j + c_j.
inline std::vector<long double> taylor_coeffs_ld(double A, double mu,
                                                 double x0, double x1,
                                                 int order) {
  if (order < 2)
    throw InvalidParams("taylor_derivatives: order must be >= 2");
  const long double Al = A, mul = mu;
  std::vector<long double> c(order + 1, 0.0L), sq(order + 1, 0.0L),
      cu(order + 1, 0.0L);
  c[0] = x0;
  c[1] = x1;
  for (int j = 0; j + 2 <= order; ++j) {
    sq[j] = 0.0L;
    for (int i = 0; i <= j; ++i) sq[j] += c[i] * c[j - i];
    cu[j] = 0.0L;
    for (int i = 0; i <= j; ++i) cu[j] += sq[i] * c[j - i];
    long double uup = 0.0L;  // (U U')_j
    for (int m = 0; m <= j; ++m)
      uup += static_cast<long double>(m + 1) * c[m + 1] * c[j - m];
    c[j + 2] = (-Al * mul * (j + 1) * c[j + 1] - Al * uup - cu[j] + c[j]) /
               (static_cast<long double>(j + 2) * (j + 1));
  }
  return c;
}

inline long double factorial_ld(int n) {
  long double f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace detail

/// Successive derivatives U(0), U'(0), ..., U^(order)(0) of the solution with
/// Cauchy data (x0, x1). U''(0) = -A*x1*(mu+x0) - x0*(x0^2-1).
inline std::vector<double> taylor_derivatives(double A, double mu, double x0,
                                              double x1, int order) {
  const auto c = detail::taylor_coeffs_ld(A, mu, x0, x1, order);
  std::vector<double> d(order + 1);
  for (int j = 0; j <= order; ++j)
    d[j] = static_cast<double>(c[j] * detail::factorial_ld(j));
  return d;
}

struct VandermondeSolution {
  std::vector<double> a;
  double residual = 0.0;      // ||M a - rhs||_2, long-double accumulation
  double rhs_norm = 0.0;      // ||rhs||_2
  bool ill_conditioned = false;  // residual > 1e-6 * ||rhs||  (warning only)
};

namespace detail {

inline std::vector<long double> vandermonde_solve_ld(
    long double alpha, std::vector<long double> b) {
  const std::size_t n = b.size();
  std::vector<long double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = alpha * static_cast<long double>(k + 1);
  // Bjorck-Pereyra, dual system M a = b with M[j][k] = x_k^j.
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (std::size_t i = n - 1; i > k; --i) b[i] -= x[k] * b[i - 1];
  for (std::size_t k = n - 1; k-- > 0;) {
    for (std::size_t i = k + 1; i < n; ++i) b[i] /= (x[i] - x[i - k - 1]);
    for (std::size_t i = k; i + 1 < n; ++i) b[i] -= b[i + 1];
  }
  return b;
}

}  // namespace detail

/// Solves sum_k (alpha k)^j a_k = rhs_j, j = 0..N-1 (a dual Vandermonde
/// system; always nonsingular for alpha != 0) by Bjorck-Pereyra elimination.
/// Sets the ill_conditioned warning flag when the verification residual
/// exceeds 1e-6*||rhs||; the coefficients are still returned.
inline VandermondeSolution vandermonde_solve(double alpha,
                                             const std::vector<double>& rhs) {
  if (alpha == 0.0) throw InvalidParams("vandermonde_solve: alpha must be nonzero");
  if (rhs.empty()) throw InvalidParams("vandermonde_solve: empty rhs");
  const std::size_t n = rhs.size();
  std::vector<long double> b(rhs.begin(), rhs.end());
  const std::vector<long double> a = detail::vandermonde_solve_ld(alpha, b);

  VandermondeSolution out;
  out.a.assign(a.begin(), a.end());
  long double rn = 0.0L, bn = 0.0L;
  std::vector<long double> pw(n, 1.0L);  // x_k^j, updated per row
  for (std::size_t j = 0; j < n; ++j) {
    long double row = 0.0L;
    for (std::size_t k = 0; k < n; ++k) row += pw[k] * a[k];
    const long double r = row - static_cast<long double>(rhs[j]);
    rn += r * r;
    bn += static_cast<long double>(rhs[j]) * rhs[j];
    for (std::size_t k = 0; k < n; ++k)
      pw[k] *= static_cast<long double>(alpha) * (k + 1);
  }
  out.residual = static_cast<double>(std::sqrt(rn));
  out.rhs_norm = static_cast<double>(std::sqrt(bn));
  out.ill_conditioned = out.residual > 1e-6 * out.rhs_norm;
  return out;
}

/// det M = alpha^{N(N-1)/2} * prod_{m=1}^{N-1} m!  (never zero for alpha!=0).
inline double vandermonde_determinant(double alpha, int N) {
  if (N < 1) throw InvalidParams("vandermonde_determinant: N must be >= 1");
  long double d = std::pow(static_cast<long double>(alpha),
                           static_cast<long double>(N) * (N - 1) / 2.0L);
  for (int m = 1; m < N; ++m) d *= detail::factorial_ld(m);
  return static_cast<double>(d);
}

struct UpperBranch {
  double alpha = 0.0;
  double x_star = 0.0;
  std::vector<double> a;  // a_1..a_N
  double residual = 0.0;
  bool ill_conditioned = false;
};

struct LowerBranch {
  double beta = 0.0;
  double x_star = 0.0;
  double b1 = 0.0;
  std::vector<double> b;  // b_1..b_N
};

/// T<0 branch by the Cauchy-data method: the truncated series' derivatives
/// at 0 are matched to the true solution's derivatives (rows j = 0..N-1),
/// which is the dual Vandermonde system above with
/// rhs = (x_star, 0, U''(0), ..., U^{(N-1)}(0)).
inline UpperBranch upper_branch_coeffs(double A, double mu, double x_star,
                                       int N) {
  if (N < 3) throw InvalidParams("upper_branch_coeffs: N must be >= 3");
  const auto c = detail::taylor_coeffs_ld(A, mu, x_star, 0.0, N - 1);
  std::vector<long double> rhs(N);
  for (int j = 0; j < N; ++j) rhs[j] = c[j] * detail::factorial_ld(j);
  const long double al = detail::alpha_ld(A, mu);
  const auto a = detail::vandermonde_solve_ld(al, rhs);

  UpperBranch out;
  out.alpha = static_cast<double>(al);
  out.x_star = x_star;
  out.a.assign(a.begin(), a.end());
  // Residual bookkeeping in double precision via the public solver.
  std::vector<double> rhs_d(rhs.begin(), rhs.end());
  const auto chk = vandermonde_solve(out.alpha, rhs_d);
  out.residual = chk.residual;
  out.ill_conditioned = chk.ill_conditioned;
  return out;
}

/// T>0 branch: recurrence coefficients with b1 calibrated to x_star.
inline LowerBranch lower_branch(double A, double mu, double x_star, int N) {
  LowerBranch out;
  out.beta = static_cast<double>(detail::beta_ld(A, mu));
  out.x_star = x_star;
  out.b1 = calibrate_b1(A, mu, x_star, N);
  out.b = lower_branch_coeffs(A, mu, out.b1, N);
  return out;
}

/// Piecewise two-sided evaluator; value x_star exactly at T = 0. The upper
/// branch enforces U'(0) = 0 by construction; the lower branch's derivative
/// at 0 is a sewing-quality diagnostic.
struct ExpSeriesApproximant {
  double alpha = 0.0;
  double beta = 0.0;
  double x_star = 0.0;
  std::vector<double> a;  // a_1..a_N, T < 0 branch
  std::vector<double> b;  // b_1..b_M, T > 0 branch

  double eval(double T) const {
    if (T == 0.0) return x_star;
    long double acc = 0.0L;
    if (T < 0.0) {
      const long double e = std::exp(static_cast<long double>(alpha) * T);
      long double p = 1.0L;
      for (double ak : a) {
        p *= e;
        acc += static_cast<long double>(ak) * p;
      }
    } else {
      const long double e = std::exp(-static_cast<long double>(beta) * T);
      long double p = 1.0L;
      for (double bk : b) {
        p *= e;
        acc += static_cast<long double>(bk) * p;
      }
    }
    return static_cast<double>(acc);
  }

  /// U'(0+) - U'(0-) of the truncated branches.
  double derivative_jump() const {
    long double up = 0.0L, lo = 0.0L;
    for (std::size_t k = 0; k < a.size(); ++k)
      up += static_cast<long double>(alpha) * (k + 1) * a[k];
    for (std::size_t k = 0; k < b.size(); ++k)
      lo += -static_cast<long double>(beta) * (k + 1) * b[k];
    return static_cast<double>(lo - up);
  }
};

inline ExpSeriesApproximant sew(const UpperBranch& upper,
                                const LowerBranch& lower) {
  if (upper.x_star != lower.x_star)
    throw InvalidParams("sew: branches built for different x_star");
  ExpSeriesApproximant s;
  s.alpha = upper.alpha;
  s.beta = lower.beta;
  s.x_star = upper.x_star;
  s.a = upper.a;
  s.b = lower.b;
  return s;
}

/// Sup-norm distance between a profile evaluator and a dense-output reference
/// over 1000 uniform samples on [lo, hi].
template <class Eval>
double branch_error(Eval&& series, const Trajectory& reference, double lo,
                    double hi) {
  if (!(lo < hi)) throw InvalidParams("branch_error: empty interval");
  double worst = 0.0;
  constexpr int n = 1000;
  for (int i = 0; i < n; ++i) {
    const double T = lo + (hi - lo) * i / double(n - 1);
    worst = std::max(worst, std::abs(series(T) - reference.at(T).U));
  }
  return worst;
}

inline double branch_error(const ExpSeriesApproximant& s,
                           const Trajectory& reference, double lo, double hi) {
  return branch_error([&](double T) { return s.eval(T); }, reference, lo, hi);
}

}  // namespace twsolve

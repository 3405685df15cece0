#pragma once

// Small dense-polynomial toolbox: Horner evaluation, formal derivatives,
// products, and a Durand-Kerner root finder with Newton polishing. Coefficient
// vectors are ascending: c[0] + c[1]*x + ... + c[n]*x^n.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace twsolve::detail {

template <class T, class X>
X horner(const std::vector<T>& c, X x) {
  if (c.empty()) return X(0);
  X acc(c.back());
  for (std::size_t i = c.size() - 1; i-- > 0;) acc = acc * x + X(c[i]);
  return acc;
}

template <class T>
std::vector<T> derivative(const std::vector<T>& c) {
  std::vector<T> d;
  if (c.size() < 2) return d;
  d.reserve(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(T(k) * c[k]);
  return d;
}

// d/dxi acting on sum c_k w^k with w = exp(rate*xi): multiplies term k by
// rate*k. Keeps the degree, so repeated application stays in the same basis.
template <class T>
std::vector<T> log_derivative(const std::vector<T>& c, T rate) {
  std::vector<T> d(c.size(), T(0));
  for (std::size_t k = 1; k < c.size(); ++k) d[k] = rate * T(k) * c[k];
  return d;
}

template <class T>
std::vector<T> multiply(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<T> p(a.size() + b.size() - 1, T(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) p[i + j] += a[i] * b[j];
  return p;
}

template <class T>
std::vector<T> trimmed(std::vector<T> c, T tol = T(0)) {
  while (!c.empty() && std::abs(c.back()) <= tol) c.pop_back();
  return c;
}

/// All complex roots of the polynomial (ascending coefficients) by
/// Durand-Kerner iteration followed by a few Newton steps per root.
inline std::vector<std::complex<double>> roots(std::vector<double> c) {
  using C = std::complex<double>;
  c = trimmed(std::move(c));
  if (c.size() < 2) return {};
  const std::size_t n = c.size() - 1;
  // Normalize to monic for iteration stability.
  std::vector<double> m(c);
  for (auto& v : m) v /= c.back();

  // Radius bound (Cauchy) for the initial circle.
  double r = 0.0;
  for (std::size_t k = 0; k < n; ++k) r = std::max(r, std::abs(m[k]));
  r = 1.0 + r;

  std::vector<C> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ang =
        2.0 * std::numbers::pi * double(k) / double(n) + 0.35;
    z[k] = 0.7 * r * C(std::cos(ang), std::sin(ang));
  }

  for (int iter = 0; iter < 600; ++iter) {
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      C num = horner(m, z[k]);
      C den(1.0, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (j != k) den *= (z[k] - z[j]);
      if (std::abs(den) == 0.0) den = C(1e-300, 0.0);
      const C step = num / den;
      z[k] -= step;
      worst = std::max(worst, std::abs(step));
    }
    if (worst < 1e-15 * (1.0 + r)) break;
  }

  // Newton polish against the original (non-monic) coefficients.
  const std::vector<double> dc = derivative(c);
  for (auto& zk : z) {
    for (int it = 0; it < 40; ++it) {
      const C f = horner(c, zk);
      const C fp = horner(dc, zk);
      if (std::abs(fp) == 0.0) break;
      const C step = f / fp;
      zk -= step;
      if (std::abs(step) <= 1e-14 * (1.0 + std::abs(zk))) break;
    }
    if (std::abs(zk.imag()) <= 1e-12 * (1.0 + std::abs(zk.real())))
      zk = C(zk.real(), 0.0);
  }
  return z;
}

/// Real roots only, deduplicated, ascending. `imag_tol` is relative.
inline std::vector<double> real_roots(const std::vector<double>& c,
                                      double imag_tol = 1e-9) {
  std::vector<double> out;
  for (const auto& z : roots(c)) {
    if (std::abs(z.imag()) <= imag_tol * (1.0 + std::abs(z.real()))) {
      bool dup = false;
      for (double v : out)
        if (std::abs(v - z.real()) <= 1e-9 * (1.0 + std::abs(v))) dup = true;
      if (!dup) out.push_back(z.real());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace twsolve::detail

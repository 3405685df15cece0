#pragma once

// Governing PDE family, travelling-wave reduction, the scaled planar system
//   dU/dT = -W,   dW/dT = U(U^2-1) - A*W*(mu+U),
// its equilibria/linearizations, and the conservative (A=B=0) special case.

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "twsolve/detail/poly.hpp"
#include "twsolve/errors.hpp"

namespace twsolve {

/// Phase point of the reduced system; W = -dU/dT by convention, so orbits in
/// the (U, W) plane match the plotted portraits.
struct PhaseState {
  double U = 0.0;
  double W = 0.0;
};

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Coefficients of the governing family
///   tau*u_tt + A*u*u_x + B*u_t - kappa*u_xx + f(u) = 0,
/// with f(u) = sum_nu lambda_nu u^nu, nu in {0, 1/2, 1, 3/2, 2, 3}.
/// The cubic-source specialization has advect = damp = 1 and
/// f(u) = gamma*u*(u^2 - z0^2).
struct GBEParams {
  double tau = 0.0;
  double advect = 1.0;  // A, coefficient of u*u_x
  double damp = 1.0;    // B, coefficient of u_t
  double kappa = 0.0;
  std::map<double, double> source_coeffs;  // exponent nu -> lambda_nu
  double gamma = 1.0;
  double z0 = 1.0;
};

/// Expands gamma*u*(u^2 - z0^2) into the source-coefficient map.
inline std::map<double, double> cubic_source(double gamma, double z0) {
  return {{1.0, -gamma * z0 * z0}, {3.0, gamma}};
}

/// Travelling-wave frame data for u = U(xi), xi = x + v t.
struct ReducedTW {
  double h = 0.0;         // tau*v^2 - kappa
  double v = 0.0;         // wave speed
  double A_scaled = 0.0;  // damping strength of the normalized equation
  double mu_scaled = 0.0; // v / z0
};

/// Reduces the cubic-source equation to the normalized planar form.
///
/// With the scaling Ubar = U/z0, T = sqrt(gamma*z0^2/h)*xi the reduced ODE
///   h U'' + U'(v + U) + gamma U(U^2 - z0^2) = 0
/// becomes Ubar'' + A Ubar'(mu + Ubar) + Ubar(Ubar^2 - 1) = 0 with
/// A = 1/sqrt(gamma*h) and mu = v/z0. (Carrying the scaling through by hand
/// gives A = s/(gamma*z0) = 1/sqrt(gamma*h) with s = z0*sqrt(gamma/h); the
/// frequently quoted 1/sqrt(h*gamma^2) agrees only when gamma = 1.)
inline ReducedTW reduce_to_tw(const GBEParams& p, double speed) {
  if (p.gamma <= 0.0) throw InvalidParams("reduce_to_tw: gamma must be > 0");
  if (p.z0 <= 0.0) throw InvalidParams("reduce_to_tw: z0 must be > 0");
  const double h = p.tau * speed * speed - p.kappa;
  if (h <= 0.0)
    throw NonHyperbolicFrame("reduce_to_tw: h = tau*v^2 - kappa = " +
                             std::to_string(h) + " <= 0");
  return ReducedTW{h, speed, 1.0 / std::sqrt(p.gamma * h), speed / p.z0};
}

/// Right-hand side of the normalized planar system.
inline PhaseState vector_field(const PhaseState& s, double A, double mu) {
  return {-s.W, s.U * (s.U * s.U - 1.0) - A * s.W * (mu + s.U)};
}

/// Right-hand side of the unscaled reduction h U'' + U'(mu + U)
/// + gamma U(U^2 - z0^2) = 0 as a first-order system with W = -dU/dxi.
/// Algebraically equivalent to `vector_field` under the scaling above;
/// exposed for residual checks against catalog solutions.
inline PhaseState unscaled_vector_field(const PhaseState& s, double h,
                                        double mu, double gamma, double z0) {
  if (h == 0.0) throw InvalidParams("unscaled_vector_field: h must be nonzero");
  const double Wp =
      (-s.W * (mu + s.U) + gamma * s.U * (s.U * s.U - z0 * z0)) / h;
  return {-s.W, Wp};
}

/// Jacobian of `vector_field` at a state.
inline Mat2 jacobian(const PhaseState& s, double A, double mu) {
  return Mat2{{{0.0, -1.0},
               {3.0 * s.U * s.U - 1.0 - A * s.W, -A * (mu + s.U)}}};
}

enum class EqKind {
  saddle,
  stable_node,
  unstable_node,
  stable_focus,
  unstable_focus,
  center,
  degenerate
};

inline std::string to_string(EqKind k) {
  switch (k) {
    case EqKind::saddle: return "saddle";
    case EqKind::stable_node: return "stable node";
    case EqKind::unstable_node: return "unstable node";
    case EqKind::stable_focus: return "stable focus";
    case EqKind::unstable_focus: return "unstable focus";
    case EqKind::center: return "center";
    case EqKind::degenerate: return "degenerate";
  }
  return "degenerate";
}

struct Equilibrium {
  PhaseState location;
  std::complex<double> eig1, eig2;
  EqKind kind = EqKind::degenerate;
};

/// Classification from a pair of eigenvalues. Real parts below
/// 1e-10*(1+|lambda|) count as zero (robustness at bifurcation points).
inline EqKind classify_eigenvalues(std::complex<double> l1,
                                   std::complex<double> l2) {
  const auto realish = [](std::complex<double> l) {
    return std::abs(l.imag()) <= 1e-10 * (1.0 + std::abs(l));
  };
  const auto zero_re = [](std::complex<double> l) {
    return std::abs(l.real()) <= 1e-10 * (1.0 + std::abs(l));
  };
  if (realish(l1) && realish(l2)) {
    const double a = l1.real(), b = l2.real();
    if (a * b < 0.0 && !zero_re(l1) && !zero_re(l2)) return EqKind::saddle;
    if (zero_re(l1) || zero_re(l2)) return EqKind::degenerate;
    return a > 0.0 ? EqKind::unstable_node : EqKind::stable_node;
  }
  if (zero_re(l1) && zero_re(l2)) return EqKind::center;
  return l1.real() > 0.0 ? EqKind::unstable_focus : EqKind::stable_focus;
}

inline std::pair<std::complex<double>, std::complex<double>>
eigenvalues_2x2(const Mat2& J) {
  const double tr = J[0][0] + J[1][1];
  const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  const std::complex<double> disc =
      std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
  return {0.5 * (tr + disc), 0.5 * (tr - disc)};
}

/// The three stationary points B0=(0,0), B1=(-1,0), B2=(1,0) with their
/// linearizations. B0 has determinant -1 and is always a saddle.
inline std::vector<Equilibrium> equilibria(double A, double mu) {
  if (A <= 0.0) throw InvalidParams("equilibria: A must be > 0");
  std::vector<Equilibrium> out;
  for (double u : {0.0, -1.0, 1.0}) {
    Equilibrium e;
    e.location = {u, 0.0};
    auto [l1, l2] = eigenvalues_2x2(jacobian(e.location, A, mu));
    e.eig1 = l1;
    e.eig2 = l2;
    e.kind = classify_eigenvalues(l1, l2);
    out.push_back(e);
  }
  return out;
}

/// Parameter value where the linearization at B2 loses stability (trace
/// -A(mu+1) vanishes with determinant 2 > 0): mu = -1 for every A > 0.
inline double hopf_parameter(double A) {
  if (A <= 0.0) throw InvalidParams("hopf_parameter: A must be > 0");
  return -1.0;
}

/// Conservative travelling-wave case: delta*U'' = f(U) with
/// f(u) = lambda0 + lambda1 u + lambda2 u^2 + lambda3 u^3.
struct HamiltonianCase {
  double delta = 1.0;
  std::array<double, 4> lambda{0.0, 0.0, 0.0, 0.0};
  double H = 0.0;  // optional energy-level annotation
};

inline double hamiltonian_source(const HamiltonianCase& c, double u) {
  return c.lambda[0] + u * (c.lambda[1] + u * (c.lambda[2] + u * c.lambda[3]));
}

/// Conserved energy H = W^2/2 - delta^{-1}(l0 U + l1 U^2/2 + l2 U^3/3
/// + l3 U^4/4); level sets are the orbits of the conservative system.
inline double hamiltonian_energy(const PhaseState& s,
                                 const HamiltonianCase& c) {
  if (c.delta == 0.0)
    throw InvalidParams("hamiltonian_energy: delta must be nonzero");
  const double u = s.U;
  const double P = u * (c.lambda[0] +
                        u * (c.lambda[1] / 2.0 +
                             u * (c.lambda[2] / 3.0 + u * c.lambda[3] / 4.0)));
  return 0.5 * s.W * s.W - P / c.delta;
}

/// First-order field of the conservative case, W = -dU/dT convention:
/// (U', W') = (-W, -delta^{-1} f(U)). `hamiltonian_energy` is constant
/// along its orbits.
inline PhaseState hamiltonian_field(const PhaseState& s,
                                    const HamiltonianCase& c) {
  if (c.delta == 0.0)
    throw InvalidParams("hamiltonian_field: delta must be nonzero");
  return {-s.W, -hamiltonian_source(c, s.U) / c.delta};
}

/// Real roots of f(u) = 0 with center/saddle classification by the sign of
/// delta^{-1} f'(u): positive -> saddle, negative -> center, ~0 -> degenerate.
inline std::vector<std::pair<double, EqKind>> hamiltonian_equilibria(
    const HamiltonianCase& c) {
  if (c.lambda[3] == 0.0)
    throw InvalidParams("hamiltonian_equilibria: lambda3 must be nonzero");
  if (c.delta == 0.0)
    throw InvalidParams("hamiltonian_equilibria: delta must be nonzero");
  const std::vector<double> f{c.lambda[0], c.lambda[1], c.lambda[2],
                              c.lambda[3]};
  const auto us = detail::real_roots(f);
  if (us.empty())
    throw NoRealRoots("hamiltonian_equilibria: no real roots of the cubic");
  const std::vector<double> fp = detail::derivative(f);
  std::vector<std::pair<double, EqKind>> out;
  for (double u : us) {
    const double slope = detail::horner(fp, u) / c.delta;
    EqKind kind = EqKind::degenerate;
    if (slope > 1e-10) kind = EqKind::saddle;
    else if (slope < -1e-10) kind = EqKind::center;
    out.emplace_back(u, kind);
  }
  return out;
}

}  // namespace twsolve

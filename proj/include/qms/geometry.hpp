#pragma once

// Constant-curvature geometry in Weierstrass (ambient), Poincare
// (stereographic) and Beltrami (central projection) coordinates.
//
// kappa > 0 is the sphere, kappa = 0 Euclidean space, kappa < 0 hyperbolic
// space. On the sphere the library works on the x0 > 0 hemisphere.

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "qms/core.hpp"
#include "qms/errors.hpp"
#include "qms/linalg.hpp"

namespace qms {

enum class Chart { Poincare, Beltrami };

inline std::string_view to_string(Chart c) { return c == Chart::Poincare ? "poincare" : "beltrami"; }

/// Point (x0, x) of R^{N+1} on x0^2 + kappa x^2 = 1.
struct AmbientPoint {
  double x0 = 1.0;
  Vec x;
};

struct ChartPoint {
  Chart chart = Chart::Beltrami;
  Vec coords;
};

inline double constraint_residual(const AmbientPoint& a, double kappa) {
  return a.x0 * a.x0 + kappa * squared_norm(a.x) - 1.0;
}

/// Stereographic projection with pole (-1, 0).
inline AmbientPoint poincare_to_ambient(std::span<const double> y, double kappa) {
  const double den = 1.0 + kappa * squared_norm(y);
  if (std::abs(den) < kDomainGuard) throw DomainError("poincare_to_ambient: 1 + kappa y^2 = 0");
  const double lambda = 2.0 / den;
  AmbientPoint a{(1.0 - kappa * squared_norm(y)) / den, Vec(y.size())};
  for (std::size_t i = 0; i < y.size(); ++i) a.x[i] = lambda * y[i];
  return a;
}

/// Central projection with pole (0, 0).
inline AmbientPoint beltrami_to_ambient(std::span<const double> z, double kappa) {
  const double s = 1.0 + kappa * squared_norm(z);
  if (s <= 0.0) throw DomainError("beltrami_to_ambient: 1 + kappa z^2 <= 0");
  const double mu = 1.0 / std::sqrt(s);
  AmbientPoint a{mu, Vec(z.size())};
  for (std::size_t i = 0; i < z.size(); ++i) a.x[i] = mu * z[i];
  return a;
}

inline AmbientPoint to_ambient(const ChartPoint& c, double kappa) {
  return c.chart == Chart::Poincare ? poincare_to_ambient(c.coords, kappa) : beltrami_to_ambient(c.coords, kappa);
}

/// Inverse projections: y = x / (1 + x0), z = x / x0 (x0 > 0 branch).
inline ChartPoint ambient_to_chart(const AmbientPoint& a, Chart chart, double /*kappa*/) {
  ChartPoint c{chart, Vec(a.x.size())};
  if (chart == Chart::Poincare) {
    const double den = 1.0 + a.x0;
    if (std::abs(den) < kDomainGuard) throw DomainError("ambient_to_chart: x0 = -1 is the Poincare pole");
    for (std::size_t i = 0; i < a.x.size(); ++i) c.coords[i] = a.x[i] / den;
  } else {
    if (a.x0 < kDomainGuard) throw DomainError("ambient_to_chart: Beltrami chart needs x0 > 0");
    for (std::size_t i = 0; i < a.x.size(); ++i) c.coords[i] = a.x[i] / a.x0;
  }
  return c;
}

/// Direct Poincare -> Beltrami map z = 2y / (1 - kappa y^2).
inline Vec poincare_to_beltrami(std::span<const double> y, double kappa) {
  const double den = 1.0 - kappa * squared_norm(y);
  if (std::abs(den) < kDomainGuard) throw DomainError("poincare_to_beltrami: kappa y^2 = 1");
  Vec z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = 2.0 * y[i] / den;
  return z;
}

namespace detail {

// Geodesic distance r from the radial proxy t = tan(sqrt(kappa) r)/sqrt(kappa)
// (t = tanh(sqrt(-kappa) r)/sqrt(-kappa) when kappa < 0).
inline double distance_from_proxy(double t, double kappa) {
  if (kappa == 0.0) return t;
  const double sk = std::sqrt(std::abs(kappa));
  const double u = sk * t;
  if (kappa < 0.0 && u >= 1.0) throw DomainError("geodesic_distance: point outside the hyperbolic chart");
  if (u < 1e-4) {
    const double u2 = u * u;
    return kappa > 0.0 ? t * (1.0 - u2 / 3.0 + u2 * u2 / 5.0) : t * (1.0 + u2 / 3.0 + u2 * u2 / 5.0);
  }
  return (kappa > 0.0 ? std::atan(u) : std::atanh(u)) / sk;
}

}  // namespace detail

inline double geodesic_distance(const AmbientPoint& a, double kappa) {
  const double xn = norm(a.x);
  if (kappa == 0.0) return xn;
  if (a.x0 < kDomainGuard) throw DomainError("geodesic_distance: x0 <= 0 (equator or far hemisphere)");
  return detail::distance_from_proxy(xn / a.x0, kappa);
}

inline double geodesic_distance(const ChartPoint& c, double kappa) {
  if (c.chart == Chart::Beltrami) {
    if (1.0 + kappa * squared_norm(c.coords) <= 0.0) throw DomainError("geodesic_distance: 1 + kappa z^2 <= 0");
    return detail::distance_from_proxy(norm(c.coords), kappa);
  }
  const double y2 = squared_norm(c.coords);
  const double den = 1.0 - kappa * y2;
  if (den < kDomainGuard) throw DomainError("geodesic_distance: kappa y^2 >= 1 (equator or beyond)");
  if (kappa < 0.0 && 1.0 + kappa * y2 <= 0.0) throw DomainError("geodesic_distance: outside the Poincare ball");
  return detail::distance_from_proxy(2.0 * std::sqrt(y2) / den, kappa);
}

/// ds^2 along `vel` at `pos`: 4 dy^2/(1+k y^2)^2 or
/// ((1+k z^2) dz^2 - k (z.dz)^2)/(1+k z^2)^2.
inline double metric_form(Chart chart, double kappa, std::span<const double> pos, std::span<const double> vel) {
  const double s = 1.0 + kappa * squared_norm(pos);
  if (std::abs(s) < kDomainGuard) throw DomainError("metric_form: 1 + kappa q^2 = 0");
  const double v2 = squared_norm(vel);
  if (chart == Chart::Poincare) return 4.0 * v2 / (s * s);
  const double zv = dot(pos, vel);
  return (s * v2 - kappa * zv * zv) / (s * s);
}

/// Free Lagrangians. The Poincare one is normalized as m y'^2 / (2 (1+k y^2)^2),
/// a quarter of (m/2) ds^2; the Beltrami one is exactly (m/2) ds^2.
inline double free_lagrangian(Chart chart, double kappa, double mass, std::span<const double> pos,
                              std::span<const double> vel) {
  const double g = metric_form(chart, kappa, pos, vel);
  return chart == Chart::Poincare ? 0.125 * mass * g : 0.5 * mass * g;
}

inline Vec conjugate_momenta(Chart chart, double kappa, double mass, std::span<const double> pos,
                             std::span<const double> vel) {
  if (pos.size() != vel.size()) throw DimensionMismatch("conjugate_momenta: position/velocity lengths differ");
  const double s = 1.0 + kappa * squared_norm(pos);
  if (std::abs(s) < kDomainGuard) throw DomainError("conjugate_momenta: 1 + kappa q^2 = 0");
  Vec p(pos.size());
  if (chart == Chart::Poincare) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = mass * vel[i] / (s * s);
    return p;
  }
  const double zv = dot(pos, vel);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = mass * (s * vel[i] - kappa * zv * pos[i]) / (s * s);
  return p;
}

/// Curved kinetic energy as a function of the generators:
///   Poincare: (1 + k J-)^2 J+ / 2m,  Beltrami: (1 + k J-)(J+ + k J3^2) / 2m.
inline double curved_kinetic(Chart chart, double kappa, double mass, const SL2Args& j) {
  const double s = 1.0 + kappa * j.j_minus;
  if (chart == Chart::Poincare) return s * s * j.j_plus / (2.0 * mass);
  return s * (j.j_plus + kappa * j.j3 * j.j3) / (2.0 * mass);
}

inline SL2Partials curved_kinetic_partials(Chart chart, double kappa, double mass, const SL2Args& j) {
  const double s = 1.0 + kappa * j.j_minus;
  const double inv = 1.0 / (2.0 * mass);
  if (chart == Chart::Poincare) return {2.0 * kappa * s * j.j_plus * inv, s * s * inv, 0.0};
  return {kappa * (j.j_plus + kappa * j.j3 * j.j3) * inv, s * inv, 2.0 * kappa * s * j.j3 * inv};
}

/// Kinetic energy on a phase point; nonzero b in the realization adds the
/// curved centrifugal terms.
inline double kinetic_energy(Chart chart, double kappa, double mass, const SL2Realization& r, const PhasePoint& x) {
  if (mass <= 0.0) throw DomainError("kinetic_energy: mass must be positive");
  const double q2 = squared_norm(x.q);
  if (std::abs(1.0 + kappa * q2) < kDomainGuard) throw DomainError("kinetic_energy: 1 + kappa q^2 = 0");
  if (chart == Chart::Poincare && std::abs(1.0 - kappa * q2) < kDomainGuard)
    throw DomainError("kinetic_energy: Poincare chart boundary kappa q^2 = 1");
  const SL2Values j = evaluate_sl2(r, x);
  return curved_kinetic(chart, kappa, mass, {j.j_minus, j.j_plus, j.j3});
}

/// Centrifugal sum in ambient form: 2 sum b_i/x_i^2 (Poincare) or
/// sum b_i/(2 x_i^2) (Beltrami), with b = b_tilde.
inline double centrifugal_ambient(std::span<const double> b_tilde, const AmbientPoint& a, Chart chart) {
  if (b_tilde.size() != a.x.size()) throw DimensionMismatch("centrifugal_ambient: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < b_tilde.size(); ++i) {
    if (b_tilde[i] == 0.0) continue;
    if (std::abs(a.x[i]) < kDomainGuard) throw DomainError("centrifugal_ambient: x_i = 0 with nonzero b");
    s += b_tilde[i] / (a.x[i] * a.x[i]);
  }
  return chart == Chart::Poincare ? 2.0 * s : 0.5 * s;
}

/// The same centrifugal sum in chart coordinates:
/// sum b_i (1+k q^2)^2 / (2 q_i^2) or sum b_i (1+k q^2) / (2 q_i^2).
inline double centrifugal_chart(std::span<const double> b_tilde, Chart chart, double kappa,
                                std::span<const double> coords) {
  if (b_tilde.size() != coords.size()) throw DimensionMismatch("centrifugal_chart: length mismatch");
  const double s = 1.0 + kappa * squared_norm(coords);
  const double factor = chart == Chart::Poincare ? s * s : s;
  double total = 0.0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (b_tilde[i] == 0.0) continue;
    if (std::abs(coords[i]) < kDomainGuard) throw DomainError("centrifugal_chart: q_i = 0 with nonzero b");
    total += b_tilde[i] * factor / (2.0 * coords[i] * coords[i]);
  }
  return total;
}

}  // namespace qms

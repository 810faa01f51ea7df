#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "qms/errors.hpp"
#include "qms/linalg.hpp"

namespace qms {

/// |q_i| below this with b_i != 0 (and any other guarded singularity of a
/// Hamiltonian closer than this) makes evaluation a DomainError.
inline constexpr double kDomainGuard = 1e-10;

/// Canonical pair (q, p). Immutable once built through make().
struct PhasePoint {
  Vec q;
  Vec p;

  std::size_t dimension() const { return q.size(); }

  static PhasePoint make(Vec q, Vec p) {
    if (q.size() != p.size()) throw DimensionMismatch("PhasePoint: q and p lengths differ");
    if (q.empty()) throw DimensionMismatch("PhasePoint: empty state");
    auto finite = [](const Vec& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(q) || !finite(p)) throw DomainError("PhasePoint: non-finite entry");
    return PhasePoint{std::move(q), std::move(p)};
  }

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

/// Gradient of a phase-space function: (dF/dq, dF/dp).
struct PhaseGradient {
  Vec dq;
  Vec dp;

  double norm() const { return std::sqrt(squared_norm(dq) + squared_norm(dp)); }
};

/// N-site realization J- = q^2, J+ = p^2 + sum b_i / q_i^2, J3 = q.p.
struct SL2Realization {
  Vec b;

  std::size_t dimension() const { return b.size(); }

  static SL2Realization zero(std::size_t n) { return {Vec(n, 0.0)}; }
};

struct SL2Values {
  double j_minus = 0.0;
  double j_plus = 0.0;
  double j3 = 0.0;
  // Indexed by generator: 0 = J-, 1 = J+, 2 = J3.
  std::array<Vec, 3> grad_q;
  std::array<Vec, 3> grad_p;
};

/// Distance-like margin to the centrifugal planes: min |q_i| over sites with
/// b_i != 0, +inf when no site carries a barrier.
inline double centrifugal_margin(const SL2Realization& r, const PhasePoint& x) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.b.size(); ++i)
    if (r.b[i] != 0.0) m = std::min(m, std::abs(x.q[i]));
  return m;
}

inline SL2Values evaluate_sl2(const SL2Realization& r, const PhasePoint& x) {
  const std::size_t n = x.dimension();
  if (r.b.size() != n) throw DimensionMismatch("evaluate_sl2: realization has " + std::to_string(r.b.size()) +
                                               " sites, state has " + std::to_string(n));
  SL2Values out;
  for (auto& g : out.grad_q) g.assign(n, 0.0);
  for (auto& g : out.grad_p) g.assign(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const double qi = x.q[i];
    const double pi = x.p[i];
    out.j_minus += qi * qi;
    out.j_plus += pi * pi;
    out.j3 += qi * pi;
    out.grad_q[0][i] = 2.0 * qi;
    out.grad_p[1][i] = 2.0 * pi;
    out.grad_q[2][i] = pi;
    out.grad_p[2][i] = qi;
    if (r.b[i] != 0.0) {
      if (std::abs(qi) < kDomainGuard)
        throw DomainError("evaluate_sl2: q_" + std::to_string(i + 1) + " = 0 with nonzero b");
      const double inv2 = 1.0 / (qi * qi);
      out.j_plus += r.b[i] * inv2;
      out.grad_q[1][i] = -2.0 * r.b[i] * inv2 / qi;
    }
  }
  return out;
}

/// Arguments (xi-, xi+, xi3) of a Hamiltonian function H(J-, J+, J3).
struct SL2Args {
  double j_minus = 0.0;
  double j_plus = 0.0;
  double j3 = 0.0;
};

/// (dH/dxi-, dH/dxi+, dH/dxi3).
struct SL2Partials {
  double d_minus = 0.0;
  double d_plus = 0.0;
  double d_3 = 0.0;
};

using ParamMap = std::map<std::string, double, std::less<>>;

/// A Hamiltonian of the form H = F(J-, J+, J3) on a given realization.
///
/// `margin` reports how far a state is from the singularities of F itself
/// (origin for Coulomb terms, zeros of a variable mass) and `boundary` how far
/// it is from the edge of the coordinate chart, negative outside it. Either is left empty when
/// there is nothing to guard. Centrifugal planes are handled by the
/// realization.
struct HamiltonianSpec {
  std::string name;
  ParamMap params;
  SL2Realization realization;
  std::function<double(const SL2Args&)> eval;
  std::function<SL2Partials(const SL2Args&)> partials;
  std::function<double(const PhasePoint&)> margin;
  std::function<double(const PhasePoint&)> boundary;

  std::size_t dimension() const { return realization.dimension(); }

  double param(std::string_view key, double fallback = 0.0) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

inline double boundary_margin(const HamiltonianSpec& spec, const PhasePoint& x) {
  return spec.boundary ? spec.boundary(x) : std::numeric_limits<double>::infinity();
}

/// min(centrifugal margin, spec margin, chart boundary margin).
inline double singular_margin(const HamiltonianSpec& spec, const PhasePoint& x) {
  double m = centrifugal_margin(spec.realization, x);
  if (spec.margin) m = std::min(m, spec.margin(x));
  return std::min(m, boundary_margin(spec, x));
}

namespace detail {

inline void check_spec_domain(const HamiltonianSpec& spec, const PhasePoint& x) {
  if (spec.margin && spec.margin(x) < kDomainGuard)
    throw DomainError(spec.name + ": state is at a singularity of the Hamiltonian");
  if (boundary_margin(spec, x) < kDomainGuard) throw DomainError(spec.name + ": state is on the chart boundary");
}

}  // namespace detail

inline double hamiltonian_value(const HamiltonianSpec& spec, const PhasePoint& x) {
  const SL2Values j = evaluate_sl2(spec.realization, x);
  detail::check_spec_domain(spec, x);
  return spec.eval({j.j_minus, j.j_plus, j.j3});
}

/// Chain rule over the three generator gradients.
inline PhaseGradient hamiltonian_gradient(const HamiltonianSpec& spec, const PhasePoint& x) {
  const SL2Values j = evaluate_sl2(spec.realization, x);
  detail::check_spec_domain(spec, x);
  const SL2Partials d = spec.partials({j.j_minus, j.j_plus, j.j3});
  const std::size_t n = x.dimension();
  PhaseGradient g{Vec(n), Vec(n)};
  for (std::size_t i = 0; i < n; ++i) {
    g.dq[i] = d.d_minus * j.grad_q[0][i] + d.d_plus * j.grad_q[1][i] + d.d_3 * j.grad_q[2][i];
    g.dp[i] = d.d_minus * j.grad_p[0][i] + d.d_plus * j.grad_p[1][i] + d.d_3 * j.grad_p[2][i];
  }
  return g;
}

/// Phase-space observable with an analytic gradient.
struct ConservedQuantity {
  std::string name;
  std::function<double(const PhasePoint&)> value;
  std::function<PhaseGradient(const PhasePoint&)> gradient;
};

inline ConservedQuantity as_quantity(const HamiltonianSpec& spec, std::string name = "H") {
  return {std::move(name), [spec](const PhasePoint& x) { return hamiltonian_value(spec, x); },
          [spec](const PhasePoint& x) { return hamiltonian_gradient(spec, x); }};
}

/// The sl(2) generators and the Casimir J- J+ - J3^2 as observables.
inline ConservedQuantity generator_quantity(const SL2Realization& r, int which) {
  static constexpr const char* names[] = {"J-", "J+", "J3"};
  if (which < 0 || which > 2) throw RangeError("generator_quantity: index must be 0, 1 or 2");
  return {names[which],
          [r, which](const PhasePoint& x) {
            const SL2Values j = evaluate_sl2(r, x);
            return which == 0 ? j.j_minus : which == 1 ? j.j_plus : j.j3;
          },
          [r, which](const PhasePoint& x) {
            SL2Values j = evaluate_sl2(r, x);
            return PhaseGradient{std::move(j.grad_q[which]), std::move(j.grad_p[which])};
          }};
}

inline ConservedQuantity casimir_quantity(const SL2Realization& r) {
  return {"Casimir",
          [r](const PhasePoint& x) {
            const SL2Values j = evaluate_sl2(r, x);
            return j.j_minus * j.j_plus - j.j3 * j.j3;
          },
          [r](const PhasePoint& x) {
            const SL2Values j = evaluate_sl2(r, x);
            const std::size_t n = x.dimension();
            PhaseGradient g{Vec(n), Vec(n)};
            for (std::size_t i = 0; i < n; ++i) {
              g.dq[i] = j.grad_q[0][i] * j.j_plus + j.j_minus * j.grad_q[1][i] - 2.0 * j.j3 * j.grad_q[2][i];
              g.dp[i] = j.grad_p[0][i] * j.j_plus + j.j_minus * j.grad_p[1][i] - 2.0 * j.j3 * j.grad_p[2][i];
            }
            return g;
          }};
}

}  // namespace qms

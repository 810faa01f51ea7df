#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qms/core.hpp"
#include "qms/geometry.hpp"

namespace qms {

/// The universal integrals shared by every H(J-, J+, J3) on a realization.
///
/// `left` holds C^(2) ... C^(N); `right` holds C_(2) ... C_(N-1). C_(N) is the
/// same function as C^(N) and is stored once, in `left`.
struct IntegralSet {
  std::vector<ConservedQuantity> left;
  std::vector<ConservedQuantity> right;
  SL2Realization realization;

  std::size_t dimension() const { return realization.dimension(); }

  /// left followed by right: the 2N-3 distinct universal integrals.
  std::vector<ConservedQuantity> all() const {
    std::vector<ConservedQuantity> out = left;
    out.insert(out.end(), right.begin(), right.end());
    return out;
  }

  /// C_(2) ... C_(N): the right family including its shared top element.
  std::vector<ConservedQuantity> right_family() const {
    std::vector<ConservedQuantity> out = right;
    out.push_back(left.back());
    return out;
  }
};

namespace detail {

// Pairwise sum over sites [lo, hi):
//   sum_{i<j} { (q_i p_j - q_j p_i)^2 + b_i q_j^2/q_i^2 + b_j q_i^2/q_j^2 } + sum b_i
inline double casimir_range_value(const SL2Realization& r, const PhasePoint& x, std::size_t lo, std::size_t hi) {
  for (std::size_t i = lo; i < hi; ++i)
    if (r.b[i] != 0.0 && std::abs(x.q[i]) < kDomainGuard)
      throw DomainError("universal integral: q_" + std::to_string(i + 1) + " = 0 with nonzero b");
  double total = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    total += r.b[i];
    for (std::size_t j = i + 1; j < hi; ++j) {
      const double l = x.q[i] * x.p[j] - x.q[j] * x.p[i];
      const double qi2 = x.q[i] * x.q[i];
      const double qj2 = x.q[j] * x.q[j];
      total += l * l;
      if (r.b[i] != 0.0) total += r.b[i] * qj2 / qi2;
      if (r.b[j] != 0.0) total += r.b[j] * qi2 / qj2;
    }
  }
  return total;
}

// The pairwise sum equals J-^(range) J+^(range) - (J3^(range))^2, which gives
// an O(m) gradient.
inline PhaseGradient casimir_range_gradient(const SL2Realization& r, const PhasePoint& x, std::size_t lo,
                                            std::size_t hi) {
  const std::size_t n = x.dimension();
  double jm = 0.0, jp = 0.0, j3 = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    jm += x.q[i] * x.q[i];
    jp += x.p[i] * x.p[i];
    j3 += x.q[i] * x.p[i];
    if (r.b[i] != 0.0) {
      if (std::abs(x.q[i]) < kDomainGuard)
        throw DomainError("universal integral: q_" + std::to_string(i + 1) + " = 0 with nonzero b");
      jp += r.b[i] / (x.q[i] * x.q[i]);
    }
  }
  PhaseGradient g{Vec(n, 0.0), Vec(n, 0.0)};
  for (std::size_t i = lo; i < hi; ++i) {
    const double qi = x.q[i];
    double djp_dq = 0.0;
    if (r.b[i] != 0.0) djp_dq = -2.0 * r.b[i] / (qi * qi * qi);
    g.dq[i] = 2.0 * qi * jp + jm * djp_dq - 2.0 * j3 * x.p[i];
    g.dp[i] = 2.0 * x.p[i] * jm - 2.0 * j3 * qi;
  }
  return g;
}

inline ConservedQuantity casimir_range(const SL2Realization& r, std::size_t lo, std::size_t hi, std::string name) {
  return {std::move(name),
          [r, lo, hi](const PhasePoint& x) {
            if (x.dimension() != r.dimension()) throw DimensionMismatch("universal integral: dimension mismatch");
            return casimir_range_value(r, x, lo, hi);
          },
          [r, lo, hi](const PhasePoint& x) {
            if (x.dimension() != r.dimension()) throw DimensionMismatch("universal integral: dimension mismatch");
            return casimir_range_gradient(r, x, lo, hi);
          }};
}

inline void check_order(const SL2Realization& r, int m) {
  const auto n = static_cast<int>(r.dimension());
  if (m < 2 || m > n)
    throw RangeError("universal integral order " + std::to_string(m) + " outside [2, " + std::to_string(n) + "]");
}

inline std::size_t check_site(std::size_t i, std::size_t n) {
  if (i < 1 || i > n) throw RangeError("site index " + std::to_string(i) + " outside [1, " + std::to_string(n) + "]");
  return i - 1;
}

}  // namespace detail

/// C^(m): left Casimir on sites 1..m.
inline ConservedQuantity left_integral(const SL2Realization& r, int m) {
  detail::check_order(r, m);
  return detail::casimir_range(r, 0, static_cast<std::size_t>(m), "C^(" + std::to_string(m) + ")");
}

/// C_(m): right Casimir on sites N-m+1..N.
inline ConservedQuantity right_integral(const SL2Realization& r, int m) {
  detail::check_order(r, m);
  const std::size_t n = r.dimension();
  return detail::casimir_range(r, n - static_cast<std::size_t>(m), n, "C_(" + std::to_string(m) + ")");
}

inline IntegralSet universal_integrals(const SL2Realization& r) {
  const auto n = static_cast<int>(r.dimension());
  if (n < 2) throw DimensionMismatch("universal_integrals: need N >= 2");
  IntegralSet set{{}, {}, r};
  for (int m = 2; m <= n; ++m) set.left.push_back(left_integral(r, m));
  for (int m = 2; m <= n - 1; ++m) set.right.push_back(right_integral(r, m));
  return set;
}

/// Parameters of the oscillator (Smorodinsky-Winternitz) extra integrals.
struct OscillatorParams {
  double mass = 1.0;
  double omega = 1.0;
  Vec b_tilde;
  double kappa = 0.0;
};

/// Parameters of the Coulomb (Laplace-Runge-Lenz type) extra integrals.
struct CoulombParams {
  double mass = 1.0;
  double coupling = 1.0;  // k
  Vec b_tilde;
  double kappa = 0.0;
};

namespace detail {

// Chart-dependent shape of the momentum combination entering the extra
// integrals. Flat space is the Beltrami form at kappa = 0.
enum class ExtraForm { Beltrami, Poincare };

inline ConservedQuantity oscillator_integral(std::size_t site, OscillatorParams prm, ExtraForm form,
                                             std::string name) {
  const std::size_t i = detail::check_site(site, prm.b_tilde.size());

  auto value = [i, prm, form](const PhasePoint& x) {
    if (x.dimension() != prm.b_tilde.size()) throw DimensionMismatch("oscillator integral: dimension mismatch");
    const double k = prm.kappa;
    const double m = prm.mass;
    const double w2 = prm.omega * prm.omega;
    const double bi = prm.b_tilde[i];
    const double qi = x.q[i];
    if (bi != 0.0 && std::abs(qi) < kDomainGuard) throw DomainError("oscillator integral: q_i = 0 with nonzero b");
    const double s = dot(x.q, x.p);
    if (form == ExtraForm::Beltrami) {
      const double u = x.p[i] + k * s * qi;
      double v = u * u + 2.0 * m * w2 * qi * qi;
      if (bi != 0.0) v += m * bi / (qi * qi);
      return v;
    }
    const double d = 1.0 - k * squared_norm(x.q);
    if (std::abs(d) < kDomainGuard) throw DomainError("oscillator integral: chart boundary 1 - kappa q^2 = 0");
    const double u = x.p[i] * d + 2.0 * k * s * qi;
    double v = u * u + 8.0 * m * w2 * qi * qi / (d * d);
    if (bi != 0.0) v += m * bi * d * d / (qi * qi);
    return v;
  };

  auto gradient = [i, prm, form](const PhasePoint& x) {
    const std::size_t n = prm.b_tilde.size();
    if (x.dimension() != n) throw DimensionMismatch("oscillator integral: dimension mismatch");
    const double k = prm.kappa;
    const double m = prm.mass;
    const double w2 = prm.omega * prm.omega;
    const double bi = prm.b_tilde[i];
    const double qi = x.q[i];
    if (bi != 0.0 && std::abs(qi) < kDomainGuard) throw DomainError("oscillator integral: q_i = 0 with nonzero b");
    const double s = dot(x.q, x.p);
    PhaseGradient g{Vec(n, 0.0), Vec(n, 0.0)};

    if (form == ExtraForm::Beltrami) {
      const double u = x.p[i] + k * s * qi;
      for (std::size_t l = 0; l < n; ++l) {
        const double du_dq = k * x.p[l] * qi + (l == i ? k * s : 0.0);
        const double du_dp = (l == i ? 1.0 : 0.0) + k * x.q[l] * qi;
        g.dq[l] = 2.0 * u * du_dq;
        g.dp[l] = 2.0 * u * du_dp;
      }
      g.dq[i] += 4.0 * m * w2 * qi;
      if (bi != 0.0) g.dq[i] -= 2.0 * m * bi / (qi * qi * qi);
      return g;
    }

    const double d = 1.0 - k * squared_norm(x.q);
    if (std::abs(d) < kDomainGuard) throw DomainError("oscillator integral: chart boundary 1 - kappa q^2 = 0");
    const double u = x.p[i] * d + 2.0 * k * s * qi;
    const double d2 = d * d;
    for (std::size_t l = 0; l < n; ++l) {
      const double ql = x.q[l];
      const double du_dq = -2.0 * k * x.p[i] * ql + 2.0 * k * x.p[l] * qi + (l == i ? 2.0 * k * s : 0.0);
      const double du_dp = (l == i ? d : 0.0) + 2.0 * k * ql * qi;
      g.dq[l] = 2.0 * u * du_dq + 8.0 * m * w2 * 4.0 * k * qi * qi * ql / (d2 * d);
      g.dp[l] = 2.0 * u * du_dp;
      if (bi != 0.0) g.dq[l] += -4.0 * m * bi * k * ql * d / (qi * qi);
    }
    g.dq[i] += 16.0 * m * w2 * qi / d2;
    if (bi != 0.0) g.dq[i] -= 2.0 * m * bi * d2 / (qi * qi * qi);
    return g;
  };

  return {std::move(name), value, gradient};
}

// enforce_condition = false skips the b_tilde_i = 0 check; only the mutation
// tests build the formula outside its validity condition.
inline ConservedQuantity coulomb_integral(std::size_t site, CoulombParams prm, ExtraForm form, std::string name,
                                          bool enforce_condition = true) {
  const std::size_t n = prm.b_tilde.size();
  const std::size_t i = detail::check_site(site, n);
  if (enforce_condition && prm.b_tilde[i] != 0.0)
    throw ConfigError("Laplace-Runge-Lenz integral " + std::to_string(site) +
                      " requires b_tilde_" + std::to_string(site) + " = 0");

  const bool poincare = form == ExtraForm::Poincare;
  const double beta = poincare ? 2.0 : 1.0;
  const double coulomb_factor = poincare ? 0.5 : 1.0;

  auto common = [prm](const PhasePoint& x) {
    if (x.dimension() != prm.b_tilde.size()) throw DimensionMismatch("Coulomb integral: dimension mismatch");
    const double q2 = squared_norm(x.q);
    if (q2 < kDomainGuard * kDomainGuard) throw DomainError("Coulomb integral: q = 0");
    for (std::size_t l = 0; l < x.dimension(); ++l)
      if (prm.b_tilde[l] != 0.0 && std::abs(x.q[l]) < kDomainGuard)
        throw DomainError("Coulomb integral: q_l = 0 with nonzero b");
    return q2;
  };

  // S = sum_{l != i} b_l / q_l^2
  auto barrier_sum = [i, prm](const PhasePoint& x) {
    double s = 0.0;
    for (std::size_t l = 0; l < x.dimension(); ++l)
      if (l != i && prm.b_tilde[l] != 0.0) s += prm.b_tilde[l] / (x.q[l] * x.q[l]);
    return s;
  };

  auto value = [=](const PhasePoint& x) {
    const double q2 = common(x);
    const double k = prm.kappa;
    const double s = dot(x.q, x.p);
    const double pp = squared_norm(x.p);
    const double alpha = poincare ? 1.0 - k * q2 : 1.0;
    const double gamma = alpha;
    const double a = x.p[i] * s * (1.0 + k * q2) - x.q[i] * (pp * alpha + beta * k * s * s);
    const double coulomb = coulomb_factor * prm.coupling * prm.mass * x.q[i] / std::sqrt(q2);
    const double barrier = -prm.mass * x.q[i] * gamma * barrier_sum(x);
    return a + coulomb + barrier;
  };

  auto gradient = [=](const PhasePoint& x) {
    const double q2 = common(x);
    const double k = prm.kappa;
    const double s = dot(x.q, x.p);
    const double pp = squared_norm(x.p);
    const double alpha = poincare ? 1.0 - k * q2 : 1.0;
    const double gamma = alpha;
    const double qi = x.q[i];
    const double pi = x.p[i];
    const double rq = std::sqrt(q2);
    const double sum_b = barrier_sum(x);
    const double km = coulomb_factor * prm.coupling * prm.mass;
    const std::size_t dim = x.dimension();
    PhaseGradient g{Vec(dim, 0.0), Vec(dim, 0.0)};
    for (std::size_t l = 0; l < dim; ++l) {
      const double ql = x.q[l];
      const double pl = x.p[l];
      const double dalpha = poincare ? -2.0 * k * ql : 0.0;
      const double delta = l == i ? 1.0 : 0.0;

      double dq = pi * (pl * (1.0 + k * q2) + 2.0 * k * s * ql) - delta * (pp * alpha + beta * k * s * s) -
                  qi * (pp * dalpha + 2.0 * beta * k * s * pl);
      double dp = delta * s * (1.0 + k * q2) + pi * ql * (1.0 + k * q2) - qi * (2.0 * pl * alpha + 2.0 * beta * k * s * ql);

      dq += km * (delta / rq - qi * ql / (q2 * rq));

      const double dsum = (l != i && prm.b_tilde[l] != 0.0) ? -2.0 * prm.b_tilde[l] / (ql * ql * ql) : 0.0;
      dq += -prm.mass * (delta * gamma * sum_b + qi * dalpha * sum_b + qi * gamma * dsum);

      g.dq[l] = dq;
      g.dp[l] = dp;
    }
    return g;
  };

  return {std::move(name), value, gradient};
}

}  // namespace detail

/// I_i = p_i^2 + 2 m w^2 q_i^2 + m b_i / q_i^2 (flat oscillator). Site index is 1-based.
inline ConservedQuantity sw_extra_integral(std::size_t site, const OscillatorParams& prm) {
  OscillatorParams flat = prm;
  flat.kappa = 0.0;
  return detail::oscillator_integral(site, flat, detail::ExtraForm::Beltrami, "I_" + std::to_string(site));
}

/// Curved oscillator integral in Poincare or Beltrami phase space.
inline ConservedQuantity curved_sw_extra_integral(std::size_t site, const OscillatorParams& prm, Chart chart) {
  const bool p = chart == Chart::Poincare;
  return detail::oscillator_integral(site, prm, p ? detail::ExtraForm::Poincare : detail::ExtraForm::Beltrami,
                                     std::string(p ? "IP_" : "IB_") + std::to_string(site));
}

/// L_i: Laplace-Runge-Lenz type integral of the flat Coulomb system with
/// barriers. Valid only when b_tilde_i = 0 (ConfigError otherwise).
inline ConservedQuantity kc_extra_integral(std::size_t site, const CoulombParams& prm) {
  CoulombParams flat = prm;
  flat.kappa = 0.0;
  return detail::coulomb_integral(site, flat, detail::ExtraForm::Beltrami, "L_" + std::to_string(site));
}

inline ConservedQuantity curved_kc_extra_integral(std::size_t site, const CoulombParams& prm, Chart chart) {
  const bool p = chart == Chart::Poincare;
  return detail::coulomb_integral(site, prm, p ? detail::ExtraForm::Poincare : detail::ExtraForm::Beltrami,
                                  std::string(p ? "LP_" : "LB_") + std::to_string(site));
}

}  // namespace qms

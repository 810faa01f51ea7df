#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qms/core.hpp"
#include "qms/geometry.hpp"
#include "qms/integrals.hpp"

namespace qms {

enum class Family { Evans, SmorodinskyWinternitz, Garnier, NonlinearOscillator, KeplerCoulomb, Electromagnetic, VariableMass };

enum class Space { Euclidean, Poincare, Beltrami };

inline constexpr std::array<Family, 7> kAllFamilies = {
    Family::Evans,         Family::SmorodinskyWinternitz, Family::Garnier,     Family::NonlinearOscillator,
    Family::KeplerCoulomb, Family::Electromagnetic,       Family::VariableMass};

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::Evans: return "evans";
    case Family::SmorodinskyWinternitz: return "sw";
    case Family::Garnier: return "garnier";
    case Family::NonlinearOscillator: return "nonlinear_oscillator";
    case Family::KeplerCoulomb: return "kepler_coulomb";
    case Family::Electromagnetic: return "electromagnetic";
    case Family::VariableMass: return "variable_mass";
  }
  return "?";
}

inline std::string_view to_string(Space s) {
  switch (s) {
    case Space::Euclidean: return "euclidean";
    case Space::Poincare: return "poincare";
    case Space::Beltrami: return "beltrami";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  for (Family f : kAllFamilies)
    if (to_string(f) == s) return f;
  throw ConfigError("unknown system family '" + std::string(s) + "'");
}

inline Space parse_space(std::string_view s) {
  for (Space sp : {Space::Euclidean, Space::Poincare, Space::Beltrami})
    if (to_string(sp) == s) return sp;
  throw ConfigError("unknown space '" + std::string(s) + "'");
}

/// Smooth function of one variable paired with its derivative.
struct Profile {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::string description;

  double operator()(double s) const { return f(s); }

  static Profile zero() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }, "poly: 0"};
  }

  /// sum_k c_k s^k
  static Profile polynomial(Vec coeffs) {
    std::ostringstream os;
    os.precision(17);
    os << "poly:";
    for (std::size_t i = 0; i < coeffs.size(); ++i) os << (i ? ", " : " ") << coeffs[i];
    auto c = std::make_shared<const Vec>(std::move(coeffs));
    return {[c](double s) {
              double acc = 0.0;
              for (auto it = c->rbegin(); it != c->rend(); ++it) acc = acc * s + *it;
              return acc;
            },
            [c](double s) {
              double acc = 0.0;
              for (std::size_t k = c->size(); k-- > 1;) acc = acc * s + static_cast<double>(k) * (*c)[k];
              return acc;
            },
            os.str()};
  }

  /// c s^a (s > 0 when a is not a nonnegative integer)
  static Profile power(double c, double a) {
    std::ostringstream os;
    os.precision(17);
    os << "power: " << c << ", " << a;
    return {[c, a](double s) { return c * std::pow(s, a); },
            [c, a](double s) { return a == 0.0 ? 0.0 : c * a * std::pow(s, a - 1.0); }, os.str()};
  }

  /// c (1 + kappa s)^a
  static Profile conformal(double c, double kappa, double a) {
    std::ostringstream os;
    os.precision(17);
    os << "conformal: " << c << ", " << kappa << ", " << a;
    return {[c, kappa, a](double s) { return c * std::pow(1.0 + kappa * s, a); },
            [c, kappa, a](double s) { return c * a * kappa * std::pow(1.0 + kappa * s, a - 1.0); }, os.str()};
  }
};

/// Named real parameters shared by all families. Unused entries are ignored
/// by a given constructor.
struct SystemParams {
  double mass = 1.0;
  double omega = 0.0;
  double delta = 0.0;
  Vec deltas;             // delta_k, k = 1..K, multiplying J-^{k+1}
  double coupling = 0.0;  // k of the Coulomb term
  double charge = 0.0;    // e
  double kappa = 0.0;
  Vec b_tilde;            // b_i / m

  std::size_t dimension() const { return b_tilde.size(); }
};

namespace detail {

inline SL2Realization realization_from(const SystemParams& prm) {
  if (!(prm.mass > 0.0)) throw ConfigError("mass must be positive");
  SL2Realization r{Vec(prm.b_tilde.size())};
  for (std::size_t i = 0; i < r.b.size(); ++i) r.b[i] = prm.mass * prm.b_tilde[i];
  return r;
}

inline ParamMap param_map(const SystemParams& prm) {
  ParamMap m{{"mass", prm.mass},     {"omega", prm.omega},   {"delta", prm.delta},
             {"k", prm.coupling},    {"e", prm.charge},      {"kappa", prm.kappa}};
  for (std::size_t k = 0; k < prm.deltas.size(); ++k) m["delta_" + std::to_string(k + 1)] = prm.deltas[k];
  return m;
}

inline double chart_kappa(Space space, const SystemParams& prm) { return space == Space::Euclidean ? 0.0 : prm.kappa; }

// Signed chart margins: the equator image kappa q^2 = 1 for Poincare on the
// sphere, and the ideal boundary 1 + kappa q^2 = 0 for both charts on the
// hyperbolic space. A fixed step can overshoot the edge, so the sign matters.
inline std::function<double(const PhasePoint&)> chart_margin(Space space, double kappa) {
  if (space == Space::Euclidean || kappa == 0.0) return {};
  if (kappa > 0.0 && space == Space::Beltrami) return {};
  return [space, kappa](const PhasePoint& x) {
    const double q2 = squared_norm(x.q);
    double m = std::numeric_limits<double>::infinity();
    if (kappa > 0.0 && space == Space::Poincare) m = std::min(m, 1.0 - kappa * q2);
    if (kappa < 0.0) m = std::min(m, 1.0 + kappa * q2);
    return m;
  };
}

inline double kinetic_value(Space space, double kappa, double mass, const SL2Args& j) {
  if (space == Space::Euclidean) return j.j_plus / (2.0 * mass);
  return curved_kinetic(space == Space::Poincare ? Chart::Poincare : Chart::Beltrami, kappa, mass, j);
}

inline SL2Partials kinetic_partials(Space space, double kappa, double mass, const SL2Args& j) {
  if (space == Space::Euclidean) return {0.0, 1.0 / (2.0 * mass), 0.0};
  return curved_kinetic_partials(space == Space::Poincare ? Chart::Poincare : Chart::Beltrami, kappa, mass, j);
}

// Radial argument fed to the potential profile: J- itself, or
// 4 J- / (1 - kappa J-)^2 in the Poincare chart.
struct RadialArg {
  double value;
  double derivative;
};

inline RadialArg radial_arg(Space space, double kappa, double jm) {
  if (space != Space::Poincare) return {jm, 1.0};
  const double d = 1.0 - kappa * jm;
  return {4.0 * jm / (d * d), 4.0 * (1.0 + kappa * jm) / (d * d * d)};
}

inline std::string spec_name(Family f, Space s) { return std::string(to_string(f)) + "/" + std::string(to_string(s)); }

// Kinetic term of `space` plus F(radial argument).
inline HamiltonianSpec natural_system(Family family, Space space, const SystemParams& prm, Profile potential) {
  const double kappa = chart_kappa(space, prm);
  const double m = prm.mass;
  HamiltonianSpec spec;
  spec.name = spec_name(family, space);
  spec.params = param_map(prm);
  spec.params["kappa"] = kappa;
  spec.realization = realization_from(prm);
  spec.eval = [space, kappa, m, potential](const SL2Args& j) {
    return kinetic_value(space, kappa, m, j) + potential.f(radial_arg(space, kappa, j.j_minus).value);
  };
  spec.partials = [space, kappa, m, potential](const SL2Args& j) {
    SL2Partials d = kinetic_partials(space, kappa, m, j);
    const RadialArg r = radial_arg(space, kappa, j.j_minus);
    d.d_minus += potential.df(r.value) * r.derivative;
    return d;
  };
  spec.boundary = chart_margin(space, kappa);
  return spec;
}

inline Profile oscillator_profile(double omega, double delta, const Vec& deltas) {
  const double w2 = omega * omega;
  return {[w2, delta, deltas](double s) {
            double v = w2 * s + delta * s * s;
            double sk = s * s;
            for (double dk : deltas) {
              v += dk * sk;
              sk *= s;
            }
            return v;
          },
          [w2, delta, deltas](double s) {
            double d = w2 + 2.0 * delta * s;
            double sk = s;
            for (std::size_t k = 0; k < deltas.size(); ++k) {
              d += static_cast<double>(k + 2) * deltas[k] * sk;
              sk *= s;
            }
            return d;
          },
          "oscillator"};
}

}  // namespace detail

/// H = T(space) + F(rho), rho = J- (Euclidean, Beltrami) or 4 J-/(1 - k J-)^2 (Poincare).
inline HamiltonianSpec make_evans(Space space, const SystemParams& prm, Profile potential) {
  return detail::natural_system(Family::Evans, space, prm, std::move(potential));
}

/// Isotropic oscillator (Higgs oscillator when curved) with N centrifugal barriers.
inline HamiltonianSpec make_sw(Space space, const SystemParams& prm) {
  return detail::natural_system(Family::SmorodinskyWinternitz, space, prm,
                                detail::oscillator_profile(prm.omega, 0.0, {}));
}

/// Oscillator plus quartic term delta rho^2.
inline HamiltonianSpec make_garnier(Space space, const SystemParams& prm) {
  return detail::natural_system(Family::Garnier, space, prm, detail::oscillator_profile(prm.omega, prm.delta, {}));
}

/// Oscillator plus sum_k delta_k rho^{k+1}, truncated at K = deltas.size().
inline HamiltonianSpec make_nonlinear_oscillator(Space space, const SystemParams& prm, const Vec& deltas) {
  return detail::natural_system(Family::NonlinearOscillator, space, prm,
                                detail::oscillator_profile(prm.omega, 0.0, deltas));
}

/// Coulomb potential -k J-^{-1/2} (Euclidean, Beltrami) or
/// -k (1 - kappa J-) / (2 sqrt(J-)) (Poincare), with N centrifugal barriers.
inline HamiltonianSpec make_kepler_coulomb(Space space, const SystemParams& prm) {
  const double kappa = detail::chart_kappa(space, prm);
  const double m = prm.mass;
  const double k = prm.coupling;
  HamiltonianSpec spec;
  spec.name = detail::spec_name(Family::KeplerCoulomb, space);
  spec.params = detail::param_map(prm);
  spec.params["kappa"] = kappa;
  spec.realization = detail::realization_from(prm);
  const bool poincare = space == Space::Poincare;
  spec.eval = [space, kappa, m, k, poincare](const SL2Args& j) {
    const double r = std::sqrt(j.j_minus);
    const double v = poincare ? -k * (1.0 - kappa * j.j_minus) / (2.0 * r) : -k / r;
    return detail::kinetic_value(space, kappa, m, j) + v;
  };
  spec.partials = [space, kappa, m, k, poincare](const SL2Args& j) {
    SL2Partials d = detail::kinetic_partials(space, kappa, m, j);
    const double r = std::sqrt(j.j_minus);
    const double r3 = j.j_minus * r;
    if (poincare)
      d.d_minus += 0.5 * k * (kappa / r + (1.0 - kappa * j.j_minus) / (2.0 * r3));
    else
      d.d_minus += 0.5 * k / r3;
    return d;
  };
  spec.boundary = detail::chart_margin(space, kappa);
  spec.margin = [](const PhasePoint& x) { return norm(x.q); };
  return spec;
}

/// H = J+/2m - (e/m) J3 G(J-) + e F(J-), Euclidean only.
inline HamiltonianSpec make_electromagnetic(const SystemParams& prm, Profile scalar, Profile vector) {
  const double m = prm.mass;
  const double e = prm.charge;
  HamiltonianSpec spec;
  spec.name = detail::spec_name(Family::Electromagnetic, Space::Euclidean);
  spec.params = detail::param_map(prm);
  spec.params["kappa"] = 0.0;
  spec.realization = detail::realization_from(prm);
  spec.eval = [m, e, scalar, vector](const SL2Args& j) {
    return j.j_plus / (2.0 * m) - (e / m) * j.j3 * vector.f(j.j_minus) + e * scalar.f(j.j_minus);
  };
  spec.partials = [m, e, scalar, vector](const SL2Args& j) {
    return SL2Partials{-(e / m) * j.j3 * vector.df(j.j_minus) + e * scalar.df(j.j_minus), 1.0 / (2.0 * m),
                       -(e / m) * vector.f(j.j_minus)};
  };
  return spec;
}

/// H = J+ / (2 M(J-)) + F(J-). The realization uses b = mass * b_tilde with
/// `prm.mass` as the reference mass.
inline HamiltonianSpec make_variable_mass(const SystemParams& prm, Profile mass_fn, Profile potential) {
  HamiltonianSpec spec;
  spec.name = detail::spec_name(Family::VariableMass, Space::Euclidean);
  spec.params = detail::param_map(prm);
  spec.params["kappa"] = 0.0;
  spec.realization = detail::realization_from(prm);
  spec.eval = [mass_fn, potential](const SL2Args& j) {
    const double mj = mass_fn.f(j.j_minus);
    if (!(mj > 0.0)) throw DomainError("variable mass: M(q^2) <= 0");
    return j.j_plus / (2.0 * mj) + potential.f(j.j_minus);
  };
  spec.partials = [mass_fn, potential](const SL2Args& j) {
    const double mj = mass_fn.f(j.j_minus);
    if (!(mj > 0.0)) throw DomainError("variable mass: M(q^2) <= 0");
    return SL2Partials{-j.j_plus * mass_fn.df(j.j_minus) / (2.0 * mj * mj) + potential.df(j.j_minus),
                       1.0 / (2.0 * mj), 0.0};
  };
  spec.margin = [mass_fn](const PhasePoint& x) { return mass_fn.f(squared_norm(x.q)); };
  return spec;
}

/// Potentials and fields of the N = 3 electromagnetic interpretation
/// H = (p - e A)^2 / 2m + e psi.
struct EmFields {
  Vec electric;
  Vec magnetic;
  double psi = 0.0;
  Vec vector_potential;
};

inline EmFields em_fields(const SystemParams& prm, const Profile& scalar, const Profile& vector,
                          std::span<const double> q) {
  if (q.size() != 3 || prm.b_tilde.size() != 3) throw DimensionMismatch("em_fields: defined for N = 3 only");
  const double m = prm.mass;
  const double e = prm.charge;
  const double q2 = squared_norm(q);
  const double g = vector.f(q2);
  const double dg = vector.df(q2);
  const double df = scalar.df(q2);

  EmFields out;
  out.psi = scalar.f(q2) - (e / (2.0 * m)) * q2 * g * g;
  out.electric.assign(3, 0.0);
  out.vector_potential.assign(3, 0.0);
  const double radial = (e / m) * g * g + (2.0 * e / m) * q2 * g * dg - 2.0 * df;
  for (std::size_t i = 0; i < 3; ++i) {
    out.vector_potential[i] = q[i] * g;
    out.electric[i] = radial * q[i];
    const double bi = prm.b_tilde[i];
    if (bi != 0.0) {
      if (e == 0.0) throw DomainError("em_fields: centrifugal terms need a nonzero charge");
      if (std::abs(q[i]) < kDomainGuard) throw DomainError("em_fields: q_i = 0 with nonzero b");
      out.psi += bi / (2.0 * e * q[i] * q[i]);
      out.electric[i] += bi / (e * q[i] * q[i] * q[i]);
    }
  }
  // curl of A from its Jacobian dA_i/dq_j = delta_ij G + 2 q_i q_j G'.
  auto jac = [&](std::size_t i, std::size_t j) { return (i == j ? g : 0.0) + 2.0 * q[i] * q[j] * dg; };
  out.magnetic = {jac(2, 1) - jac(1, 2), jac(0, 2) - jac(2, 0), jac(1, 0) - jac(0, 1)};
  return out;
}

/// A catalog member plus the extra integrals the caller asks for.
struct SystemDescriptor {
  Family family = Family::SmorodinskyWinternitz;
  Space space = Space::Euclidean;
  SystemParams params;
  std::vector<std::size_t> ms_flags;  // 1-based sites of extra integrals to include
  Profile potential = Profile::zero();       // F (Evans, electromagnetic, variable mass)
  Profile vector_profile = Profile::zero();  // G (electromagnetic)
  Profile mass_profile = Profile::polynomial({1.0});  // M (variable mass)

  std::size_t dimension() const { return params.dimension(); }
};

inline bool family_has_extra_integrals(Family f) {
  return f == Family::SmorodinskyWinternitz || f == Family::KeplerCoulomb;
}

/// Sites whose extra integral is valid: all sites for the oscillator, sites
/// with b_tilde_i = 0 for the Coulomb system, none otherwise.
inline std::vector<std::size_t> valid_extra_sites(const SystemDescriptor& d) {
  std::vector<std::size_t> out;
  if (d.family == Family::SmorodinskyWinternitz) {
    for (std::size_t i = 1; i <= d.dimension(); ++i) out.push_back(i);
  } else if (d.family == Family::KeplerCoulomb) {
    for (std::size_t i = 1; i <= d.dimension(); ++i)
      if (d.params.b_tilde[i - 1] == 0.0) out.push_back(i);
  }
  return out;
}

inline void validate(const SystemDescriptor& d) {
  const SystemParams& p = d.params;
  if (d.dimension() < 2) throw ConfigError("N must be at least 2");
  if (!(p.mass > 0.0)) throw ConfigError("mass must be positive");
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(p.b_tilde.begin(), p.b_tilde.end(), finite) || !finite(p.kappa) || !finite(p.omega) ||
      !finite(p.delta) || !finite(p.coupling) || !finite(p.charge))
    throw ConfigError("parameters must be finite");
  if ((d.family == Family::Electromagnetic || d.family == Family::VariableMass) && d.space != Space::Euclidean)
    throw ConfigError(std::string(to_string(d.family)) + " is defined on Euclidean space only");
  if (!d.ms_flags.empty() && !family_has_extra_integrals(d.family))
    throw ConfigError(std::string(to_string(d.family)) + " has no extra integrals; ms_flags must be empty");
  const auto valid = valid_extra_sites(d);
  for (std::size_t i : d.ms_flags) {
    if (i < 1 || i > d.dimension()) throw ConfigError("ms_flags index " + std::to_string(i) + " out of range");
    if (std::find(valid.begin(), valid.end(), i) == valid.end())
      throw ConfigError("extra integral L_" + std::to_string(i) + " requires b_tilde_" + std::to_string(i) +
                        " = 0 (at least one centrifugal term must vanish)");
  }
}

inline HamiltonianSpec make_system(const SystemDescriptor& d) {
  validate(d);
  switch (d.family) {
    case Family::Evans: return make_evans(d.space, d.params, d.potential);
    case Family::SmorodinskyWinternitz: return make_sw(d.space, d.params);
    case Family::Garnier: return make_garnier(d.space, d.params);
    case Family::NonlinearOscillator: return make_nonlinear_oscillator(d.space, d.params, d.params.deltas);
    case Family::KeplerCoulomb: return make_kepler_coulomb(d.space, d.params);
    case Family::Electromagnetic: return make_electromagnetic(d.params, d.potential, d.vector_profile);
    case Family::VariableMass: return make_variable_mass(d.params, d.mass_profile, d.potential);
  }
  throw ConfigError("unknown family");
}

/// Extra (non-universal) integral for one site of an oscillator or Coulomb system.
inline ConservedQuantity extra_integral(const SystemDescriptor& d, std::size_t site) {
  const SystemParams& p = d.params;
  if (d.family == Family::SmorodinskyWinternitz) {
    OscillatorParams op{p.mass, p.omega, p.b_tilde, p.kappa};
    if (d.space == Space::Euclidean) return sw_extra_integral(site, op);
    return curved_sw_extra_integral(site, op, d.space == Space::Poincare ? Chart::Poincare : Chart::Beltrami);
  }
  if (d.family == Family::KeplerCoulomb) {
    CoulombParams cp{p.mass, p.coupling, p.b_tilde, p.kappa};
    if (d.space == Space::Euclidean) return kc_extra_integral(site, cp);
    return curved_kc_extra_integral(site, cp, d.space == Space::Poincare ? Chart::Poincare : Chart::Beltrami);
  }
  throw ConfigError(std::string(to_string(d.family)) + " has no extra integrals");
}

inline std::vector<ConservedQuantity> extra_integrals(const SystemDescriptor& d) {
  validate(d);
  std::vector<ConservedQuantity> out;
  for (std::size_t i : d.ms_flags) out.push_back(extra_integral(d, i));
  return out;
}

/// Canonical one-line text form, stable across runs.
inline std::string to_string(const SystemDescriptor& d) {
  std::ostringstream os;
  os.precision(17);
  auto list = [&os](const auto& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ']';
  };
  const SystemParams& p = d.params;
  os << "family=" << to_string(d.family) << " space=" << to_string(d.space) << " N=" << d.dimension()
     << " mass=" << p.mass << " kappa=" << p.kappa;
  switch (d.family) {
    case Family::SmorodinskyWinternitz: os << " omega=" << p.omega; break;
    case Family::Garnier: os << " omega=" << p.omega << " delta=" << p.delta; break;
    case Family::NonlinearOscillator:
      os << " omega=" << p.omega << " deltas=";
      list(p.deltas);
      break;
    case Family::KeplerCoulomb: os << " k=" << p.coupling; break;
    case Family::Evans: os << " F=\"" << d.potential.description << '"'; break;
    case Family::Electromagnetic:
      os << " e=" << p.charge << " F=\"" << d.potential.description << "\" G=\"" << d.vector_profile.description
         << '"';
      break;
    case Family::VariableMass:
      os << " M=\"" << d.mass_profile.description << "\" F=\"" << d.potential.description << '"';
      break;
  }
  os << " b_tilde=";
  list(p.b_tilde);
  os << " ms_flags=";
  list(d.ms_flags);
  return os.str();
}

/// Static description of one family, used by the `catalog` command.
struct FamilyInfo {
  Family family;
  std::string title;
  std::string hamiltonian;
  std::string parameters;
  std::string spaces;
  std::string superintegrability;
  std::string extra_integrals;
};

inline std::vector<FamilyInfo> catalog_entries() {
  return {
      {Family::Evans, "Evans system", "H = T + F(rho) + centrifugal terms", "mass, F (profile), b_tilde",
       "euclidean, poincare, beltrami", "QMS (2N-3 universal integrals)", "none"},
      {Family::SmorodinskyWinternitz, "Smorodinsky-Winternitz system (Higgs oscillator when curved)",
       "H = T + omega^2 rho + centrifugal terms", "mass, omega, b_tilde", "euclidean, poincare, beltrami",
       "MS for any b_tilde", "N extra integrals I_i, i = 1..N (IP_i / IB_i when curved)"},
      {Family::Garnier, "Garnier-type quartic oscillator", "H = T + omega^2 rho + delta rho^2 + centrifugal terms",
       "mass, omega, delta, b_tilde", "euclidean, poincare, beltrami", "QMS", "none"},
      {Family::NonlinearOscillator, "even-order nonlinear oscillators",
       "H = T + omega^2 rho + sum_k delta_k rho^(k+1) + centrifugal terms", "mass, omega, deltas (truncated), b_tilde",
       "euclidean, poincare, beltrami", "QMS for any choice of delta_k", "none"},
      {Family::KeplerCoulomb, "generalized Kepler-Coulomb system", "H = T - k / r + centrifugal terms",
       "mass, k, b_tilde", "euclidean, poincare, beltrami",
       "MS condition: at least one b_tilde_i = 0 (QMS otherwise)",
       "L_i (Laplace-Runge-Lenz components) for each i with b_tilde_i = 0 (LP_i / LB_i when curved)"},
      {Family::Electromagnetic, "stationary electromagnetic field",
       "H = J+/2m - (e/m) J3 G(J-) + e F(J-); for N = 3, (p - eA)^2/2m + e psi with A = q G(q^2), H-field = 0",
       "mass, e, F, G (profiles), b_tilde", "euclidean", "QMS", "none"},
      {Family::VariableMass, "coordinate-dependent mass", "H = J+ / (2 M(J-)) + F(J-)",
       "mass (reference for b_tilde), M, F (profiles), b_tilde", "euclidean", "QMS", "none"},
  };
}

}  // namespace qms

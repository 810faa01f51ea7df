#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qms/core.hpp"
#include "qms/integrals.hpp"
#include "qms/linalg.hpp"
#include "qms/parallel.hpp"

namespace qms {

/// Canonical bracket {F, G} = sum_i dF/dq_i dG/dp_i - dG/dq_i dF/dp_i from
/// precomputed gradients. Swapping the arguments negates the result exactly.
inline double poisson_bracket(const PhaseGradient& f, const PhaseGradient& g) {
  if (f.dq.size() != g.dq.size()) throw DimensionMismatch("poisson_bracket: gradient sizes differ");
  return dot(f.dq, g.dp) - dot(g.dq, f.dp);
}

inline double poisson_bracket(const ConservedQuantity& f, const ConservedQuantity& g, const PhasePoint& x) {
  return poisson_bracket(f.gradient(x), g.gradient(x));
}

/// Residual divided by the gradient scale 1 + |grad F| |grad G|.
inline double normalized_residual(double bracket, const PhaseGradient& f, const PhaseGradient& g) {
  return std::abs(bracket) / (1.0 + f.norm() * g.norm());
}

/// The bracket as an observable, with the gradient of {F, G} taken by central
/// differences of the analytic bracket. Only used for Jacobi-identity checks.
inline ConservedQuantity bracket_quantity(const ConservedQuantity& f, const ConservedQuantity& g,
                                          double rel_step = 1e-5) {
  auto value = [f, g](const PhasePoint& x) { return poisson_bracket(f, g, x); };
  auto gradient = [value, rel_step](const PhasePoint& x) {
    const std::size_t n = x.dimension();
    PhaseGradient out{Vec(n), Vec(n)};
    for (int block = 0; block < 2; ++block) {
      for (std::size_t i = 0; i < n; ++i) {
        PhasePoint hi = x, lo = x;
        double& a = block == 0 ? hi.q[i] : hi.p[i];
        double& b = block == 0 ? lo.q[i] : lo.p[i];
        const double h = rel_step * std::max(1.0, std::abs(a));
        a += h;
        b -= h;
        (block == 0 ? out.dq : out.dp)[i] = (value(hi) - value(lo)) / (2.0 * h);
      }
    }
    return out;
  };
  return {"{" + f.name + "," + g.name + "}", value, gradient};
}

/// Box used to draw regular phase points: |q_i| in [q_min, q_max] with a
/// random sign, p_i in [-p_max, p_max]. Positions are multiplied by
/// `position_scale`; when unset it is derived from the curvature so that
/// |kappa| q^2 <= 0.64 (keeps curved charts away from their boundaries).
struct SamplingOptions {
  std::uint64_t seed = 20240601;
  double q_min = 0.2;
  double q_max = 1.5;
  double p_max = 1.5;
  std::optional<double> position_scale;
  double min_margin = 1e-3;
  int max_draws = 1000;
};

inline double auto_position_scale(const SamplingOptions& opt, std::size_t n, double kappa) {
  if (opt.position_scale) return *opt.position_scale;
  if (kappa == 0.0) return 1.0;
  return std::min(1.0, 0.8 / (opt.q_max * std::sqrt(static_cast<double>(n) * std::abs(kappa))));
}

/// Deterministic stream of regular phase points.
class PhaseSampler {
 public:
  PhaseSampler(std::size_t n, SamplingOptions opt, std::function<bool(const PhasePoint&)> regular, double scale = 1.0)
      : n_(n), opt_(opt), regular_(std::move(regular)), scale_(scale), rng_(opt.seed) {}

  PhasePoint next() {
    for (int draw = 0; draw < opt_.max_draws; ++draw) {
      PhasePoint x = raw();
      if (!regular_ || regular_(x)) return x;
    }
    throw SamplingError("no regular sample point found in " + std::to_string(opt_.max_draws) + " draws");
  }

  std::vector<PhasePoint> draw(std::size_t count) {
    std::vector<PhasePoint> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(next());
    return out;
  }

 private:
  PhasePoint raw() {
    std::uniform_real_distribution<double> mag(opt_.q_min, opt_.q_max);
    std::uniform_real_distribution<double> mom(-opt_.p_max, opt_.p_max);
    std::bernoulli_distribution sign(0.5);
    PhasePoint x{Vec(n_), Vec(n_)};
    for (std::size_t i = 0; i < n_; ++i) {
      const double a = mag(rng_) * scale_;
      x.q[i] = sign(rng_) ? a : -a;
      x.p[i] = mom(rng_);
    }
    return x;
  }

  std::size_t n_;
  SamplingOptions opt_;
  std::function<bool(const PhasePoint&)> regular_;
  double scale_;
  std::mt19937_64 rng_;
};

namespace detail {

inline bool gradients_regular(const std::vector<ConservedQuantity>& fs, const PhasePoint& x) {
  try {
    for (const auto& f : fs) {
      const PhaseGradient g = f.gradient(x);
      auto finite = [](double v) { return std::isfinite(v); };
      if (!std::all_of(g.dq.begin(), g.dq.end(), finite) || !std::all_of(g.dp.begin(), g.dp.end(), finite))
        return false;
    }
  } catch (const DomainError&) {
    return false;
  }
  return true;
}

}  // namespace detail

/// Regularity predicate for sampling around a Hamiltonian and a set of observables.
inline std::function<bool(const PhasePoint&)> regular_for(const HamiltonianSpec& spec,
                                                          std::vector<ConservedQuantity> quantities,
                                                          double min_margin) {
  quantities.push_back(as_quantity(spec));
  return [spec, quantities = std::move(quantities), min_margin](const PhasePoint& x) {
    return singular_margin(spec, x) >= min_margin && detail::gradients_regular(quantities, x);
  };
}

/// Points drawn for checks on `spec` (curvature-aware scale).
inline std::vector<PhasePoint> sample_points_for(const HamiltonianSpec& spec,
                                                 const std::vector<ConservedQuantity>& quantities, std::size_t count,
                                                 const SamplingOptions& opt) {
  const double scale = auto_position_scale(opt, spec.dimension(), spec.param("kappa"));
  PhaseSampler sampler(spec.dimension(), opt, regular_for(spec, quantities, opt.min_margin), scale);
  return sampler.draw(count);
}

struct BracketEntry {
  std::string family;  // "left", "right" or a caller label
  std::string a;
  std::string b;
  double max_raw = 0.0;
  double max_normalized = 0.0;
};

struct BracketResidualTable {
  std::vector<BracketEntry> pairs;
  std::size_t samples = 0;
  double tolerance = 1e-9;
  std::vector<PhasePoint> points;

  bool passed() const {
    return std::all_of(pairs.begin(), pairs.end(), [&](const BracketEntry& e) { return e.max_normalized < tolerance; });
  }

  double worst_normalized() const {
    double w = 0.0;
    for (const auto& e : pairs) w = std::max(w, e.max_normalized);
    return w;
  }
};

struct VerifyOptions {
  SamplingOptions sampling;
  double tolerance = 1e-9;
  unsigned threads = 1;
};

/// Max raw and normalized |{F, G}| over `points`.
inline BracketEntry bracket_residual(const ConservedQuantity& f, const ConservedQuantity& g,
                                     const std::vector<PhasePoint>& points, std::string family = {},
                                     unsigned threads = 1) {
  std::vector<double> raw(points.size()), nrm(points.size());
  parallel_for(points.size(), threads, [&](std::size_t k) {
    const PhaseGradient gf = f.gradient(points[k]);
    const PhaseGradient gg = g.gradient(points[k]);
    const double b = poisson_bracket(gf, gg);
    raw[k] = std::abs(b);
    nrm[k] = normalized_residual(b, gf, gg);
  });
  BracketEntry e{std::move(family), f.name, g.name, 0.0, 0.0};
  for (std::size_t k = 0; k < points.size(); ++k) {
    e.max_raw = std::max(e.max_raw, raw[k]);
    e.max_normalized = std::max(e.max_normalized, nrm[k]);
  }
  return e;
}

/// Brackets of H with every universal integral and within each of the two
/// involutive families {C^(m)} and {C_(m)}, at the given points. Cross-family
/// pairs are not listed.
inline BracketResidualTable involution_table_at(const HamiltonianSpec& spec, const IntegralSet& set,
                                                std::vector<PhasePoint> points, const VerifyOptions& opt = {}) {
  if (points.empty()) throw RangeError("involution_table: need at least one sample point");
  if (set.dimension() != spec.dimension()) throw DimensionMismatch("involution_table: dimension mismatch");

  BracketResidualTable table;
  table.samples = points.size();
  table.tolerance = opt.tolerance;
  table.points = std::move(points);

  const ConservedQuantity h = as_quantity(spec);
  const auto left = set.left;
  const auto right = set.right_family();

  for (const auto& c : left) table.pairs.push_back(bracket_residual(h, c, table.points, "left", opt.threads));
  for (std::size_t a = 0; a < left.size(); ++a)
    for (std::size_t b = a + 1; b < left.size(); ++b)
      table.pairs.push_back(bracket_residual(left[a], left[b], table.points, "left", opt.threads));

  // right.back() is C_(N) == C^(N): its bracket with H is already listed.
  for (std::size_t a = 0; a + 1 < right.size(); ++a)
    table.pairs.push_back(bracket_residual(h, right[a], table.points, "right", opt.threads));
  for (std::size_t a = 0; a < right.size(); ++a)
    for (std::size_t b = a + 1; b < right.size(); ++b)
      table.pairs.push_back(bracket_residual(right[a], right[b], table.points, "right", opt.threads));
  return table;
}

/// Same table at `sample_points` regular points drawn for `spec`.
inline BracketResidualTable involution_table(const HamiltonianSpec& spec, const IntegralSet& set,
                                             std::size_t sample_points, const VerifyOptions& opt = {}) {
  if (sample_points < 1) throw RangeError("involution_table: need at least one sample point");
  if (set.dimension() != spec.dimension()) throw DimensionMismatch("involution_table: dimension mismatch");
  return involution_table_at(spec, set, sample_points_for(spec, set.all(), sample_points, opt.sampling), opt);
}

struct IndependenceCertificate {
  std::vector<std::string> functions;
  std::size_t num_points = 0;
  std::vector<Vec> singular_values;  // per point, descending
  std::vector<std::size_t> ranks;    // per point
  std::size_t numerical_rank = 0;    // max over points
  double rank_tolerance = 1e-8;
  std::vector<PhasePoint> points;

  bool passed() const { return numerical_rank == functions.size(); }
};

/// Numerical rank of the stacked gradients at one point. Rows are scaled to
/// unit length first; a zero row stays zero.
inline Vec gradient_singular_values(const std::vector<ConservedQuantity>& functions, const PhasePoint& x) {
  const std::size_t n = x.dimension();
  Matrix a(functions.size(), 2 * n);
  for (std::size_t r = 0; r < functions.size(); ++r) {
    const PhaseGradient g = functions[r].gradient(x);
    if (g.dq.size() != n || g.dp.size() != n)
      throw DimensionMismatch("independence_rank: " + functions[r].name + " has a different dimension");
    auto row = a.row(r);
    std::copy(g.dq.begin(), g.dq.end(), row.begin());
    std::copy(g.dp.begin(), g.dp.end(), row.begin() + static_cast<std::ptrdiff_t>(n));
    const double len = norm(row);
    if (len > 0.0)
      for (double& v : row) v /= len;
  }
  return singular_values(a);
}

/// Rank certificate at explicitly given points.
inline IndependenceCertificate independence_rank_at(const std::vector<ConservedQuantity>& functions,
                                                    std::vector<PhasePoint> points, double rank_tol = 1e-8,
                                                    unsigned threads = 1) {
  IndependenceCertificate cert;
  for (const auto& f : functions) cert.functions.push_back(f.name);
  cert.num_points = points.size();
  cert.rank_tolerance = rank_tol;
  cert.singular_values.resize(points.size());
  cert.ranks.resize(points.size());
  parallel_for(points.size(), threads, [&](std::size_t k) {
    cert.singular_values[k] = gradient_singular_values(functions, points[k]);
    cert.ranks[k] = numerical_rank(cert.singular_values[k], rank_tol);
  });
  for (std::size_t r : cert.ranks) cert.numerical_rank = std::max(cert.numerical_rank, r);
  cert.points = std::move(points);
  return cert;
}

/// Generic-point functional independence over `num_points` regular samples in
/// 2n-dimensional phase space.
inline IndependenceCertificate independence_rank(const std::vector<ConservedQuantity>& functions, std::size_t n,
                                                 std::size_t num_points, const SamplingOptions& opt = {},
                                                 double rank_tol = 1e-8, unsigned threads = 1) {
  if (num_points < 1) throw RangeError("independence_rank: need at least one sample point");
  PhaseSampler sampler(n, opt, [&functions](const PhasePoint& x) { return detail::gradients_regular(functions, x); },
                       opt.position_scale.value_or(1.0));
  return independence_rank_at(functions, sampler.draw(num_points), rank_tol, threads);
}

/// Same, sampling around a Hamiltonian (curvature-aware scale, singularity margin).
inline IndependenceCertificate independence_rank(const HamiltonianSpec& spec,
                                                 const std::vector<ConservedQuantity>& functions,
                                                 std::size_t num_points, const SamplingOptions& opt = {},
                                                 double rank_tol = 1e-8, unsigned threads = 1) {
  if (num_points < 1) throw RangeError("independence_rank: need at least one sample point");
  return independence_rank_at(functions, sample_points_for(spec, functions, num_points, opt), rank_tol, threads);
}

/// Standard label for a system with the given number of independent integrals
/// (H included) in N degrees of freedom.
inline std::string superintegrability_label(std::size_t n, std::size_t independent_functions) {
  if (independent_functions >= 2 * n - 1) return "maximally superintegrable";
  if (independent_functions < 2 * n - 2) return "not certified";
  if (n == 2) return "integrable";
  if (n == 3) return "minimally (weak) superintegrable";
  return "quasi-maximally superintegrable";
}

}  // namespace qms

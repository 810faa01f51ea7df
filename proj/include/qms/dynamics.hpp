#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qms/core.hpp"
#include "qms/errors.hpp"
#include "qms/linalg.hpp"

namespace qms {

enum class Method { GaussLegendre2, RK4 };

inline std::string_view to_string(Method m) { return m == Method::GaussLegendre2 ? "gl2" : "rk4"; }

inline Method parse_method(std::string_view s) {
  if (s == "gl2" || s == "gauss_legendre2") return Method::GaussLegendre2;
  if (s == "rk4") return Method::RK4;
  throw ConfigError("unknown integration method '" + std::string(s) + "'");
}

struct IntegratorConfig {
  Method method = Method::GaussLegendre2;
  double step = 1e-3;
  double fixed_point_tol = 1e-13;
  int max_fixed_point_iters = 100;
  double guard_radius = 1e-6;     // distance to a guarded singularity that halts integration
  std::size_t record_every = 1;   // keep every k-th state (the last state is always kept)
};

/// The trajectory came within the guard radius of a singularity.
class SingularApproach : public Error {
 public:
  SingularApproach(const std::string& what, PhasePoint last_safe, double time)
      : Error(what), last_safe_(std::move(last_safe)), time_(time) {}

  const PhasePoint& last_safe() const { return last_safe_; }
  double time() const { return time_; }

 private:
  PhasePoint last_safe_;
  double time_;
};

/// The trajectory reached the edge of the coordinate chart (on the sphere,
/// the equator of the working hemisphere).
class ChartBoundary : public SingularApproach {
 public:
  using SingularApproach::SingularApproach;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePoint> states;
  std::vector<std::string> monitor_names;
  std::vector<Vec> monitor_values;  // per recorded state
  Vec initial_values;
  Vec drift;                        // max |F(t) - F(0)| / (1 + |F(0)|) over every step
  double step = 0.0;                // step actually used (t_final / steps)
  std::size_t steps = 0;
};

namespace detail {

inline Vec pack(const PhasePoint& x) {
  Vec v(x.q);
  v.insert(v.end(), x.p.begin(), x.p.end());
  return v;
}

inline PhasePoint unpack(const Vec& v) {
  const std::size_t n = v.size() / 2;
  return {Vec(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)),
          Vec(v.begin() + static_cast<std::ptrdiff_t>(n), v.end())};
}

// (dH/dp, -dH/dq)
inline Vec hamilton_field(const HamiltonianSpec& spec, const Vec& y) {
  const PhaseGradient g = hamiltonian_gradient(spec, unpack(y));
  const std::size_t n = g.dq.size();
  Vec f(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = g.dp[i];
    f[n + i] = -g.dq[i];
  }
  return f;
}

class Stepper {
 public:
  Stepper(const HamiltonianSpec& spec, const IntegratorConfig& cfg) : spec_(spec), cfg_(cfg) {}

  Vec step(const Vec& y, double h) {
    h_ = h;
    return cfg_.method == Method::GaussLegendre2 ? gauss_legendre(y) : rk4(y);
  }

  // Drops the stage seeds after a failed step.
  void reset() {
    k1_.clear();
    k2_.clear();
  }

 private:
  Vec rk4(const Vec& y) {
    const std::size_t d = y.size();
    auto axpy = [&](const Vec& k, double c) {
      Vec out(d);
      for (std::size_t i = 0; i < d; ++i) out[i] = y[i] + c * k[i];
      return out;
    };
    const Vec k1 = hamilton_field(spec_, y);
    const Vec k2 = hamilton_field(spec_, axpy(k1, 0.5 * h_));
    const Vec k3 = hamilton_field(spec_, axpy(k2, 0.5 * h_));
    const Vec k4 = hamilton_field(spec_, axpy(k3, h_));
    Vec out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = y[i] + h_ / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
  }

  // Two-stage Gauss-Legendre collocation (order 4, symplectic), solved by
  // fixed-point iteration seeded with the previous step's stages.
  Vec gauss_legendre(const Vec& y) {
    static const double r = std::sqrt(3.0) / 6.0;
    static const double a11 = 0.25, a12 = 0.25 - r, a21 = 0.25 + r, a22 = 0.25;
    const std::size_t d = y.size();
    if (k1_.size() != d) {
      k1_ = hamilton_field(spec_, y);
      k2_ = k1_;
    }
    double scale = 1.0;
    for (double v : y) scale = std::max(scale, std::abs(v));

    Vec y1(d), y2(d);
    bool converged = false;
    for (int it = 0; it < cfg_.max_fixed_point_iters; ++it) {
      for (std::size_t i = 0; i < d; ++i) {
        y1[i] = y[i] + h_ * (a11 * k1_[i] + a12 * k2_[i]);
        y2[i] = y[i] + h_ * (a21 * k1_[i] + a22 * k2_[i]);
      }
      Vec n1 = hamilton_field(spec_, y1);
      Vec n2 = hamilton_field(spec_, y2);
      double change = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        change = std::max({change, std::abs(n1[i] - k1_[i]), std::abs(n2[i] - k2_[i])});
      k1_ = std::move(n1);
      k2_ = std::move(n2);
      if (h_ * change <= cfg_.fixed_point_tol * scale) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NonConvergence("Gauss-Legendre stage iteration did not converge in " +
                           std::to_string(cfg_.max_fixed_point_iters) + " iterations");
    Vec out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = y[i] + 0.5 * h_ * (k1_[i] + k2_[i]);
    return out;
  }

  const HamiltonianSpec& spec_;
  const IntegratorConfig& cfg_;
  double h_ = 0.0;
  Vec k1_, k2_;
};

inline constexpr int kMaxBisections = 30;
inline constexpr int kMaxSubsteps = 4096;

// One step of size h from y at time t. A failed stage solve, a singular stage
// point or a non-finite result bisects the step, so a trajectory running into
// a singularity is followed until it enters the guard radius. `budget` caps
// the substeps spent on one outer step.
inline Vec advance(Stepper& stepper, const HamiltonianSpec& spec, const IntegratorConfig& cfg, const Vec& y,
                   double h, double t, int& budget, int depth = 0) {
  if (--budget < 0) throw NonConvergence("step could not be completed within the bisection budget");
  Vec next;
  std::string failure;
  bool singular = false;
  try {
    next = stepper.step(y, h);
    if (!std::all_of(next.begin(), next.end(), [](double v) { return std::isfinite(v); })) {
      failure = "integration produced a non-finite state";
      singular = true;
    }
  } catch (const DomainError& e) {
    failure = std::string("integration reached a singular stage point: ") + e.what();
    singular = true;
  } catch (const NonConvergence& e) {
    failure = e.what();
  }
  if (failure.empty()) {
    const PhasePoint x = unpack(next);
    if (boundary_margin(spec, x) < cfg.guard_radius)
      throw ChartBoundary("trajectory reached the chart boundary", unpack(y), t);
    if (singular_margin(spec, x) < cfg.guard_radius)
      throw SingularApproach("trajectory approached a singularity", unpack(y), t);
    return next;
  }
  stepper.reset();
  if (depth >= kMaxBisections) {
    if (singular) throw SingularApproach(failure, unpack(y), t);
    throw NonConvergence(failure);
  }
  const Vec mid = advance(stepper, spec, cfg, y, 0.5 * h, t, budget, depth + 1);
  return advance(stepper, spec, cfg, mid, 0.5 * h, t + 0.5 * h, budget, depth + 1);
}

}  // namespace detail

/// Integrates Hamilton's equations q' = dH/dp, p' = -dH/dq from x0 over
/// [0, t_final] with ceil(t_final / step) equal steps.
inline Trajectory integrate(const HamiltonianSpec& spec, const PhasePoint& x0, double t_final,
                            const IntegratorConfig& cfg, const std::vector<ConservedQuantity>& monitors = {}) {
  if (!(cfg.step > 0.0) || !(cfg.fixed_point_tol > 0.0) || cfg.max_fixed_point_iters < 1)
    throw ConfigError("integrate: step and tolerances must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw RangeError("integrate: t_final must be finite and >= 0");
  if (x0.dimension() != spec.dimension()) throw DimensionMismatch("integrate: state and Hamiltonian differ in N");
  if (singular_margin(spec, x0) < cfg.guard_radius)
    throw DomainError("integrate: initial state is within the guard radius of a singularity");
  const std::size_t record_every = std::max<std::size_t>(1, cfg.record_every);

  Trajectory traj;
  for (const auto& m : monitors) traj.monitor_names.push_back(m.name);
  auto evaluate_monitors = [&](const PhasePoint& x) {
    Vec v(monitors.size());
    for (std::size_t k = 0; k < monitors.size(); ++k) v[k] = monitors[k].value(x);
    return v;
  };

  traj.initial_values = evaluate_monitors(x0);
  traj.drift.assign(monitors.size(), 0.0);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  traj.monitor_values.push_back(traj.initial_values);

  const auto steps = static_cast<std::size_t>(std::ceil(t_final / cfg.step - 1e-12));
  traj.steps = steps;
  if (steps == 0) return traj;
  const double h = t_final / static_cast<double>(steps);
  traj.step = h;

  detail::Stepper stepper(spec, cfg);
  Vec y = detail::pack(x0);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = h * static_cast<double>(k);
    int budget = detail::kMaxSubsteps;
    Vec next = detail::advance(stepper, spec, cfg, y, h, t - h, budget);
    PhasePoint x = detail::unpack(next);

    const Vec values = evaluate_monitors(x);
    for (std::size_t m = 0; m < values.size(); ++m) {
      const double f0 = traj.initial_values[m];
      traj.drift[m] = std::max(traj.drift[m], std::abs(values[m] - f0) / (1.0 + std::abs(f0)));
    }
    if (k % record_every == 0 || k == steps) {
      traj.times.push_back(t);
      traj.states.push_back(x);
      traj.monitor_values.push_back(values);
    }
    y = std::move(next);
  }
  return traj;
}

/// -H: its flow is the time-reversed flow of H.
inline HamiltonianSpec time_reversed(HamiltonianSpec spec) {
  auto eval = spec.eval;
  auto partials = spec.partials;
  spec.name = spec.name + "/reversed";
  spec.eval = [eval](const SL2Args& j) { return -eval(j); };
  spec.partials = [partials](const SL2Args& j) {
    const SL2Partials d = partials(j);
    return SL2Partials{-d.d_minus, -d.d_plus, -d.d_3};
  };
  return spec;
}

struct ClosureReport {
  std::optional<double> period_estimate;
  double closure_distance = 0.0;
  bool is_closed = false;
  std::size_t candidates = 0;  // local minima examined
};

namespace detail {

inline double phase_distance(const PhasePoint& a, const PhasePoint& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.q.size(); ++i) {
    s += (a.q[i] - b.q[i]) * (a.q[i] - b.q[i]);
    s += (a.p[i] - b.p[i]) * (a.p[i] - b.p[i]);
  }
  return std::sqrt(s);
}

// Minimizes |x(t) - x0| near sample k using a degree-6 Lagrange interpolant
// of the recorded states and golden-section search on [t_{k-1}, t_{k+1}].
inline std::pair<double, double> refine_minimum(const Trajectory& traj, std::size_t k) {
  const std::size_t count = traj.states.size();
  constexpr std::size_t width = 7;
  if (count < width) return {traj.times[k], phase_distance(traj.states[k], traj.states.front())};
  std::size_t lo = k >= 3 ? k - 3 : 0;
  lo = std::min(lo, count - width);

  const PhasePoint& x0 = traj.states.front();
  const std::size_t n = x0.dimension();
  auto distance_at = [&](double t) {
    Vec weights(width, 1.0);
    for (std::size_t a = 0; a < width; ++a)
      for (std::size_t b = 0; b < width; ++b)
        if (a != b) weights[a] *= (t - traj.times[lo + b]) / (traj.times[lo + a] - traj.times[lo + b]);
    double s = 0.0;
    for (std::size_t i = 0; i < 2 * n; ++i) {
      double v = 0.0;
      for (std::size_t a = 0; a < width; ++a) {
        const PhasePoint& st = traj.states[lo + a];
        v += weights[a] * (i < n ? st.q[i] : st.p[i - n]);
      }
      const double ref = i < n ? x0.q[i] : x0.p[i - n];
      s += (v - ref) * (v - ref);
    }
    return std::sqrt(s);
  };

  double a = traj.times[k > 0 ? k - 1 : k];
  double b = traj.times[std::min(k + 1, count - 1)];
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = distance_at(c), fd = distance_at(d);
  for (int it = 0; it < 100 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = distance_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = distance_at(d);
    }
  }
  const double t = 0.5 * (a + b);
  const double best = std::min({distance_at(t), phase_distance(traj.states[k], x0)});
  return {t, best};
}

}  // namespace detail

/// Looks for returns of the trajectory to its initial state.
///
/// The orbit first has to leave the initial state (distance above half of the
/// maximum distance reached). Every later local minimum of the phase-space
/// distance below that level is a return candidate and is refined by
/// interpolation. closure_distance is the smallest refined distance; the
/// period estimate is the time of the first candidate within `tol`.
inline ClosureReport detect_closure(const Trajectory& traj, double tol) {
  const std::size_t count = traj.states.size();
  if (count < 3) throw InsufficientData("detect_closure: trajectory has fewer than 3 states");
  const PhasePoint& x0 = traj.states.front();
  Vec dist(count);
  for (std::size_t k = 0; k < count; ++k) dist[k] = detail::phase_distance(traj.states[k], x0);
  const double dmax = *std::max_element(dist.begin(), dist.end());
  if (dmax == 0.0) throw InsufficientData("detect_closure: trajectory never leaves its initial state");
  const double level = 0.5 * dmax;

  std::size_t k = 0;
  while (k < count && dist[k] <= level) ++k;
  if (k == count) throw InsufficientData("detect_closure: no excursion found");

  ClosureReport report;
  report.closure_distance = std::numeric_limits<double>::infinity();
  for (++k; k + 1 < count; ++k) {
    if (dist[k] >= level || dist[k] > dist[k - 1] || dist[k] > dist[k + 1]) continue;
    const auto [t, d] = detail::refine_minimum(traj, k);
    ++report.candidates;
    if (d < report.closure_distance) report.closure_distance = d;
    if (!report.period_estimate && d < tol) report.period_estimate = t;
  }
  if (report.candidates == 0) throw InsufficientData("detect_closure: no return candidate after the excursion");
  report.is_closed = report.closure_distance < tol;
  return report;
}

}  // namespace qms

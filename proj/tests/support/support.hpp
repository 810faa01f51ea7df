#pragma once

// Test-side oracles and generators. Nothing here calls into the gradient code
// under test: derivatives come from central differences of value functions.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qms/core.hpp"

namespace qms::testing {

/// Central-difference gradient of a scalar phase-space function.
template <typename F>
PhaseGradient fd_gradient(F&& f, const PhasePoint& x, double rel_step = 1e-6) {
  const std::size_t n = x.dimension();
  PhaseGradient g{Vec(n), Vec(n)};
  auto diff = [&](Vec PhasePoint::*field, std::size_t i) {
    PhasePoint lo = x, hi = x;
    const double h = rel_step * std::max(1.0, std::abs((x.*field)[i]));
    (hi.*field)[i] += h;
    (lo.*field)[i] -= h;
    return (f(hi) - f(lo)) / (2.0 * h);
  };
  for (std::size_t i = 0; i < n; ++i) {
    g.dq[i] = diff(&PhasePoint::q, i);
    g.dp[i] = diff(&PhasePoint::p, i);
  }
  return g;
}

/// Largest |a - b| / (1 + |b|) over all components.
inline double gradient_error(const PhaseGradient& a, const PhaseGradient& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.dq.size(); ++i) {
    e = std::max(e, std::abs(a.dq[i] - b.dq[i]) / (1.0 + std::abs(b.dq[i])));
    e = std::max(e, std::abs(a.dp[i] - b.dp[i]) / (1.0 + std::abs(b.dp[i])));
  }
  return e;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

/// Small seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return std::bernoulli_distribution(0.5)(rng_); }

  /// |value| in [lo, hi] with a random sign.
  double magnitude(double lo, double hi) {
    const double v = uniform(lo, hi);
    return coin() ? v : -v;
  }

  Vec vec(std::size_t n, double lo, double hi) {
    Vec v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  /// Phase point with |q_i| in [q_lo, q_hi] and p_i in [-p_max, p_max].
  PhasePoint phase_point(std::size_t n, double q_lo = 0.2, double q_hi = 1.2, double p_max = 1.5) {
    PhasePoint x{Vec(n), Vec(n)};
    for (std::size_t i = 0; i < n; ++i) {
      x.q[i] = magnitude(q_lo, q_hi);
      x.p[i] = uniform(-p_max, p_max);
    }
    return x;
  }

  /// Barrier strengths, each zero with probability 1/4.
  Vec barriers(std::size_t n, double hi = 1.0) {
    Vec b(n);
    for (double& x : b) x = integer(0, 3) == 0 ? 0.0 : uniform(0.05, hi);
    return b;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace qms::testing

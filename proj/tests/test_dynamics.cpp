#include <gtest/gtest.h>

#include <numbers>

#include "qms/catalog.hpp"
#include "qms/dynamics.hpp"
#include "qms/integrals.hpp"
#include "support/support.hpp"

namespace {

using namespace qms;

SystemParams params(Vec b, double omega = 1.0, double kappa = 0.0) {
  SystemParams p;
  p.omega = omega;
  p.kappa = kappa;
  p.b_tilde = std::move(b);
  return p;
}

IntegratorConfig gl2(double step = 1e-3) {
  IntegratorConfig c;
  c.step = step;
  return c;
}

std::vector<ConservedQuantity> universal_monitors(const HamiltonianSpec& h) {
  std::vector<ConservedQuantity> m{as_quantity(h)};
  for (const auto& c : universal_integrals(h.realization).all()) m.push_back(c);
  return m;
}

double max_of(const Vec& v) { return *std::max_element(v.begin(), v.end()); }

TEST(Integrate, FreeParticleMovesInStraightLines) {
  SystemParams prm = params({0.0, 0.0, 0.0}, 0.0);
  prm.mass = 2.0;
  const HamiltonianSpec h = make_evans(Space::Euclidean, prm, Profile::zero());
  const PhasePoint x0 = PhasePoint::make({0.1, -0.2, 0.3}, {1.0, 0.5, -2.0});
  for (Method m : {Method::GaussLegendre2, Method::RK4}) {
    IntegratorConfig cfg = gl2(0.01);
    cfg.method = m;
    const Trajectory t = integrate(h, x0, 3.0, cfg);
    ASSERT_EQ(t.states.size(), 301u);
    const PhasePoint& end = t.states.back();
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(end.q[i], x0.q[i] + 3.0 * x0.p[i] / 2.0, 1e-12);
      EXPECT_EQ(end.p[i], x0.p[i]);
    }
  }
}

TEST(Integrate, StepCountTimesAndRecording) {
  const HamiltonianSpec h = make_sw(Space::Euclidean, params({0.0, 0.0}));
  const PhasePoint x0 = PhasePoint::make({1.0, 0.0}, {0.0, 0.5});
  const Trajectory t = integrate(h, x0, 1.0, gl2(0.3));
  EXPECT_EQ(t.steps, 4u);
  EXPECT_DOUBLE_EQ(t.step, 0.25);
  ASSERT_EQ(t.times.size(), 5u);
  for (std::size_t k = 1; k < t.times.size(); ++k) EXPECT_GT(t.times[k], t.times[k - 1]);
  EXPECT_DOUBLE_EQ(t.times.back(), 1.0);

  IntegratorConfig sparse = gl2(0.1);
  sparse.record_every = 3;
  const Trajectory s = integrate(h, x0, 1.0, sparse);
  EXPECT_EQ(s.times.size(), 5u);  // 0, 0.3, 0.6, 0.9, 1.0
  EXPECT_DOUBLE_EQ(s.times.back(), 1.0);

  const Trajectory zero = integrate(h, x0, 0.0, gl2());
  EXPECT_EQ(zero.states.size(), 1u);
  EXPECT_EQ(zero.states[0], x0);
}

TEST(Integrate, HarmonicOscillatorMatchesExactSolution) {
  // H = p^2/2 + q^2: q(t) = q0 cos(sqrt2 t) + p0/sqrt2 sin(sqrt2 t)
  const HamiltonianSpec h = make_sw(Space::Euclidean, params({0.0, 0.0}));
  const PhasePoint x0 = PhasePoint::make({1.0, -0.3}, {0.2, 0.7});
  const Trajectory t = integrate(h, x0, 5.0, gl2(1e-3));
  const double w = std::numbers::sqrt2;
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(t.states.back().q[i], x0.q[i] * std::cos(w * 5.0) + x0.p[i] / w * std::sin(w * 5.0), 1e-11);
  }
}

TEST(Integrate, OscillatorWithBarriersConservesEnergyOverLongRuns) {
  const HamiltonianSpec h = make_sw(Space::Euclidean, params({0.3, 0.5}));
  const PhasePoint x0 = PhasePoint::make({0.8, -0.6}, {0.3, 0.4});
  const Trajectory t = integrate(h, x0, 100.0, gl2(1e-3), {as_quantity(h)});
  EXPECT_LT(t.drift[0], 1e-10);
}

TEST(Integrate, UniversalIntegralsAreConservedAcrossCatalog) {
  struct Case {
    SystemDescriptor d;
    PhasePoint x0;
  };
  std::vector<Case> cases;
  auto add = [&](Family f, Space s, Vec b, double kappa, PhasePoint x0) {
    SystemDescriptor d;
    d.family = f;
    d.space = s;
    d.params = params(std::move(b), 0.9, kappa);
    d.params.delta = 0.3;
    d.params.coupling = 1.0;
    d.params.charge = 0.8;
    d.potential = Profile::polynomial({0.0, 0.5, 0.1});
    d.vector_profile = Profile::polynomial({0.2, 0.1});
    d.mass_profile = Profile::polynomial({1.0, 0.2});
    cases.push_back({d, std::move(x0)});
  };
  const PhasePoint x3 = PhasePoint::make({0.5, -0.4, 0.3}, {0.2, 0.3, -0.25});
  add(Family::SmorodinskyWinternitz, Space::Euclidean, {0.1, 0.2, 0.05}, 0.0, x3);
  add(Family::SmorodinskyWinternitz, Space::Beltrami, {0.1, 0.2, 0.05}, 0.5, x3);
  add(Family::SmorodinskyWinternitz, Space::Beltrami, {0.1, 0.2, 0.05}, -0.5, x3);
  add(Family::Garnier, Space::Poincare, {0.1, 0.0, 0.05}, 0.5, PhasePoint::make({0.3, -0.25, 0.2}, {0.1, 0.15, -0.1}));
  // near-circular orbit keeps clear of the centre
  add(Family::KeplerCoulomb, Space::Beltrami, {0.0, 0.02, 0.01}, 0.5, PhasePoint::make({0.5, -0.4, 0.3}, {0.8, 1.0, 0.0}));
  add(Family::Electromagnetic, Space::Euclidean, {0.1, 0.2, 0.05}, 0.0, x3);
  add(Family::VariableMass, Space::Euclidean, {0.1, 0.2, 0.05}, 0.0, x3);
  for (const auto& c : cases) {
    const HamiltonianSpec h = make_system(c.d);
    const Trajectory t = integrate(h, c.x0, 50.0, gl2(1e-3), universal_monitors(h));
    for (std::size_t m = 0; m < t.drift.size(); ++m)
      EXPECT_LT(t.drift[m], 1e-8) << h.name << " " << t.monitor_names[m];
  }
}

TEST(Integrate, CurvedCoulombIntegralsAreConservedWithOneBarrier) {
  SystemParams prm = params({0.0, 0.0, 0.05}, 0.0, 1.0);
  prm.coupling = 1.0;
  const HamiltonianSpec h = make_kepler_coulomb(Space::Poincare, prm);
  const CoulombParams cp{prm.mass, prm.coupling, prm.b_tilde, prm.kappa};
  const std::vector<ConservedQuantity> monitors{curved_kc_extra_integral(1, cp, Chart::Poincare),
                                                curved_kc_extra_integral(2, cp, Chart::Poincare)};
  const PhasePoint x0 = PhasePoint::make({0.3, 0.1, 0.2}, {0.1, 0.8, -0.3});
  const Trajectory t = integrate(h, x0, 10.0, gl2(1e-3), monitors);
  EXPECT_LT(max_of(t.drift), 1e-8);
}

TEST(Integrate, GaussLegendreBeatsRk4OnLongRuns) {
  const HamiltonianSpec h = make_sw(Space::Euclidean, params({0.2, 0.3}));
  const PhasePoint x0 = PhasePoint::make({0.9, -0.5}, {0.4, 0.2});
  IntegratorConfig rk = gl2(0.01);
  rk.method = Method::RK4;
  const double d_gl = integrate(h, x0, 1000.0, gl2(0.01), {as_quantity(h)}).drift[0];
  const double d_rk = integrate(h, x0, 1000.0, rk, {as_quantity(h)}).drift[0];
  EXPECT_LT(d_gl, d_rk);
}

TEST(Integrate, TimeReversalReturnsToStart) {
  SystemParams prm = params({0.2, 0.1, 0.3}, 0.8, 0.5);
  const HamiltonianSpec h = make_sw(Space::Beltrami, prm);
  const PhasePoint x0 = PhasePoint::make({0.4, -0.3, 0.5}, {0.1, 0.6, -0.2});
  const Trajectory fwd = integrate(h, x0, 5.0, gl2(1e-3));
  const Trajectory back = integrate(time_reversed(h), fwd.states.back(), 5.0, gl2(1e-3));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(back.states.back().q[i], x0.q[i], 1e-9);
    EXPECT_NEAR(back.states.back().p[i], x0.p[i], 1e-9);
  }
}

TEST(Integrate, CollisionWithTheCoulombCentreHalts) {
  SystemParams prm = params({0.0, 0.0}, 0.0);
  prm.coupling = 1.0;
  const HamiltonianSpec h = make_kepler_coulomb(Space::Euclidean, prm);
  const PhasePoint x0 = PhasePoint::make({0.5, 0.0}, {0.0, 0.0});
  try {
    integrate(h, x0, 5.0, gl2(1e-3));
    FAIL() << "expected SingularApproach";
  } catch (const ChartBoundary&) {
    FAIL() << "not a chart boundary";
  } catch (const SingularApproach& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LT(e.time(), 5.0);
    EXPECT_GE(singular_margin(h, e.last_safe()), 1e-6);
  }
}

TEST(Integrate, CrossingTheEquatorIsAChartBoundary) {
  // Free motion on the sphere in stereographic coordinates reaches the
  // equator image kappa y^2 = 1 in finite time.
  const HamiltonianSpec h = make_evans(Space::Poincare, params({0.0, 0.0}, 0.0, 1.0), Profile::zero());
  const PhasePoint x0 = PhasePoint::make({0.1, 0.0}, {1.0, 0.0});
  EXPECT_THROW(integrate(h, x0, 10.0, gl2(1e-3)), ChartBoundary);
}

TEST(Integrate, Errors) {
  const HamiltonianSpec h = make_sw(Space::Euclidean, params({0.5, 0.0}));
  const PhasePoint x0 = PhasePoint::make({0.5, 0.5}, {0.0, 0.0});
  EXPECT_THROW(integrate(h, x0, 1.0, gl2(0.0)), ConfigError);
  EXPECT_THROW(integrate(h, x0, -1.0, gl2()), RangeError);
  EXPECT_THROW(integrate(h, PhasePoint::make({0.0, 0.5}, {0.0, 0.0}), 1.0, gl2()), DomainError);
  EXPECT_THROW(integrate(h, PhasePoint::make({0.5}, {0.0}), 1.0, gl2()), DimensionMismatch);
  IntegratorConfig tight = gl2(0.5);
  tight.max_fixed_point_iters = 1;
  EXPECT_THROW(integrate(h, x0, 1.0, tight), NonConvergence);
}

TEST(Closure, HarmonicOscillatorClosesWithItsPeriod) {
  const HamiltonianSpec h = make_sw(Space::Euclidean, params({0.0, 0.0}));
  const PhasePoint x0 = PhasePoint::make({1.0, 0.2}, {0.0, 0.6});
  const Trajectory t = integrate(h, x0, 10.0, gl2(1e-3));
  const ClosureReport r = detect_closure(t, 1e-6);
  EXPECT_TRUE(r.is_closed);
  ASSERT_TRUE(r.period_estimate.has_value());
  // The orbit is an ellipse, so the phase point returns once per full period.
  EXPECT_NEAR(*r.period_estimate, 2.0 * std::numbers::pi / std::numbers::sqrt2, 1e-6);
  EXPECT_GE(r.closure_distance, 0.0);
}

TEST(Closure, OscillatorWithBarriersCloses) {
  const HamiltonianSpec h = make_sw(Space::Euclidean, params({0.2, 0.1}));
  const PhasePoint x0 = PhasePoint::make({0.9, -0.4}, {0.3, 0.5});
  const ClosureReport r = detect_closure(integrate(h, x0, 20.0, gl2(1e-3)), 1e-6);
  EXPECT_TRUE(r.is_closed);
}

TEST(Closure, CurvedCoulombOrbitsClose) {
  for (double kappa : {0.5, -0.5}) {
    SystemParams prm = params({0.0, 0.0}, 0.0, kappa);
    prm.coupling = 1.0;
    const HamiltonianSpec h = make_kepler_coulomb(Space::Beltrami, prm);
    const PhasePoint x0 = PhasePoint::make({1.0, 0.0}, {0.0, 0.8});
    const ClosureReport r = detect_closure(integrate(h, x0, 30.0, gl2(1e-3)), 1e-5);
    EXPECT_TRUE(r.is_closed) << "kappa=" << kappa << " distance " << r.closure_distance;
  }
}

TEST(Closure, GenericQuarticOrbitDoesNotClose) {
  SystemParams prm = params({0.0, 0.0}, 1.0);
  prm.delta = 0.5;
  const HamiltonianSpec h = make_garnier(Space::Euclidean, prm);
  const PhasePoint x0 = PhasePoint::make({1.0, 0.0}, {0.0, 0.7});
  IntegratorConfig cfg = gl2(1e-3);
  cfg.record_every = 10;
  const ClosureReport r = detect_closure(integrate(h, x0, 200.0, cfg), 1e-6);
  EXPECT_FALSE(r.is_closed);
  EXPECT_FALSE(r.period_estimate.has_value());
  EXPECT_GT(r.closure_distance, 1e-6);
}

TEST(Closure, InsufficientData) {
  const HamiltonianSpec h = make_sw(Space::Euclidean, params({0.0, 0.0}));
  const PhasePoint x0 = PhasePoint::make({1.0, 0.0}, {0.0, 0.5});
  EXPECT_THROW(detect_closure(integrate(h, x0, 0.0, gl2()), 1e-6), InsufficientData);
  EXPECT_THROW(detect_closure(integrate(h, x0, 0.5, gl2()), 1e-6), InsufficientData);
}

}  // namespace

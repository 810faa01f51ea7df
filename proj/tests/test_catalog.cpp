#include <gtest/gtest.h>

#include "qms/catalog.hpp"
#include "qms/integrals.hpp"
#include "qms/poisson.hpp"
#include "support/support.hpp"

namespace {

using namespace qms;
using qms::testing::Gen;
using qms::testing::rel_diff;

SystemParams params(Vec b, double omega = 1.0, double kappa = 0.0) {
  SystemParams p;
  p.omega = omega;
  p.kappa = kappa;
  p.b_tilde = std::move(b);
  return p;
}

double value(const HamiltonianSpec& h, Vec q, Vec p) { return hamiltonian_value(h, PhasePoint::make(q, p)); }

TEST(Evans, ReproducesOscillatorAndFreeParticle) {
  Gen g(81);
  for (Space s : {Space::Euclidean, Space::Poincare, Space::Beltrami}) {
    SystemParams prm = params(g.barriers(3), 0.5, 0.6);
    prm.mass = 1.4;
    const HamiltonianSpec evans = make_evans(s, prm, Profile::polynomial({0.0, 0.25}));
    const HamiltonianSpec sw = make_sw(s, prm);
    for (int t = 0; t < 20; ++t) {
      const PhasePoint x = g.phase_point(3, 0.2, 0.6);
      EXPECT_EQ(hamiltonian_value(evans, x), hamiltonian_value(sw, x));
    }
  }
  const HamiltonianSpec free = make_evans(Space::Euclidean, params({0.5, 0.0}), Profile::zero());
  EXPECT_DOUBLE_EQ(value(free, {0.5, 1.0}, {1.0, 2.0}), 2.5 + 0.5 / (2 * 0.25));
}

TEST(Oscillator, Examples) {
  EXPECT_DOUBLE_EQ(value(make_sw(Space::Euclidean, params({1, 1})), {1, 2}, {0, 0}), 5.625);
  EXPECT_DOUBLE_EQ(value(make_sw(Space::Beltrami, params({0, 0}, 1.0, 1.0)), {1, 0}, {0, 0}), 1.0);
  EXPECT_NEAR(value(make_sw(Space::Poincare, params({0, 0}, 1.0, 1.0)), {0.5, 0}, {0, 0}), 16.0 / 9.0, 1e-15);
}

TEST(Garnier, Examples) {
  SystemParams prm = params({0, 0}, 0.0);
  prm.delta = 1.0;
  EXPECT_DOUBLE_EQ(value(make_garnier(Space::Euclidean, prm), {1, 1}, {0, 0}), 4.0);
  prm.kappa = 1.0;
  EXPECT_NEAR(value(make_garnier(Space::Poincare, prm), {0.5, 0}, {0, 0}), 1.0 / 0.31640625, 1e-14);

  Gen g(82);
  SystemParams a = params(g.barriers(3), 0.9, -0.4);
  for (Space s : {Space::Euclidean, Space::Poincare, Space::Beltrami}) {
    const HamiltonianSpec garnier = make_garnier(s, a);
    const HamiltonianSpec sw = make_sw(s, a);
    for (int t = 0; t < 10; ++t) {
      const PhasePoint x = g.phase_point(3, 0.2, 0.6);
      EXPECT_EQ(hamiltonian_value(garnier, x), hamiltonian_value(sw, x));
    }
  }
}

TEST(NonlinearOscillator, TruncatedSeriesMatchesDirectSum) {
  Gen g(83);
  SystemParams prm = params({0.2, 0.0, 0.4}, 0.7);
  const Vec deltas{0.3, -0.1, 0.05};
  const HamiltonianSpec h = make_nonlinear_oscillator(Space::Euclidean, prm, deltas);
  for (int t = 0; t < 20; ++t) {
    const PhasePoint x = g.phase_point(3);
    const double s = squared_norm(x.q);
    double expected = 0.5 * squared_norm(x.p) + 0.49 * s;
    for (std::size_t k = 0; k < deltas.size(); ++k) expected += deltas[k] * std::pow(s, static_cast<double>(k + 2));
    for (std::size_t i = 0; i < 3; ++i) expected += prm.b_tilde[i] / (2.0 * x.q[i] * x.q[i]);
    EXPECT_LT(rel_diff(hamiltonian_value(h, x), expected), 1e-14);
  }
}

TEST(KeplerCoulomb, Examples) {
  SystemParams prm = params({0, 0});
  prm.coupling = 1.0;
  EXPECT_DOUBLE_EQ(value(make_kepler_coulomb(Space::Euclidean, prm), {1, 0}, {0, 0}), -1.0);
  prm.kappa = 1.0;
  EXPECT_DOUBLE_EQ(value(make_kepler_coulomb(Space::Beltrami, prm), {1, 0}, {0, 0}), -1.0);
  EXPECT_NEAR(value(make_kepler_coulomb(Space::Poincare, prm), {0.5, 0}, {0, 0}), -0.75, 1e-15);
}

// Exact symbolic evaluations at q = (0.3, -0.4, 0.25), p = (0.7, -0.2, 0.5),
// m = 1.3, w = 0.7, k = 0.9, delta = 0.3, kappa = 0.8, b_tilde = (0.3, 0, 0.5).
TEST(Curved, FrozenReferenceValues) {
  SystemParams prm = params({0.3, 0.0, 0.5}, 0.7, 0.8);
  prm.mass = 1.3;
  prm.coupling = 0.9;
  prm.delta = 0.3;
  const Vec q{0.3, -0.4, 0.25}, p{0.7, -0.2, 0.5};
  EXPECT_NEAR(value(make_sw(Space::Poincare, prm), q, p), 10.411805555555555556, 1e-13);
  EXPECT_NEAR(value(make_sw(Space::Beltrami, prm), q, p), 7.6776987179487179487, 1e-13);
  EXPECT_NEAR(value(make_garnier(Space::Poincare, prm), q, p), 11.893287037037037037, 1e-13);
  EXPECT_NEAR(value(make_kepler_coulomb(Space::Poincare, prm), q, p), 8.7191783127417234486, 1e-13);
  EXPECT_NEAR(value(make_kepler_coulomb(Space::Beltrami, prm), q, p), 5.9146047741488693673, 1e-13);
}

TEST(FlatLimit, BeltramiAtZeroCurvatureIsExactlyEuclidean) {
  Gen g(84);
  for (Family f : {Family::Evans, Family::SmorodinskyWinternitz, Family::Garnier, Family::NonlinearOscillator,
                   Family::KeplerCoulomb}) {
    SystemDescriptor d;
    d.family = f;
    d.params = params(g.barriers(4), 0.8, 0.0);
    d.params.delta = 0.2;
    d.params.deltas = {0.1};
    d.params.coupling = 1.1;
    d.potential = Profile::polynomial({0.0, 0.3, 0.1});
    SystemDescriptor flat = d;
    d.space = Space::Beltrami;
    const HamiltonianSpec curved = make_system(d), euclid = make_system(flat);
    for (int t = 0; t < 20; ++t) {
      const PhasePoint x = g.phase_point(4);
      EXPECT_EQ(hamiltonian_value(curved, x), hamiltonian_value(euclid, x)) << to_string(f);
    }
  }
}

TEST(FlatLimit, SmallCurvatureIsCloseProperty) {
  Gen g(85);
  for (Space s : {Space::Beltrami}) {
    for (Family f : {Family::SmorodinskyWinternitz, Family::KeplerCoulomb, Family::Garnier}) {
      SystemDescriptor d;
      d.family = f;
      d.space = s;
      d.params = params(g.barriers(3), 0.8, 1e-6);
      d.params.coupling = 1.0;
      d.params.delta = 0.2;
      SystemDescriptor flat = d;
      flat.space = Space::Euclidean;
      const HamiltonianSpec a = make_system(d), b = make_system(flat);
      for (int t = 0; t < 20; ++t) {
        const PhasePoint x = g.phase_point(3);
        EXPECT_LT(rel_diff(hamiltonian_value(a, x), hamiltonian_value(b, x)), 1e-4);
      }
    }
  }
}

TEST(Electromagnetic, ReducesToEvansAndConstantField) {
  Gen g(86);
  SystemParams prm = params({0.3, 0.0, 0.2});
  prm.charge = 1.5;
  prm.mass = 1.2;
  const Profile f = Profile::polynomial({0.0, 0.4});
  const HamiltonianSpec em0 = make_electromagnetic(prm, f, Profile::zero());
  SystemParams scaled = prm;
  const HamiltonianSpec evans = make_evans(Space::Euclidean, scaled, Profile::polynomial({0.0, 0.6}));
  const double c = 0.7;
  const HamiltonianSpec emc = make_electromagnetic(prm, f, Profile::polynomial({c}));
  for (int t = 0; t < 20; ++t) {
    const PhasePoint x = g.phase_point(3);
    EXPECT_LT(rel_diff(hamiltonian_value(em0, x), hamiltonian_value(evans, x)), 1e-14);
    double expected = squared_norm(x.p) / (2 * prm.mass) - prm.charge * c / prm.mass * dot(x.q, x.p) +
                      prm.charge * 0.4 * squared_norm(x.q);
    for (std::size_t i = 0; i < 3; ++i) expected += prm.b_tilde[i] / (2.0 * x.q[i] * x.q[i]);
    EXPECT_LT(rel_diff(hamiltonian_value(emc, x), expected), 1e-14);
  }
}

TEST(Electromagnetic, UniversalIntegralsCommute) {
  SystemParams prm = params({0.3, 0.5, 0.0, 0.2});
  prm.charge = 1.0;
  const HamiltonianSpec h = make_electromagnetic(prm, Profile::polynomial({0, 0, 1}), Profile::polynomial({0, 1}));
  EXPECT_TRUE(involution_table(h, universal_integrals(h.realization), 20).passed());
}

TEST(Electromagnetic, FieldsMatchPotentials) {
  Gen g(87);
  SystemParams prm = params({0.0, 0.0, 0.0});
  prm.charge = 1.0;
  const auto plain = em_fields(prm, Profile::polynomial({0, 1}), Profile::zero(), Vec{0.3, -0.4, 1.2});
  EXPECT_NEAR(plain.electric[0], -0.6, 1e-15);
  EXPECT_NEAR(plain.electric[1], 0.8, 1e-15);
  EXPECT_NEAR(plain.electric[2], -2.4, 1e-15);
  for (double b : plain.magnetic) EXPECT_EQ(b, 0.0);

  for (int t = 0; t < 20; ++t) {
    SystemParams p2 = params(g.vec(3, 0.0, 0.5));
    p2.charge = g.uniform(0.5, 1.5);
    p2.mass = g.uniform(0.5, 2.0);
    const Profile f = Profile::polynomial({0.0, 0.3, 0.2}), gv = Profile::polynomial({0.0, 1.0});
    const Vec q{g.magnitude(0.3, 1.0), g.magnitude(0.3, 1.0), g.magnitude(0.3, 1.0)};
    const auto fields = em_fields(p2, f, gv, q);
    for (std::size_t i = 0; i < 3; ++i) {
      const double h = 1e-6;
      Vec a = q, b = q;
      a[i] += h;
      b[i] -= h;
      const double grad = (em_fields(p2, f, gv, a).psi - em_fields(p2, f, gv, b).psi) / (2 * h);
      EXPECT_NEAR(fields.electric[i], -grad, 1e-6 * (1 + std::abs(grad)));
    }
    // curl A by central differences of A = q G(q^2)
    auto a_at = [&](Vec x) { return em_fields(p2, f, gv, x).vector_potential; };
    auto d = [&](std::size_t comp, std::size_t wrt) {
      const double h = 1e-6;
      Vec a = q, b = q;
      a[wrt] += h;
      b[wrt] -= h;
      return (a_at(a)[comp] - a_at(b)[comp]) / (2 * h);
    };
    const Vec curl{d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)};
    for (double v : curl) EXPECT_LT(std::abs(v), 1e-7);
  }
  EXPECT_THROW(em_fields(params({0, 0}), Profile::zero(), Profile::zero(), Vec{1, 1}), DimensionMismatch);
}

TEST(VariableMass, ReducesToEvansAndPoincareKinetic) {
  Gen g(88);
  SystemParams prm = params({0.0, 0.0, 0.0});
  prm.mass = 1.3;
  const HamiltonianSpec constant = make_variable_mass(prm, Profile::polynomial({1.3}), Profile::polynomial({0, 0.5}));
  const HamiltonianSpec evans = make_evans(Space::Euclidean, prm, Profile::polynomial({0, 0.5}));
  const double kappa = 0.6;
  const HamiltonianSpec conformal =
      make_variable_mass(prm, Profile::conformal(1.3, kappa, -2.0), Profile::zero());
  for (int t = 0; t < 20; ++t) {
    const PhasePoint x = g.phase_point(3, 0.1, 0.6);
    EXPECT_LT(rel_diff(hamiltonian_value(constant, x), hamiltonian_value(evans, x)), 1e-14);
    const SL2Values j = evaluate_sl2(SL2Realization::zero(3), x);
    const double tp = curved_kinetic(Chart::Poincare, kappa, 1.3, {j.j_minus, j.j_plus, j.j3});
    EXPECT_LT(rel_diff(hamiltonian_value(conformal, x), tp), 1e-13);
  }
}

TEST(VariableMass, UniversalIntegralsCommute) {
  const HamiltonianSpec h =
      make_variable_mass(params({0.2, 0.0, 0.4}), Profile::polynomial({1, 1}), Profile::polynomial({0, 0.3}));
  EXPECT_TRUE(involution_table(h, universal_integrals(h.realization), 20).passed());
}

TEST(Descriptor, ValidationErrors) {
  SystemDescriptor d;
  d.family = Family::KeplerCoulomb;
  d.params = params({0.5, 0.0, 0.2});
  d.ms_flags = {2};
  EXPECT_NO_THROW(validate(d));
  d.ms_flags = {1};
  try {
    validate(d);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("at least one centrifugal term must vanish"), std::string::npos);
  }
  d.ms_flags = {4};
  EXPECT_THROW(validate(d), ConfigError);
  d.ms_flags = {};
  d.params.mass = 0.0;
  EXPECT_THROW(validate(d), ConfigError);
  d.params.mass = 1.0;
  d.params.b_tilde = {1.0};
  EXPECT_THROW(validate(d), ConfigError);

  SystemDescriptor em;
  em.family = Family::Electromagnetic;
  em.space = Space::Beltrami;
  em.params = params({0, 0});
  EXPECT_THROW(validate(em), ConfigError);
  SystemDescriptor ga;
  ga.family = Family::Garnier;
  ga.params = params({0, 0});
  ga.ms_flags = {1};
  EXPECT_THROW(validate(ga), ConfigError);
}

TEST(Descriptor, ExtraIntegralsFollowFlags) {
  SystemDescriptor d;
  d.family = Family::SmorodinskyWinternitz;
  d.space = Space::Poincare;
  d.params = params({0.5, 0.2, 0.1}, 1.0, 0.5);
  d.ms_flags = {1, 3};
  const auto extras = extra_integrals(d);
  ASSERT_EQ(extras.size(), 2u);
  EXPECT_EQ(extras[0].name, "IP_1");
  EXPECT_EQ(extras[1].name, "IP_3");
  d.family = Family::KeplerCoulomb;
  d.space = Space::Euclidean;
  d.params.b_tilde = {0.0, 0.2, 0.0};
  EXPECT_EQ(valid_extra_sites(d), (std::vector<std::size_t>{1, 3}));
}

TEST(Descriptor, CanonicalTextIsStable) {
  SystemDescriptor d;
  d.family = Family::SmorodinskyWinternitz;
  d.params = params({0.5, 0.25});
  d.ms_flags = {1};
  EXPECT_EQ(to_string(d), "family=sw space=euclidean N=2 mass=1 kappa=0 omega=1 b_tilde=[0.5, 0.25] ms_flags=[1]");
}

TEST(Catalog, EntriesDescribeEveryFamily) {
  const auto entries = catalog_entries();
  ASSERT_EQ(entries.size(), 7u);
  for (std::size_t k = 0; k < entries.size(); ++k) EXPECT_EQ(entries[k].family, kAllFamilies[k]);
  EXPECT_NE(entries[4].superintegrability.find("at least one b_tilde_i = 0"), std::string::npos);
  EXPECT_NE(entries[1].extra_integrals.find("N extra integrals I_i"), std::string::npos);
  for (Family f : kAllFamilies) EXPECT_EQ(parse_family(to_string(f)), f);
  EXPECT_THROW(parse_family("harmonic"), ConfigError);
}

}  // namespace

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "weingarten/error.hpp"
#include "weingarten/integrator.hpp"
#include "weingarten/variational.hpp"

using namespace wg;

namespace {

constexpr double kPi = std::numbers::pi;

/// r = sin - theta cos + K cos: the F(u) = 2u family with axis shift K.
SupportProfile hopf2_support(double K) {
  return SupportProfile(uniform_grid(0.05, kPi - 0.05, 1e-3), [K](double t) {
    return SupportJet{std::sin(t) - t * std::cos(t) + K * std::cos(t), t * std::sin(t) - K * std::sin(t),
                      std::sin(t) + t * std::cos(t) - K * std::cos(t)};
  });
}

}  // namespace

TEST_CASE("closed-form multipliers") {
  const Multiplier two(LinearHopf{2, 0}, 1.0);
  CHECK(two.closed_form());
  for (double u : {0.3, 1.0, 4.0}) CHECK(phi0(two, u) == doctest::Approx(1 / (u * u)));

  const Multiplier hopf(LinearHopf{0.5, 1.0}, 0.5);
  for (double u : {0.1, 1.0, 1.9}) CHECK(phi0(hopf, u) == doctest::Approx(std::pow(std::abs(1 + (0.5 - 1) * u), 1.0)));

  const Multiplier cubic(CubicRoC{1}, 0.5);
  for (double u : {0.2, 0.5, 0.9}) CHECK(phi0(cubic, u) == doctest::Approx(std::pow(1 - u * u, -1.5)));
  CHECK(cubic.interval().first == doctest::Approx(0));
  CHECK(cubic.interval().second == doctest::Approx(1));
}

TEST_CASE("the multiplier is singular at fixed points") {
  const Multiplier m(LinearHopf{2, 1}, 1.0);
  CHECK_THROWS_AS(m.phi0(-1.0), Error);
  CHECK_THROWS_AS(m.phi0(-2.0), Error);
  CHECK_THROWS_AS(Multiplier(LinearHopf{2, 1}, -1.0), Error);
}

TEST_CASE("property: numeric multipliers agree with the closed forms") {
  for (const auto& [rel, u0] : {std::pair<WeingartenRelation, double>{LinearHopf{2, 1}, 1.0},
                                std::pair<WeingartenRelation, double>{LinearHopf{-0.5, 1}, 1.0},
                                std::pair<WeingartenRelation, double>{CubicRoC{1}, 0.5}}) {
    const Multiplier exact(rel, u0), numeric(rel, u0, false);
    CHECK(!numeric.closed_form());
    // Exponents agree up to the anchoring constant, so compare ratios.
    const double shift = exact.exponent(u0) - numeric.exponent(u0);
    for (double du : {-0.2, 0.1, 0.3}) {
      const double u = u0 + du;
      CHECK(numeric.exponent(u) + shift == doctest::Approx(exact.exponent(u)).epsilon(1e-10));
      CHECK(numeric.inner(u) * std::exp(shift) == doctest::Approx(exact.inner(u)).epsilon(1e-9));
    }
  }
}

TEST_CASE("property: inner and outer are successive antiderivatives") {
  for (const auto& [rel, u0] : {std::pair<WeingartenRelation, double>{LinearHopf{3, -3}, 1.0},
                                std::pair<WeingartenRelation, double>{parse_relation("k1 + k2 = 4"), 1.0},
                                std::pair<WeingartenRelation, double>{parse_relation("r2 = 2*r1 + sin(r1)"), 1.0}}) {
    const Multiplier m(rel, u0);
    for (double u : {u0 - 0.1, u0, u0 + 0.4}) {
      const double h = 1e-5;
      CHECK((m.inner(u + h) - m.inner(u - h)) / (2 * h) == doctest::Approx(m.phi0(u)).epsilon(1e-7));
      CHECK((m.outer(u + h) - m.outer(u - h)) / (2 * h) == doctest::Approx(m.inner(u)).epsilon(1e-7));
    }
  }
}

TEST_CASE("Lagrangians are finite at rest") {
  const Multiplier m(LinearHopf{0.5, 1}, 1.0);
  for (const LagrangianSpec& spec : {LagrangianSpec::l0(), LagrangianSpec::hopf_l1()})
    CHECK(std::isfinite(lagrangian_eval(spec, m, VariationalState(0.8, 1.0, 0.0))));
  // L0 for F = 2u at r1 = 1 uses the log branch of the lambda = 2 limit.
  const Multiplier two(LinearHopf{2, 0}, 1.0);
  CHECK(std::isfinite(lagrangian_eval(LagrangianSpec::l0(), two, VariationalState(0.8, 1.0, 0.0))));
}

TEST_CASE("Euler-Lagrange residual along the closed-form solution") {
  const Multiplier m(LinearHopf{2, 0}, 1.0);
  const Column thetas = Column::LinSpaced(21, 0.3, 1.2);
  const ElResidual r = euler_lagrange_residual(LagrangianSpec::l0(), m, hopf2_support(0.0), thetas);
  CHECK(r.max_difference <= 1e-6);
  CHECK((r.el.abs() <= 1e-6).all());
}

TEST_CASE("EL equals the multiplier form on a non-solution") {
  const Multiplier m(LinearHopf{2, 0}, 1.0);
  const SupportProfile s(uniform_grid(0.05, 1.5, 1e-3), [](double t) {
    return SupportJet{1 + 0.1 * std::sin(2 * t), 0.2 * std::cos(2 * t), -0.4 * std::sin(2 * t)};
  });
  for (Partials mode : {Partials::Analytic, Partials::Numeric}) {
    const ElResidual r = euler_lagrange_residual(LagrangianSpec::l0(), m, s, Column::LinSpaced(15, 0.3, 1.2), mode);
    CHECK(r.max_difference <= 1e-6);
    CHECK((r.el.abs() > 1e-3).any());
  }
}

TEST_CASE("HopfL1 vanishes on the sphere member") {
  // r2 = -r1 + 1 has the umbilic radius 1/2.
  const Multiplier m(LinearHopf{-1, 1}, 1.0);
  const VariationalState s(0.9, 0.5, 0.0);
  const ElValue v = euler_lagrange_at(LagrangianSpec::hopf_l1(), m, s, 0.0, Partials::Numeric);
  CHECK(std::abs(v.el) <= 1e-8);
}

TEST_CASE("Helmholtz conditions") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0, 1);
  const Multiplier m(LinearHopf{2, 0}, 1.0);
  const StateFn one = [](double, double, double) { return 1.0; };
  for (int i = 0; i < 30; ++i) {
    const double t = 0.3 + 0.9 * unit(rng), r1 = 0.2 + 2 * unit(rng), r = unit(rng);
    const VariationalState s(t, r, (r1 - r) * std::tan(t));
    const double rddot = unit(rng);
    CHECK(std::abs(helmholtz_residual(m, LagrangianSpec::l0(), s, rddot)) <= 1e-6);
    // Raw form: d/dtheta(1) - d/drdot(-F(r + rdot cot)) = +F' cot.
    CHECK(helmholtz_residual(m, one, s, rddot) == doctest::Approx(2 / std::tan(t)).epsilon(1e-7));
  }
  // F(u) = u + C: the constant multiplier leaves cot(theta); the exponential one closes the PDE.
  const Multiplier shift(LinearHopf{1, 0.5}, 1.0);
  const VariationalState s(0.7, 0.4, 0.3);
  CHECK(helmholtz_residual(shift, one, s, 0.2) == doctest::Approx(1 / std::tan(0.7)).epsilon(1e-7));
  CHECK(std::abs(helmholtz_residual(shift, LagrangianSpec::l0(), s, 0.2)) <= 1e-6);
  CHECK(jlm_pde_residual(shift, [&](double t, double r, double rd) { return shift.phi0(r + rd / std::tan(t)); }, s) <=
        1e-6);
}

TEST_CASE("first integrals for F(u) = 2u") {
  const Multiplier m(LinearHopf{2, 0}, 1.0);
  for (double K : {-1.0, 0.0, 2.0}) {
    const SupportProfile s = hopf2_support(K);
    for (double t : {0.3, 0.8, 1.3}) {
      const SupportJet j = s.jet(t);
      const VariationalState st(t, j.r, j.rdot);
      CHECK(first_integral_I(m, st) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(first_integral_Q(m, st) == doctest::Approx(K).scale(1).epsilon(1e-8));
    }
  }
}

TEST_CASE("implicit r1 inverts the first integral") {
  const Multiplier m(CubicRoC{1}, 0.5);
  for (double t : {0.4, 1.0, 2.5})
    for (double r1 : {0.2, 0.5, 0.95}) {
      const VariationalState s(t, 0.0, r1 * std::tan(t));
      const double C = first_integral_I(m, s);
      CHECK(implicit_r1(m, C, t, 0.5) == doctest::Approx(r1).epsilon(1e-12));
      CHECK(implicit_r1(m, C, t, r1) == doctest::Approx(r1).epsilon(1e-12));
    }
}

TEST_CASE("conservation along integrated trajectories") {
  for (const auto& [rel, r1_0] : {std::pair<WeingartenRelation, double>{LinearHopf{-0.5, 1}, 1.0},
                                  std::pair<WeingartenRelation, double>{parse_relation("k1 + k2 = 4"), 0.6},
                                  std::pair<WeingartenRelation, double>{CubicRoC{1}, 0.5}}) {
    const Integration in = integrate_cm(rel, kPi / 2, r1_0, 0.2, kPi - 0.2);
    const SupportProfile s = support_from_r1(in.profile, 1.0, 0.3);
    const DriftReport d = conservation_drift(Multiplier(rel, r1_0), s, Column::LinSpaced(41, 0.25, kPi - 0.25));
    CHECK(d.I_drift <= 1e-6);
    CHECK(d.Q_drift <= 1e-5);
  }
}

TEST_CASE("JLM ratio checks") {
  const double lambda = 0.5, C = 1;
  const Multiplier m(LinearHopf{lambda, C}, 1.0);
  const Integration in = integrate_cm(LinearHopf{lambda, C}, kPi / 2, 1.0, 0.2, kPi - 0.2);
  const SupportProfile s = support_from_r1(in.profile, 1.0, 0.3);
  const Column thetas = Column::LinSpaced(31, 0.3, 2.8);
  const StateFn p0 = [&](double t, double r, double rd) { return m.phi0(VariationalState(t, r, rd).r1()); };
  const StateFn p1 = [&](double t, double r, double rd) {
    const VariationalState st(t, r, rd);
    return std::pow(first_integral_I(m, st), lambda) * m.phi0(st.r1());
  };
  CHECK(jlm_ratio_check(p0, p1, s, thetas).spread <= 1e-6);
  CHECK(jlm_ratio_check(p0, p0, s, thetas).spread == 0);

  const Multiplier two(LinearHopf{2, 0}, 1.0);
  const Integration h2 = integrate_cm(LinearHopf{2, 0}, kPi / 2, 1.0, 0.2, kPi - 0.2);
  const SupportProfile s2 = support_from_r1(h2.profile, 1.0, 0.3);
  const StateFn q0 = [&](double t, double r, double rd) { return two.phi0(VariationalState(t, r, rd).r1()); };
  const StateFn unit = [](double, double, double) { return 1.0; };
  CHECK(jlm_ratio_check(q0, unit, s2, thetas).spread > 1e-2);
}

TEST_CASE("second variation") {
  const Multiplier m(CubicRoC{1}, 0.5);
  const Integration in = integrate_cm(CubicRoC{1}, 0.75, 0.5, 0.25, 1.25);
  const SupportProfile s = support_from_r1(in.profile, 0.75, 0.0);
  const Perturbation zero{[](double) { return 0.0; }, [](double) { return 0.0; }, "zero"};
  CHECK(second_variation(LagrangianSpec::l0(), m, s, zero, 0.3, 1.2).value == 0);
  const StabilityReport st = stability_suite(LagrangianSpec::l0(), m, s, 0.3, 1.2);
  CHECK(st.values.size() == 50);
  CHECK(st.min > 0);
  CHECK(st.identity_gap <= 1e-8);
  CHECK_THROWS_AS(second_variation(LagrangianSpec::l0(), m, s, zero, 1.2, 1.8), Error);
}

TEST_CASE("perturbation suite is reproducible and vanishes at the ends") {
  const auto a = perturbation_suite(0.3, 1.2, 10, 40, 7), b = perturbation_suite(0.3, 1.2, 10, 40, 7);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].v(0.77) == b[i].v(0.77));
    CHECK(std::abs(a[i].v(0.3)) < 1e-12);
    CHECK(std::abs(a[i].v(1.2)) < 1e-12);
  }
}

TEST_CASE("general Lagrangians with registered pairs") {
  SUBCASE("Hopf, f = I^lambda") {
    const double lambda = 0.5;
    const Multiplier m(LinearHopf{lambda, 1}, 1.0);
    const Integration in = integrate_cm(LinearHopf{lambda, 1}, 1.0, 1.0, 0.25, 1.3);
    const SupportProfile s = support_from_r1(in.profile, 1.0, 0.3);
    const LagrangianSpec spec = LagrangianSpec::power(lambda);
    const GeneralLagrangianReport r = general_lagrangian(m, spec.general, s, Column::LinSpaced(9, 0.35, 1.2));
    CHECK(r.is_jlm);
    CHECK(r.registered);
    REQUIRE(r.el_residual_max);
    CHECK(*r.el_residual_max <= 1e-6);
    // Phi1 = 1/sin^lambda along the trajectory.
    const SupportJet j = s.jet(0.9);
    CHECK(spec_multiplier(r.spec, m, VariationalState(0.9, j.r, j.rdot)) ==
          doctest::Approx(1 / std::pow(std::sin(0.9), lambda)).epsilon(1e-6));
  }
  SUBCASE("cubic, f = I^3") {
    const Multiplier m(CubicRoC{1}, 0.5);
    const Integration in = integrate_cm(CubicRoC{1}, 1.0, 0.5, 0.25, 1.3);
    const SupportProfile s = support_from_r1(in.profile, 1.0, 0.3);
    const GeneralLagrangianReport r =
        general_lagrangian(m, LagrangianSpec::power(3).general, s, Column::LinSpaced(9, 0.35, 1.2));
    CHECK(r.is_jlm);
    CHECK(r.registered);
    REQUIRE(r.el_residual_max);
    CHECK(*r.el_residual_max <= 1e-6);
  }
  SUBCASE("f = 1 is the L0 multiplier") {
    const Multiplier m(LinearHopf{2, 0}, 1.0);
    GeneralTerms t;
    t.f = [](double, double) { return 1.0; };
    const GeneralLagrangianReport r = general_lagrangian(m, t, hopf2_support(0.0), Column::LinSpaced(9, 0.35, 1.2));
    CHECK(r.is_jlm);
  }
}

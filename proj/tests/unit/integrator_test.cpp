#include <cmath>
#include <numbers>

#include "doctest.h"
#include "weingarten/error.hpp"
#include "weingarten/integrator.hpp"

using namespace wg;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("integrate_cm reproduces the closed-form Hopf member") {
  const Integration in = integrate_cm(LinearHopf{2, 0}, kPi / 2, 1.0, 0.2, kPi - 0.2);
  const RoCProfile& p = in.profile;
  CHECK(((p.r1() - p.grid().sin()).abs() <= 1e-8).all());
  CHECK(((p.r2() - 2 * p.grid().sin()).abs() <= 1e-8).all());
  CHECK(in.lower.stop == StopReason::Reached);
  CHECK(in.upper.stop == StopReason::Reached);
}

TEST_CASE("fixed points integrate to spheres") {
  const Integration cmc = integrate_cm(parse_relation("k1 + k2 = 4"), kPi / 2, 0.5, 0.3, 2.8);
  CHECK(((cmc.profile.r1() - 0.5).abs() <= 1e-12).all());
  const Integration umb = integrate_cm(PureKLinear{1}, kPi / 2, 1.3, 0.3, 2.8);
  CHECK(((umb.profile.r1() - 1.3).abs() <= 1e-12).all());
}

TEST_CASE("hopf_closed_form") {
  for (double t : {0.3, 1.0, 2.2}) {
    CHECK(hopf_closed_form(2, 0, -1, t).r1 == doctest::Approx(std::sin(t)));
    CHECK(hopf_closed_form(0.4, 3, 0, t).r1 == doctest::Approx(3 / 0.6));
    CHECK(hopf_closed_form(3, -3, 0.7, t).r1 == doctest::Approx((-3 + 0.7 * std::sin(t) * std::sin(t)) / -2));
  }
  CHECK_THROWS_AS(hopf_closed_form(1, 2, 1, 1.0), Error);
}

TEST_CASE("property: closed-form Hopf profiles satisfy the CM equation") {
  const Column g = uniform_grid(0.05, kPi - 0.05, 1e-3);
  for (double lambda : {-0.5, 0.1, 2.0, 3.0})
    for (double A0 : {-0.3, 0.8}) {
      const RoCProfile p = hopf_profile(lambda, 1.0, A0, g);
      CHECK(cm_residual_sup(p, 0.2, kPi - 0.2) < 1e-8);
      const HopfPoint h = hopf_closed_form(lambda, 1.0, A0, 1.1);
      CHECK(h.r + h.rdot / std::tan(1.1) == doctest::Approx(h.r1).epsilon(1e-10));
    }
}

TEST_CASE("integration stops at a vertical asymptote of F") {
  // CMC started between the pole of F (1/4) and the umbilic radius (1/2).
  const Integration in = integrate_cm(parse_relation("k1 + k2 = 4"), kPi / 2, 0.3, 0.05, kPi - 0.05);
  CHECK(in.lower.stop == StopReason::BlowUp);
  CHECK(in.upper.stop == StopReason::BlowUp);
  // Between the poles of F the profile stays a solution.
  CHECK(in.residual_window.first > in.lower.theta_end);
  CHECK(in.residual_max <= 1e-8);
}

TEST_CASE("umbilic slope of Hopf members equals lambda") {
  for (auto [lambda, C] : {std::pair{3.0, -3.0}, std::pair{0.1, 3.0}, std::pair{2.0, 1.0}}) {
    const Integration in = integrate_cm(LinearHopf{lambda, C}, kPi / 2, 2.0, 0, kPi);
    const UmbilicAnalysis u = umbilic_slope_estimate(in.profile, Pole::North);
    CHECK(u.slope_estimate == doctest::Approx(lambda).epsilon(1e-2));
    const UmbilicAnalysis s = umbilic_slope_estimate(in.profile, Pole::South);
    CHECK(s.slope_estimate == doctest::Approx(lambda).epsilon(1e-2));
  }
}

TEST_CASE("a sphere has no umbilic slope") {
  const Column g = uniform_grid(0, kPi, 1e-3);
  const RoCProfile sphere(g, Column::Constant(g.size(), 1.0), Column::Constant(g.size(), 1.0),
                          PoleValues{ExtReal(1.0), ExtReal(1.0)});
  CHECK_THROWS_AS(umbilic_slope_estimate(sphere), Error);
  CHECK(slope_theorem_check(sphere).vacuous);
  CHECK(vanishing_rate_estimate(sphere, 1.5).value == doctest::Approx(0.0));
}

TEST_CASE("vanishing-rate fixtures") {
  const Column g = uniform_grid(0, 0.8, 2.5e-4);
  const RoCProfile d0 = vanishing_fixture(1.5, 0, 1.0, g);
  const VanishingRate v0 = vanishing_rate_estimate(d0, 1.5);
  CHECK(v0.growth == numerics::Growth::Finite);
  CHECK(v0.value == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(vanishing_rate_estimate(vanishing_fixture(1.5, -1, 1.0, g), 1.5).growth == numerics::Growth::Zero);
  CHECK(vanishing_rate_estimate(vanishing_fixture(1.5, 1, 1.0, g), 1.5).growth == numerics::Growth::Divergent);
  CHECK(umbilic_slope_estimate(d0).slope_estimate == doctest::Approx(2.5).epsilon(2e-2));
}

TEST_CASE("slope theorem report") {
  const Integration in = integrate_cm(LinearHopf{3, -3}, kPi / 2, 2.0, 0, kPi);
  const SlopeTheoremReport r = slope_theorem_check(in.profile);
  CHECK(r.pass);
  CHECK(r.slope == doctest::Approx(3).epsilon(1e-2));
  CHECK(r.alpha == doctest::Approx(2).epsilon(1e-2));
  CHECK(r.gamma != doctest::Approx(0));

  const RoCProfile d1 = vanishing_fixture(2.5, 1, 1.0, uniform_grid(0, 0.8, 2.5e-4));
  const SlopeTheoremReport q = slope_theorem_check(d1);
  CHECK(q.pass);
  CHECK(q.alpha_lower_bound_only);
}

TEST_CASE("interior umbilics are found as sign changes of r2 - r1") {
  const Column g = uniform_grid(0.1, 3.0, 1e-3);
  const RoCProfile p(g, Column::Constant(g.size(), 1.0), 1 + (g - 1.0) * 0.1);
  const InteriorUmbilics iu = interior_umbilics(p);
  REQUIRE(iu.crossings.size() == 1);
  CHECK(iu.crossings[0] == doctest::Approx(1.0).epsilon(1e-6));
}

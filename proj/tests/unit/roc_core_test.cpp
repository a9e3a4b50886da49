#include <cmath>
#include <memory>
#include <numbers>

#include "doctest.h"
#include "weingarten/error.hpp"
#include "weingarten/roc_core.hpp"

using namespace wg;

namespace {

constexpr double kPi = std::numbers::pi;

RoCProfile analytic(std::function<double(double)> r1, std::function<double(double)> r2,
                    std::function<double(double)> dr1, const Column& grid) {
  return RoCProfile::sample(std::make_shared<AnalyticProfile>(r1, r2, dr1), grid);
}

SupportProfile analytic_support(std::function<SupportJet(double)> jet) {
  return SupportProfile(uniform_grid(0.1, kPi - 0.1, 1e-3), std::move(jet));
}

double max_abs(const Column& c) { return c.isNaN().select(0.0, c.abs()).maxCoeff(); }

}  // namespace

TEST_CASE("GaussAngle rejects angles outside [0, pi] and cot near a pole") {
  CHECK_THROWS_AS(GaussAngle(-0.1), Error);
  CHECK_THROWS_AS(GaussAngle(4.0), Error);
  CHECK(GaussAngle(0.0).is_north_pole());
  CHECK(GaussAngle(kPi).is_south_pole());
  CHECK_THROWS_AS(GaussAngle(1e-8).cot(), Error);
  CHECK(GaussAngle(kPi / 4).cot() == doctest::Approx(1.0));
}

TEST_CASE("curvatures from closed-form supports") {
  SUBCASE("round sphere") {
    const RoCProfile p = curvatures_from_support(analytic_support([](double) { return SupportJet{2, 0, 0}; }));
    CHECK(max_abs(p.r1() - 2) < 1e-14);
    CHECK(max_abs(p.r2() - 2) < 1e-14);
  }
  SUBCASE("translated sphere: rdot cot cancels the cos term") {
    const double R = 1.5, v = 0.4;
    const RoCProfile p = curvatures_from_support(analytic_support([=](double t) {
      return SupportJet{R + v * std::cos(t), -v * std::sin(t), -v * std::cos(t)};
    }));
    CHECK(max_abs(p.r1() - R) < 1e-13);
    CHECK(max_abs(p.r2() - R) < 1e-13);
  }
  SUBCASE("r = sin - theta cos gives (sin, 2 sin)") {
    const RoCProfile p = curvatures_from_support(analytic_support([](double t) {
      return SupportJet{std::sin(t) - t * std::cos(t), t * std::sin(t), std::sin(t) + t * std::cos(t)};
    }));
    CHECK(max_abs(p.r1() - p.grid().sin()) < 1e-12);
    CHECK(max_abs(p.r2() - 2 * p.grid().sin()) < 1e-12);
  }
}

TEST_CASE("support_from_r1 oracles") {
  const Column g = uniform_grid(0.05, kPi - 0.05, 1e-3);
  SUBCASE("constant r1 gives a constant support") {
    const RoCProfile p = analytic([](double) { return 1.7; }, [](double) { return 1.7; }, [](double) { return 0.0; }, g);
    const SupportProfile s = support_from_r1(p, kPi / 3, 1.7);
    for (double t : {0.2, 1.0, 1.5707963267948966, 2.0, 3.0}) CHECK(s.jet(t).r == doctest::Approx(1.7).epsilon(1e-12));
  }
  SUBCASE("r1 = sin") {
    const RoCProfile p = analytic([](double t) { return std::sin(t); }, [](double t) { return 2 * std::sin(t); },
                                  [](double t) { return std::cos(t); }, g);
    const SupportProfile s = support_from_r1(p, kPi / 3, std::sin(kPi / 3) - kPi / 3 * std::cos(kPi / 3));
    double err = 0;
    for (double t = 0.1; t < kPi - 0.1; t += 0.01) err = std::max(err, std::abs(s.jet(t).r - (std::sin(t) - t * std::cos(t))));
    CHECK(err <= 1e-8);
  }
  SUBCASE("the anchor may not sit at pi/2") {
    const RoCProfile p = analytic([](double) { return 1.0; }, [](double) { return 1.0; }, [](double) { return 0.0; }, g);
    CHECK_THROWS_AS(support_from_r1(p, kPi / 2, 1.0), Error);
  }
}

TEST_CASE("property: curvatures of support_from_r1 reproduce r1") {
  const Column g = uniform_grid(0.05, kPi - 0.05, 1e-3);
  for (double a : {0.3, 1.1, -0.4}) {
    auto r1 = [a](double t) { return 1 + a * std::sin(t) * std::sin(t); };
    auto dr1 = [a](double t) { return 2 * a * std::sin(t) * std::cos(t); };
    // r2 from the CM equation so the pair is a genuine surface.
    auto r2 = [=](double t) { return r1(t) + dr1(t) * std::tan(t); };
    const RoCProfile p = analytic(r1, r2, dr1, g);
    const SupportProfile s = support_from_r1(p, 0.7, 0.9);
    for (double t : {0.3, 0.9, 1.3, 1.9, 2.6}) {
      const SupportJet j = s.jet(t);
      CHECK(j.r + j.rdot / std::tan(t) == doctest::Approx(r1(t)).epsilon(1e-8));
    }
  }
}

TEST_CASE("embed_profile") {
  const Column g = uniform_grid(0, kPi, 1e-3);
  SUBCASE("sphere") {
    const RoCProfile p(g, Column::Constant(g.size(), 2.0), Column::Constant(g.size(), 2.0));
    const ProfileCurve3D c = embed_profile(p, 2.0);
    CHECK(max_abs(c.rho - 2 * g.sin()) < 1e-12);
    CHECK(max_abs(c.h - 2 * g.cos()) < 1e-9);
  }
  SUBCASE("(sin, 2 sin) gives rho = sin^2 and h = sin cos - theta + const") {
    const RoCProfile p = analytic([](double t) { return std::sin(t); }, [](double t) { return 2 * std::sin(t); },
                                  [](double t) { return std::cos(t); }, g);
    const ProfileCurve3D c = embed_profile(p, 0.0);
    CHECK(max_abs(c.rho - g.sin().square()) < 1e-12);
    const Column expect = g.sin() * g.cos() - g;
    CHECK(max_abs(c.h - expect) < 1e-8);
  }
  SUBCASE("flat points are rejected") {
    Column r2 = Column::Constant(g.size(), 1.0);
    r2[10] = INFINITY;
    const RoCProfile p(g, Column::Constant(g.size(), 1.0), r2);
    CHECK_THROWS_AS(embed_profile(p, 0.0), Error);
  }
}

TEST_CASE("CM residual and its integrated form") {
  const Column g = uniform_grid(0, kPi, 1e-3);
  const RoCProfile sphere(g, Column::Constant(g.size(), 3.0), Column::Constant(g.size(), 3.0));
  CHECK(cm_residual_sup(sphere) == doctest::Approx(0.0));
  CHECK(integrated_cm_check(sphere, 0.3, 2.0) == doctest::Approx(0.0));

  const RoCProfile sin2 = analytic([](double t) { return std::sin(t); }, [](double t) { return 2 * std::sin(t); },
                                   [](double t) { return std::cos(t); }, g);
  CHECK(cm_residual_sup(sin2) < 1e-12);
  CHECK(std::abs(integrated_cm_check(sin2, kPi / 4, kPi / 2)) <= 1e-8);

  const RoCProfile lin = analytic([](double t) { return t; }, [](double t) { return t; }, [](double) { return 1.0; }, g);
  const Column r = cm_residual(lin);
  CHECK(std::isnan(r[0]));  // the pole sample has no residual
  CHECK(r[g.size() / 2] == doctest::Approx(1.0));
  CHECK(integrated_cm_check(lin, kPi / 4, kPi / 2) == doctest::Approx(kPi / 4).epsilon(1e-10));
}

TEST_CASE("interpolated profiles evaluate between samples") {
  const Column g = uniform_grid(0.1, 3.0, 1e-2);
  const RoCProfile p(g, g.sin() + 1, 2 * g.sin() + 1);
  CHECK(p.at(1.2345).r1.value() == doctest::Approx(std::sin(1.2345) + 1).epsilon(1e-9));
  CHECK(p.dr1(1.2345) == doctest::Approx(std::cos(1.2345)).epsilon(1e-6));
}

TEST_CASE("uniform_grid honours the spacing bound and the endpoints") {
  const Column g = uniform_grid(0.2, 1.7, 0.1);
  CHECK(g[0] == 0.2);
  CHECK(g[g.size() - 1] == doctest::Approx(1.7));
  CHECK(((g.tail(g.size() - 1) - g.head(g.size() - 1)) <= 0.1 + 1e-15).all());
}

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "weingarten/error.hpp"
#include "weingarten/mesh.hpp"
#include "weingarten/profile_io.hpp"

using namespace wg;

namespace {

constexpr double kPi = std::numbers::pi;

ProfileCurve3D sphere_curve(int n) {
  ProfileCurve3D c;
  c.grid = Column::LinSpaced(n, 0, kPi);
  c.rho = c.grid.sin();
  c.h = c.grid.cos();
  return c;
}

}  // namespace

TEST_CASE("a revolved sphere is closed") {
  const Mesh m = revolve_profile(sphere_curve(101), 64);
  const MeshTopology t = mesh_topology(m);
  CHECK(t.watertight());
  CHECK(t.euler() == 2);
  CHECK(m.vertices.size() == 99 * 64 + 2);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    CHECK(m.vertices[i].norm() == doctest::Approx(1.0));
    // On the unit sphere the normal is the position.
    CHECK((m.normals[i] - m.vertices[i]).norm() < 1e-9);
  }
}

TEST_CASE("an open profile has two boundary loops") {
  ProfileCurve3D c;
  c.grid = Column::LinSpaced(20, 0.5, 2.5);
  c.rho = Column::Constant(20, 1.0);
  c.h = Column::LinSpaced(20, 0, 1);
  const MeshTopology t = mesh_topology(revolve_profile(c, 16));
  CHECK(t.boundary_loops == 2);
  CHECK(t.euler() == 0);
  CHECK(!t.watertight());
}

TEST_CASE("rows with non-finite coordinates are skipped") {
  ProfileCurve3D c = sphere_curve(41);
  c.rho[20] = std::numeric_limits<double>::infinity();
  const Mesh m = revolve_profile(c, 8);
  CHECK(m.skipped_rows == 1);
  for (const auto& v : m.vertices) CHECK(v.allFinite());
}

TEST_CASE("too few segments are rejected") { CHECK_THROWS_AS(revolve_profile(sphere_curve(10), 2), Error); }

TEST_CASE("OBJ text lists vertices, normals and faces") {
  const Mesh m = revolve_profile(sphere_curve(5), 4);
  const std::string obj = render_obj(m);
  CHECK(obj.find("v ") != std::string::npos);
  CHECK(obj.find("vn ") != std::string::npos);
  CHECK(obj.find("f ") != std::string::npos);
}

TEST_CASE("number formatting") {
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::isinf(parse_number("inf")));
  CHECK(parse_number(format_number(0.1)) == 0.1);
  CHECK(parse_number(format_number(kPi)) == kPi);
  CHECK_THROWS_AS(parse_number("abc"), Error);
}

TEST_CASE("property: CSV round trip is lossless") {
  ProfileTable t;
  const int n = 37;
  t.theta = Column::LinSpaced(n, 0.1, 3.0);
  t.r1 = t.theta.sin() * 1.2345678901234567;
  t.r2 = t.theta.exp() / 3.0;
  t.r2[5] = std::numeric_limits<double>::infinity();
  t.r = t.theta.cos() / 7.0;
  t.rho = t.theta.sqrt();
  t.h = -t.theta * 1e-300;
  t.metadata["relation"] = "r2 = 2*r1 + 1";
  t.metadata["tolerance"] = "1e-08";
  const ProfileTable back = parse_profile_csv(render_profile_csv(t));
  REQUIRE(back.size() == n);
  CHECK((back.theta == t.theta).all());
  CHECK((back.r1 == t.r1).all());
  CHECK((back.r2 == t.r2).all());
  CHECK((back.r == t.r).all());
  CHECK((back.rho == t.rho).all());
  CHECK((back.h == t.h).all());
  CHECK(back.metadata == t.metadata);
}

TEST_CASE("malformed CSV is a parse error") {
  CHECK_THROWS_AS(parse_profile_csv("theta,r,r1,r2,rho,h\n1,2,3\n"), Error);
  CHECK_THROWS_AS(parse_profile_csv("theta,r,r1,r2,rho,h\n1,2,3,x,5,6\n"), Error);
}

TEST_CASE("files are written atomically and read back") {
  const auto dir = std::filesystem::temp_directory_path() / "wg_mesh_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "p.csv").string();
  ProfileTable t;
  t.theta = Column::LinSpaced(3, 1, 2);
  t.r = t.r1 = t.r2 = t.rho = t.h = t.theta;
  write_profile_csv(path, t);
  CHECK((read_profile_csv(path).theta == t.theta).all());
  for (const auto& e : std::filesystem::directory_iterator(dir)) CHECK(e.path().filename() == "p.csv");
  std::filesystem::remove_all(dir);
}

TEST_CASE("profiles survive the table") {
  const Column g = Column::LinSpaced(50, 0.2, 2.9);
  const RoCProfile p(g, Column::Constant(50, 2.0), Column::Constant(50, 2.0));
  const ProfileCurve3D c = embed_profile(p, 0.0);
  const ProfileTable t = make_table(p, c);
  const RoCProfile q = profile_from_table(t);
  CHECK((q.r1() == p.r1()).all());
  CHECK((curve_from_table(t).rho == c.rho).all());
  CHECK((t.r - (c.rho * g.sin() + c.h * g.cos())).abs().maxCoeff() < 1e-12);
  // A sphere's support is constant up to the axial shift h cos(theta).
  const Column centred = t.r - (c.h - 2 * g.cos()) * g.cos();
  CHECK((centred - 2.0).abs().maxCoeff() < 1e-9);
}

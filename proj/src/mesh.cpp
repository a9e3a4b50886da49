#include "weingarten/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "weingarten/error.hpp"
#include "weingarten/profile_io.hpp"

namespace wg {

Mesh revolve_profile(const ProfileCurve3D& curve, int segments, double pole_tolerance) {
  if (segments < 3) throw Error(ErrorKind::Precondition, "a revolved mesh needs at least 3 segments");
  const Eigen::Index n = curve.grid.size();
  if (n == 0 || curve.rho.size() != n || curve.h.size() != n)
    throw Error(ErrorKind::Precondition, "profile is empty or its columns differ in length");
  Mesh mesh;
  double rho_max = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::isfinite(curve.rho[i]) && std::isfinite(curve.h[i])) rho_max = std::max(rho_max, std::abs(curve.rho[i]));

  // Each kept row is either a pole (one vertex) or a ring of `segments` vertices.
  struct Row {
    int first;
    bool pole;
  };
  std::vector<Row> rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = curve.grid[i], rho = curve.rho[i], h = curve.h[i];
    if (!std::isfinite(rho) || !std::isfinite(h)) {
      ++mesh.skipped_rows;
      continue;
    }
    const int first = static_cast<int>(mesh.vertices.size());
    if (std::abs(rho) <= pole_tolerance * rho_max) {
      mesh.vertices.emplace_back(0.0, 0.0, h);
      mesh.normals.emplace_back(0.0, 0.0, std::cos(t) >= 0 ? 1.0 : -1.0);
      rows.push_back({first, true});
      continue;
    }
    for (int k = 0; k < segments; ++k) {
      const double phi = 2 * std::numbers::pi * k / segments;
      mesh.vertices.emplace_back(rho * std::cos(phi), rho * std::sin(phi), h);
      mesh.normals.emplace_back(std::sin(t) * std::cos(phi), std::sin(t) * std::sin(phi), std::cos(t));
    }
    rows.push_back({first, false});
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyDomain, "no finite profile rows to revolve");

  for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
    const Row a = rows[r], b = rows[r + 1];
    if (a.pole && b.pole) continue;
    for (int k = 0; k < segments; ++k) {
      const int k1 = (k + 1) % segments;
      if (a.pole) {
        mesh.faces.push_back({a.first, b.first + k, b.first + k1});
      } else if (b.pole) {
        mesh.faces.push_back({a.first + k, b.first, a.first + k1});
      } else {
        mesh.faces.push_back({a.first + k, b.first + k, b.first + k1});
        mesh.faces.push_back({a.first + k, b.first + k1, a.first + k1});
      }
    }
  }

  // The index pattern orients all faces alike; flip them together if most
  // disagree with the Gauss-angle normals.
  long agree = 0;
  for (const auto& f : mesh.faces) {
    const Eigen::Vector3d g =
        (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    const Eigen::Vector3d nrm = mesh.normals[f[0]] + mesh.normals[f[1]] + mesh.normals[f[2]];
    const double d = g.dot(nrm);
    agree += d > 0 ? 1 : (d < 0 ? -1 : 0);
  }
  if (agree < 0)
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  return mesh;
}

MeshTopology mesh_topology(const Mesh& m) {
  MeshTopology t;
  t.vertices = m.vertices.size();
  t.faces = m.faces.size();
  std::map<std::pair<int, int>, int> uses;
  for (const auto& f : m.faces)
    for (int e = 0; e < 3; ++e) {
      const int a = f[e], b = f[(e + 1) % 3];
      ++uses[{std::min(a, b), std::max(a, b)}];
    }
  t.edges = uses.size();
  std::map<int, std::vector<int>> boundary;
  for (const auto& [edge, count] : uses) {
    if (count == 1) {
      ++t.boundary_edges;
      boundary[edge.first].push_back(edge.second);
      boundary[edge.second].push_back(edge.first);
    } else if (count > 2) {
      ++t.nonmanifold_edges;
    }
  }
  // Connected components of the boundary graph.
  std::map<int, bool> seen;
  for (const auto& [v, _] : boundary) {
    if (seen[v]) continue;
    ++t.boundary_loops;
    std::vector<int> stack{v};
    seen[v] = true;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int y : boundary[x])
        if (!seen[y]) {
          seen[y] = true;
          stack.push_back(y);
        }
    }
  }
  return t;
}

std::string render_obj(const Mesh& m) {
  std::ostringstream out;
  out << "# revolved profile, axis +z\n";
  for (const auto& v : m.vertices)
    out << "v " << format_number(v.x()) << ' ' << format_number(v.y()) << ' ' << format_number(v.z()) << '\n';
  for (const auto& n : m.normals)
    out << "vn " << format_number(n.x()) << ' ' << format_number(n.y()) << ' ' << format_number(n.z()) << '\n';
  for (const auto& f : m.faces)
    out << "f " << f[0] + 1 << "//" << f[0] + 1 << ' ' << f[1] + 1 << "//" << f[1] + 1 << ' ' << f[2] + 1 << "//"
        << f[2] + 1 << '\n';
  return out.str();
}

void write_obj(const std::string& path, const Mesh& m) { atomic_write(path, render_obj(m)); }

}  // namespace wg

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "weingarten/roc_core.hpp"

namespace wg {

struct Mesh {
  std::vector<Eigen::Vector3d> vertices, normals;
  std::vector<std::array<int, 3>> faces;
  /// Profile rows dropped because rho or h was not finite.
  std::size_t skipped_rows = 0;
};

/// Revolves (rho, h) about +z. Rows with |rho| below pole_tolerance times the
/// largest |rho| collapse to one pole vertex. Normals come from the Gauss
/// angle: (sin t cos phi, sin t sin phi, cos t).
/// The default tolerance absorbs the pole margin the integrator leaves.
Mesh revolve_profile(const ProfileCurve3D& curve, int segments, double pole_tolerance = 1e-5);

struct MeshTopology {
  std::size_t vertices = 0, edges = 0, faces = 0, boundary_edges = 0, boundary_loops = 0, nonmanifold_edges = 0;
  long euler() const { return static_cast<long>(vertices) - static_cast<long>(edges) + static_cast<long>(faces); }
  bool watertight() const { return boundary_edges == 0 && nonmanifold_edges == 0; }
};
MeshTopology mesh_topology(const Mesh& m);

std::string render_obj(const Mesh& m);
void write_obj(const std::string& path, const Mesh& m);

}  // namespace wg

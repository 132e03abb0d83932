#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace bdie {

using Vec3 = Eigen::Vector3d;

/// Triangulated boundary of the ball B_{r0}: an icosphere with all vertices
/// projected to the exact sphere after each subdivision step.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW seen from outside
  std::vector<Vec3> triangle_normals;         // unit, outward
  std::vector<Vec3> vertex_normals;           // angle-weighted average, unit
  std::vector<double> areas;
  int subdiv{0};
  double radius{1.0};

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double total_area() const;
  int euler_characteristic() const;  // V - E + F
  Vec3 centroid(int t) const;
  /// Longest edge over the mesh (global mesh size h).
  double mesh_size() const;
};

/// Radially layered tetrahedralization of the ball. Shell `layers` coincides
/// with the surface mesh; shells are scaled copies plus a center vertex.
struct VolumeMesh {
  SurfaceMesh surface;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;  // positive orientation
  std::vector<double> volumes;
  std::vector<int> surface_to_volume;    // surface vertex -> volume vertex
  std::vector<int> volume_to_surface;    // -1 for interior vertices
  std::vector<std::array<int, 2>> boundary_face;  // triangle -> {tet, local face}
  int layers{1};

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_tets() const { return static_cast<int>(tets.size()); }
  double total_volume() const;
  bool is_boundary_vertex(int v) const { return volume_to_surface[v] >= 0; }
};

/// 20*4^subdiv triangles, all vertices at distance r0 from the origin.
/// subdiv > 6 is rejected (dense-matrix memory guard).
SurfaceMesh build_icosphere(int subdiv, double r0);

VolumeMesh build_ball_mesh(const SurfaceMesh& surface, int layers);

/// Gradients of the four P1 hat functions on tet t (constant vectors).
std::array<Vec3, 4> tet_hat_gradients(const VolumeMesh& m, int t);

/// In-plane gradients of the three P1 hat functions on surface triangle t.
std::array<Vec3, 3> triangle_hat_gradients(const SurfaceMesh& m, int t);

/// Brute-force point location; returns tet index or -1, fills barycentric
/// coordinates on success.
int locate_tet(const VolumeMesh& m, const Vec3& x, std::array<double, 4>* bary = nullptr);

/// Interior solid angle of the polyhedron at every surface vertex (sum of
/// the incident tet solid angles); smooth points would give 2 pi.
std::vector<double> vertex_solid_angles(const VolumeMesh& m);

/// Plain-text dump: `v x y z`, `f i j k`, `t i j k l` lines (1-based).
void dump_mesh(std::ostream& os, const SurfaceMesh& m);
void dump_mesh(std::ostream& os, const VolumeMesh& m);

}  // namespace bdie

#pragma once

#include "bdie/geometry.hpp"
#include "bdie/linalg.hpp"

#include <stdexcept>

namespace bdie {

using linalg::Vector;

/// Discrete boundary unknowns: P0 (one value per triangle, H^{-1/2}-type
/// densities psi) or P1 (one value per vertex, H^{1/2}-type traces phi).
enum class BoundarySpace { P0, P1 };

struct BoundaryDensity {
  BoundarySpace space{BoundarySpace::P0};
  Vector values;
  const SurfaceMesh* mesh{nullptr};

  static BoundaryDensity p0(const SurfaceMesh& m) {
    return {BoundarySpace::P0, Vector::Zero(m.num_triangles()), &m};
  }
  static BoundaryDensity p1(const SurfaceMesh& m) {
    return {BoundarySpace::P1, Vector::Zero(m.num_vertices()), &m};
  }
  void check() const {
    const Eigen::Index expect =
        space == BoundarySpace::P0 ? mesh->num_triangles() : mesh->num_vertices();
    if (values.size() != expect)
      throw std::invalid_argument("BoundaryDensity: value count does not match the mesh");
  }
};

/// Continuous piecewise-linear nodal field on the volume mesh.
struct DomainDensity {
  Vector values;
  const VolumeMesh* mesh{nullptr};

  static DomainDensity zero(const VolumeMesh& m) {
    return {Vector::Zero(m.num_vertices()), &m};
  }
  static DomainDensity interpolate(const VolumeMesh& m,
                                   const std::function<double(const Vec3&)>& f) {
    DomainDensity d = zero(m);
    for (int v = 0; v < m.num_vertices(); ++v) d.values[v] = f(m.vertices[v]);
    return d;
  }
  void check() const {
    if (values.size() != mesh->num_vertices())
      throw std::invalid_argument("DomainDensity: value count does not match the mesh");
  }
};

}  // namespace bdie

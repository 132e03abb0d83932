#pragma once

#include "bdie/densities.hpp"
#include "bdie/fields.hpp"
#include "bdie/geometry.hpp"

#include <functional>

namespace bdie::oracle {

/// Brute-force reference values. These deliberately share no code with the
/// production quadrature: octree midpoint rules over the meshed ball and an
/// analytic flat-panel formula instead of mapped Gauss / Duffy rules.
struct OracleValue {
  double value{0.0};
  double error_estimate{0.0};  // |depth d - depth d-1|
};

/// Adaptive octree midpoint quadrature of integrand(x, tet) over the
/// tetrahedralized ball; cells crossing the mesh boundary or close to `focus`
/// are refined to `depth`.
OracleValue octree_integrate(const VolumeMesh& mesh,
                             const std::function<double(const Vec3&, int)>& integrand,
                             const Vec3& focus, int depth);

/// (P f~)(y) through the octree path.
OracleValue brute_volume_potential(const ExtendedRhs& rhs, const Coefficient& a,
                                   const VolumeMesh& mesh, const Vec3& y, int depth);

/// (R u)(y) for a nodal field, evaluated by barycentric interpolation.
OracleValue brute_remainder_potential(const DomainDensity& u, const Coefficient& a,
                                      const Vec3& y, int depth);

/// int_T |x - y|^-1 dS_x over a flat triangle, closed form.
double analytic_triangle_single_layer(const std::array<Vec3, 3>& corners, const Vec3& y);

/// <V g, h> for P0 densities with the analytic inner integral and a
/// high-order outer rule (independent of the production Galerkin path).
double brute_galerkin_single_layer(const SurfaceMesh& s, const Coefficient& a, const Vector& g,
                                   const Vector& h, int outer_order = 6);

struct SphereAnalytics {
  double area;
  double volume;
  double single_layer_constant_interior;  // unit density, a == 1: equals r0
  double double_layer_constant_interior;  // -1 (Gauss solid angle)
  double equilibrium_density;             // V_Delta^-1 of 1: 1/r0
};
SphereAnalytics sphere_analytics(double r0);

struct FdEstimate {
  Vec3 gradient;
  double laplacian;
};
/// Central differences with one Richardson step.
FdEstimate fd_check(const std::function<double(const Vec3&)>& f, const Vec3& x, double h);

}  // namespace bdie::oracle

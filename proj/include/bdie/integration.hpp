#pragma once

#include "bdie/geometry.hpp"
#include "bdie/quadrature.hpp"

#include <array>
#include <functional>

namespace bdie {

using QuadSink = std::function<void(const Vec3&, double)>;

/// Emit physical quadrature points; weights include the element measure.
void tri_quad(const std::array<Vec3, 3>& c, const QuadratureRule& rule, const QuadSink& sink);
void tet_quad(const std::array<Vec3, 4>& c, const QuadratureRule& rule, const QuadSink& sink);

/// Duffy-type rules with the singularity at corner 0: the map Jacobian
/// cancels 1/r (triangle) resp. 1/r^2 (tet) singularities. n points per axis.
void tri_quad_duffy(const std::array<Vec3, 3>& c, int n, const QuadSink& sink);
void tet_quad_duffy(const std::array<Vec3, 4>& c, int n, const QuadSink& sink);

/// Distance-graded refinement toward an off-element target y: elements are
/// split 4-fold (8-fold for tets) while diam > theta * dist(y), up to
/// max_depth levels; leaves use the regular rule.
void tri_quad_near(const std::array<Vec3, 3>& c, const QuadratureRule& rule, const Vec3& y,
                   int max_depth, double theta, const QuadSink& sink);
void tet_quad_near(const std::array<Vec3, 4>& c, const QuadratureRule& rule, const Vec3& y,
                   int max_depth, double theta, const QuadSink& sink);

/// Refinement toward the sphere |x| = r0 for integrands that blow up at the
/// ball boundary: children reaching the sphere are split again, `depth` times.
void tet_quad_graded_sphere(const std::array<Vec3, 4>& c, const QuadratureRule& rule, double r0,
                            int depth, const QuadSink& sink);
void tri_quad_graded_sphere(const std::array<Vec3, 3>& c, const QuadratureRule& rule, double r0,
                            int depth, const QuadSink& sink);

std::array<Vec3, 3> triangle_corners(const SurfaceMesh& m, int t);
std::array<Vec3, 4> tet_corners(const VolumeMesh& m, int t);

double tri_diameter(const std::array<Vec3, 3>& c);
double tet_diameter(const std::array<Vec3, 4>& c);
double point_triangle_distance(const Vec3& y, const std::array<Vec3, 3>& c);

}  // namespace bdie

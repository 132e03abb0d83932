#pragma once

#include "bdie/densities.hpp"
#include "bdie/fields.hpp"
#include "bdie/geometry.hpp"
#include "bdie/linalg.hpp"

#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace bdie {

using linalg::Matrix;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct QuadratureConfig {
  int surface_order{3};   // regular Gauss order on triangles
  int volume_order{2};    // regular Gauss order on tets
  int duffy_points{4};    // tensor points per axis for Duffy rules
  int near_depth{6};      // distance-graded refinement depth (adaptive early exit)
  double near_theta{1.0};
  int boundary_grading{3};  // levels toward the sphere for rough rhs data
  bool parallel{true};
};

/// Dense operator block with its space tags, mainly for CSV debugging dumps.
struct OperatorBlock {
  std::string label;
  std::string row_space;
  std::string col_space;
  Matrix m;
};
void dump_block_csv(std::ostream& os, const OperatorBlock& block);

/// Evaluation target; `vertex` names the volume-mesh vertex the point
/// coincides with (enables Duffy treatment on incident elements), -1 if free.
struct EvalTarget {
  Vec3 point;
  int vertex{-1};
};

/// (P f~)(y) = int f0 P(.,y) dx - int F . grad_x P(.,y) dx over the mesh.
Vector volume_potential_rhs(const ExtendedRhs& rhs, const Coefficient& a,
                            const VolumeMesh& mesh, const std::vector<EvalTarget>& targets,
                            const QuadratureConfig& cfg = {});

/// (R u)(y) = int R(x,y) u(x) dx for a P1 field u.
Vector remainder_potential(const DomainDensity& u, const Coefficient& a,
                           const std::vector<EvalTarget>& targets,
                           const QuadratureConfig& cfg = {});

/// Layer potentials V (P0 density) and W (P1 density).
Vector single_layer(const BoundaryDensity& g, const Coefficient& a, const SurfaceMesh& surface,
                    const std::vector<EvalTarget>& targets, const QuadratureConfig& cfg = {});
Vector double_layer(const BoundaryDensity& g, const Coefficient& a, const SurfaceMesh& surface,
                    const std::vector<EvalTarget>& targets, const QuadratureConfig& cfg = {});
std::vector<Vec3> single_layer_gradient(const BoundaryDensity& g, const Coefficient& a,
                                        const SurfaceMesh& surface,
                                        const std::vector<EvalTarget>& targets,
                                        const QuadratureConfig& cfg = {});

/// Collocation matrices at all volume-mesh vertices (boundary rows carry the
/// direct boundary-operator values; jump terms are added by the callers).
Matrix collocation_single_layer(const Coefficient& a, const VolumeMesh& mesh,
                                const QuadratureConfig& cfg = {});
Matrix collocation_double_layer(const Coefficient& a, const VolumeMesh& mesh,
                                const QuadratureConfig& cfg = {});
Matrix collocation_remainder(const Coefficient& a, const VolumeMesh& mesh,
                             const QuadratureConfig& cfg = {});
Vector nodal_volume_potential(const ExtendedRhs& rhs, const Coefficient& a,
                              const VolumeMesh& mesh, const QuadratureConfig& cfg = {});

/// Galerkin boundary blocks. Direct variable-coefficient assemblies come with
/// Laplace-counterpart compositions assembled through an independent kernel
/// path (used by the elementwise identity checks).
struct BoundaryOps {
  // variable-coefficient operators
  Matrix V;    // NT x NT  <chi_T, V psi>
  Matrix W;    // NT x NS  <chi_T, W phi>
  Matrix Wp;   // NS x NT  <hat_v, W' psi>
  Matrix Lp;   // NS x NS  <hat_v, L+ phi>
  // composed Laplace-counterpart twins of V, W, Wp
  Matrix V_composed;
  Matrix W_composed;
  Matrix Wp_composed;
  // Laplace building blocks
  Matrix V0;        // NT x NT  symmetrized Laplace single layer
  Matrix L0;        // NS x NS  Maue-regularized Laplace hypersingular
  Matrix Wp0;       // NS x NT  Laplace W'
  Matrix Vdm;       // NS x NT  [a dn(1/a)]-weighted Laplace single layer
  Matrix W0m;       // NS x NS  [a dn(1/a)]-weighted P1-test Laplace double layer
  Matrix Mm;        // NS x NS  [a dn(1/a)]-weighted P1 mass
  // plumbing
  Matrix M01;       // NT x NS  <chi_T, hat_v> (= area/3 pattern)
  Matrix M11;       // NS x NS  P1 surface mass
  Vector areas;     // NT
  Vector coeff_at_vertices;  // a(x_v) on the surface
};
BoundaryOps assemble_boundary_ops(const Coefficient& a, const SurfaceMesh& surface,
                                  const QuadratureConfig& cfg = {});

/// Volume FEM forms entering the variational conormal machinery:
/// stiffness  K[v,j]  = E(hat_j, hat_v)
/// grad_a     G[v,j]  = int hat_j (grad a . grad hat_v) dx
/// surf_dna   B[v,j]  = oint hat_j hat_v (dn a) dS
struct FemMatrices {
  SparseMatrix stiffness;
  SparseMatrix grad_a;
  SparseMatrix surf_dna;
};
FemMatrices assemble_fem(const Coefficient& a, const VolumeMesh& mesh,
                         const QuadratureConfig& cfg = {});

/// Weak realization of R* f~: returns <E0 R* f~, v> computed by parts through
/// the P1 interpolant of the nodal volume potential of f~.
double rstar_weak(const ExtendedRhs& rhs, const Coefficient& a, const VolumeMesh& mesh,
                  const DomainDensity& v, const QuadratureConfig& cfg = {});

/// Near-boundary Richardson extrapolation of the interior traces of V g, W g
/// and T+ V g against the boundary operators; relative l2 discrepancies over
/// the boundary vertices.
struct JumpReport {
  double single_layer;           // [Vg]+ vs  V g
  double double_layer;           // [Wg]+ vs -g/2 + W g
  double conormal_single_layer;  // [T+ V g]+ vs g/2 + W' g
};
JumpReport jump_check(const Coefficient& a, const VolumeMesh& mesh, const BoundaryDensity& g0,
                      const BoundaryDensity& g1, const QuadratureConfig& cfg = {});

}  // namespace bdie

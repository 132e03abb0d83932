#pragma once

#include "bdie/conormal.hpp"
#include "bdie/densities.hpp"
#include "bdie/fields.hpp"
#include "bdie/potentials.hpp"

#include <optional>
#include <string>

namespace bdie {

enum class SystemLabel { D1, D2, N1, N2, N1hat, N2hat };
std::string to_string(SystemLabel label);

/// Assembled dense block system over the unknown layout [u nodes | boundary
/// dofs]; the label fixes the boundary space (P0 psi for D, P1 phi for N).
struct BdieSystem {
  SystemLabel label{SystemLabel::D1};
  Matrix a;
  Vector rhs;
  int n_u{0};
  int n_b{0};
  BoundarySpace boundary_space{BoundarySpace::P0};
  std::string case_name;
};

struct SolveReport {
  Vector u;
  Vector boundary;
  double residual{0.0};
  Vector smallest_sv;    // ascending, up to 3
  Matrix null_vectors;   // right singular vectors for smallest_sv (columns)
  double sigma_max{0.0};
  double condition{0.0};
};

/// Everything assembled once per (case, mesh, quadrature) combination and
/// shared by the four systems: dense potential blocks, Galerkin boundary
/// operators, FEM forms, the conormal lift and the case data vectors.
struct BdieWorkspace {
  const VolumeMesh* mesh{nullptr};
  ManufacturedCase kase;
  QuadratureConfig cfg;

  Matrix remainder;      // NV x NV collocated R
  Matrix vsl;            // NV x NT collocated V
  Matrix wdl;            // NV x NS collocated W
  Vector pot;            // NV nodal P f~
  Vector rhs_dual;       // NV <f~, hat_v>
  BoundaryOps bops;
  FemMatrices fem;
  TraceP0Pairing trace;

  Matrix tplus_r_dual;   // NS x NV dual rows of T+ R
  Matrix tplus_v_dual;   // NS x NT dual rows of T+ V (variational flux)
  Matrix tplus_w_dual;   // NS x NS dual rows of T+ W
  Vector fc_dual;        // NS dual of T+(f~ + E0 R* f~, P f~)

  Vector phi0;           // NS Dirichlet datum at the vertices
  Vector psi0;           // NT Neumann datum, P0 projection
  Vector row_scale_p0;   // 1/area_T: normalizes P0-dual rows
  Vector row_scale_p1;   // 1/<hat_v,1>: normalizes P1-dual rows
  Vector jump_w;         // 1 - omega_v/(4 pi): double-layer jump at vertex v
  double boundary_area{0.0};

  int n_u() const { return mesh->num_vertices(); }
  int n_s() const { return mesh->surface.num_vertices(); }
  int n_t() const { return mesh->surface.num_triangles(); }
};

BdieWorkspace build_workspace(const ManufacturedCase& c, const VolumeMesh& mesh,
                              const QuadratureConfig& cfg = {});

BdieSystem assemble_d1(const BdieWorkspace& ws);
BdieSystem assemble_d2(const BdieWorkspace& ws);
/// Neumann systems; psi0_override replaces the case datum (used for the
/// incompatible-data experiments).
BdieSystem assemble_n1(const BdieWorkspace& ws,
                       const std::optional<Vector>& psi0_override = std::nullopt);
BdieSystem assemble_n2(const BdieWorkspace& ws,
                       const std::optional<Vector>& psi0_override = std::nullopt);

/// Rank-one perturbation g0(U) G of an assembled N1/N2 system; checks the
/// finite-dimensional perturbation conditions numerically.
BdieSystem perturb(const BdieWorkspace& ws, const BdieSystem& system);

SolveReport solve(const BdieSystem& system);
SolveReport null_space(const BdieSystem& system);

/// <f~, 1> - <psi0, 1>; zero exactly when the Neumann data are compatible.
double solvability_neumann(const ManufacturedCase& c, const VolumeMesh& mesh,
                           const QuadratureConfig& cfg = {});

/// Cokernel functionals of the Neumann BDIE operators.
double cokernel_g1(const DomainDensity& f1, const BoundaryDensity& f2, const Coefficient& a,
                   const QuadratureConfig& cfg = {});
double cokernel_g2(const DomainDensity& f1, const BoundaryDensity& f2, const Coefficient& a,
                   const BoundaryOps& bops);

/// The two right-hand-side components of an assembled Neumann system in the
/// form the cokernel functionals pair against: nodal F1 and the raw
/// (unscaled) boundary component.
struct NeumannRhsParts {
  Vector f1_nodal;   // NV
  Vector f2;         // N1: P1-dual (NS); N2: nodal trace values (NS)
};
NeumannRhsParts neumann_rhs_parts(const BdieWorkspace& ws, SystemLabel label,
                                  const std::optional<Vector>& psi0_override = std::nullopt);
/// g*1 pairing with a dual-represented second component.
double cokernel_g1_dual(const BdieWorkspace& ws, const Vector& f1_nodal, const Vector& f2_dual);
/// Scale used to report the functionals relatively (same pairing applied to
/// the absolute values of the data).
double cokernel_g1_dual_scale(const BdieWorkspace& ws, const Vector& f1_nodal,
                              const Vector& f2_dual);
double cokernel_g2_parts(const BdieWorkspace& ws, const Vector& f1_nodal, const Vector& f2_nodal,
                         double* scale = nullptr);

struct EquivalenceReport {
  double u_cross_diff;        // ||u_1 - u_2|| / ||u||
  double boundary_cross_diff;
  double u_err_first;         // vs the exact solution
  double u_err_second;
  double boundary_vs_reference;  // psi vs variational conormal / phi vs trace
  double solvability{0.0};       // Neumann only
};
EquivalenceReport equivalence_check(const BdieWorkspace& ws, bool dirichlet);

}  // namespace bdie

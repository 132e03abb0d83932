#pragma once

#include "bdie/densities.hpp"
#include "bdie/fields.hpp"
#include "bdie/potentials.hpp"

#include <vector>

namespace bdie {

enum class ConormalFlavor { Generalized, Canonical, Classical };

struct ConormalResult {
  BoundaryDensity density;   // P0
  double residual;           // defect of the variational solve
  double interior_residual;  // norm of the interior-hat right-hand sides
  ConormalFlavor flavor{ConormalFlavor::Generalized};
};

/// The P1-trace / P0 pairing <hat_v, chi_T> with its weighted least-norm
/// lift; shared by the conormal solves and the second-kind BDIE rows.
struct TraceP0Pairing {
  Matrix pairing;  // NS x NT, exact area/3 pattern
  Vector areas;    // NT
  Matrix lift;     // NT x NS: dual data -> P0 density (surface-L2 least norm)
  std::vector<int> boundary_vertices;  // volume ids, surface order
};
TraceP0Pairing make_trace_pairing(const VolumeMesh& mesh);

/// Consistent-flux lifter: the conormal dual data <f~,hat_v> + E(w,hat_v) is
/// evaluated on the P1 field w that carries the requested boundary trace and
/// satisfies the interior equations E(w, hat_i) = -g_i. Lifting the raw data
/// of an interpolant instead does not converge (the interior consistency
/// defect aliases into the boundary flux at O(1)).
class ConormalLifter {
 public:
  ConormalLifter(const VolumeMesh& mesh, const SparseMatrix& stiffness);
  /// g: weak interior data over all vertices; wb: boundary values of w.
  Vector boundary_dual(const Vector& g, const Vector& wb) const;
  Matrix boundary_dual_matrix(const Matrix& g, const Matrix& wb) const;

 private:
  std::vector<int> interior_, boundary_;
  Matrix k_bb_, k_bi_, k_ib_;
  Eigen::PartialPivLU<Matrix> k_ii_;
};

/// Solve oint t (gamma+ v) dS = <f~, v> + E(u, v) over boundary-attached tet
/// hats for t in P0; interior hats report the PDE consistency residual.
ConormalResult generalized_conormal(const ExtendedRhs& rhs, const DomainDensity& u,
                                    const Coefficient& a, const QuadratureConfig& cfg = {});

/// Canonical co-normal derivative through the canonical (regular-part only)
/// extension; requires an L2 right-hand side.
ConormalResult canonical_conormal(const ExtendedRhs& rhs, const DomainDensity& u,
                                  const Coefficient& a, const QuadratureConfig& cfg = {});

ExtendedRhs rhs_linear_combination(double a1, const ExtendedRhs& r1, double a2,
                                   const ExtendedRhs& r2);

/// || T+(a1 f1 + a2 f2, a1 u1 + a2 u2) - a1 T+(f1,u1) - a2 T+(f2,u2) ||_L2.
double conormal_linearity_check(const ExtendedRhs& f1, const DomainDensity& u1,
                                const ExtendedRhs& f2, const DomainDensity& u2, double a1,
                                double a2, const Coefficient& a,
                                const QuadratureConfig& cfg = {});

struct GreenReport {
  double relative_residual;
  double absolute_residual;
  int checkpoints;
};

/// u + R u + W gamma+ u - P(Av) at interior checkpoints (first form).
GreenReport third_green_residual(const DomainDensity& u, const Coefficient& a,
                                 const QuadratureConfig& cfg = {});

/// u + R u - V T+(f~,u) + W gamma+ u - P f~ (generalised form).
GreenReport generalized_third_green_residual(const DomainDensity& u, const ExtendedRhs& rhs,
                                             const Coefficient& a,
                                             const QuadratureConfig& cfg = {});

/// | int (v Au - u Av) - <T+u, gamma+ v> + <T+v, gamma+ u> | for smooth
/// manufactured pairs with L2 right-hand sides.
double second_green_residual(const ManufacturedCase& cu, const ManufacturedCase& cv,
                             const VolumeMesh& mesh, const QuadratureConfig& cfg = {});

/// Mollify the rhs by clipping its flux outside radius r0 (1 - 1/k), solve
/// the Dirichlet rows for u_k and compare its conormal derivative with the
/// unmollified reference on the same mesh. Implemented with the D1 system.
std::vector<double> smooth_approx_convergence(const ManufacturedCase& c, const VolumeMesh& mesh,
                                              int k_max, const QuadratureConfig& cfg = {});

}  // namespace bdie

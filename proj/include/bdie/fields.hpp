#pragma once

#include "bdie/densities.hpp"
#include "bdie/geometry.hpp"
#include "bdie/quadrature.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bdie {

/// The scalar diffusion coefficient a(x) > 0 with its gradient and, where
/// available, Laplacian. Evaluators are pure closures registered by name.
struct Coefficient {
  std::string name;
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
  std::function<double(const Vec3&)> laplacian;  // may be null
  bool constant{false};

  double operator()(const Vec3& x) const { return value(x); }
};

Coefficient coefficient_one();
Coefficient coefficient_one_plus_r2();   // 1 + |x|^2
Coefficient coefficient_one_plus_x1();   // 1 + x1 (positive on the unit ball)
Coefficient coefficient_by_name(const std::string& name);

/// Weak right-hand side f~ = E0[f0] + div(E0[F]) acting as
///   <f~, v> = int_Omega f0 v dx - int_Omega F . grad v dx.
/// Null members stand for identically-zero parts. The flux evaluator gets a
/// tet index hint (or -1) so discrete piecewise-gradient fluxes stay exact.
/// When the flux is a gradient field F = grad(chi), supplying chi lets the
/// P1 pairings integrate by parts per element (tet-face quadrature of the
/// bounded chi instead of volume quadrature of the blowing-up F).
struct ExtendedRhs {
  std::function<double(const Vec3&)> f0;
  std::function<Vec3(const Vec3&, int)> flux;
  std::function<double(const Vec3&)> flux_potential;
  bool boundary_singular{false};  // integrand blows up toward |x| = r0

  bool zero() const { return !f0 && !flux; }
};

ExtendedRhs rhs_zero();
ExtendedRhs rhs_regular(std::function<double(const Vec3&)> f0);
/// F = a * grad(u_h) for a discrete field (exact per-tet gradients).
ExtendedRhs rhs_discrete_flux(const DomainDensity& u, const Coefficient& a);

struct ManufacturedCase {
  std::string name;
  Coefficient a;
  std::function<double(const Vec3&)> u;       // null for kernel-only data
  std::function<Vec3(const Vec3&)> grad_u;    // null when u is
  ExtendedRhs rhs;                            // r_Omega f~ = Au
  std::function<double(const Vec3&)> dirichlet;                   // phi0
  std::function<double(const Vec3&, const Vec3&)> neumann;        // psi0(x, n)
  bool smooth{true};  // classical conormal derivative exists
};

std::vector<ManufacturedCase> builtin_cases(double r0);
ManufacturedCase case_by_name(const std::string& name, double r0);

/// E(u,v) = int_Omega a grad u . grad v dx with piecewise-linear gradients.
/// Checks a > 0 at every quadrature point; throws on mesh mismatch.
double energy_form(const Coefficient& a, const DomainDensity& u, const DomainDensity& v,
                   int quad_order = 2);

/// <f~, v> = int f0 v - int F . grad v by tet quadrature (graded toward the
/// sphere when the rhs is flagged boundary-singular).
double pair_rhs(const ExtendedRhs& rhs, const DomainDensity& v, int quad_order = 2);

/// Same pairing against a single P1 hat function (assembly building block).
double pair_rhs_hat(const ExtendedRhs& rhs, const VolumeMesh& mesh, int vertex,
                    int quad_order = 2);

/// <f~, hat_v> for every vertex in one mesh sweep.
Vector pair_rhs_all_hats(const ExtendedRhs& rhs, const VolumeMesh& mesh, int quad_order = 2);

}  // namespace bdie

#include "bdie/bdie.hpp"

#include "bdie/integration.hpp"
#include "bdie/kernels.hpp"
#include "bdie/linalg.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bdie {

std::string to_string(SystemLabel label) {
  switch (label) {
    case SystemLabel::D1: return "D1";
    case SystemLabel::D2: return "D2";
    case SystemLabel::N1: return "N1";
    case SystemLabel::N2: return "N2";
    case SystemLabel::N1hat: return "N1hat";
    case SystemLabel::N2hat: return "N2hat";
  }
  return "?";
}

namespace {

Vector gather_boundary(const VolumeMesh& mesh, const Vector& nodal) {
  const int ns = mesh.surface.num_vertices();
  Vector out(ns);
  for (int v = 0; v < ns; ++v) out[v] = nodal[mesh.surface_to_volume[v]];
  return out;
}

Matrix gather_boundary_rows(const VolumeMesh& mesh, const Matrix& m) {
  const int ns = mesh.surface.num_vertices();
  Matrix out(ns, m.cols());
  for (int v = 0; v < ns; ++v) out.row(v) = m.row(mesh.surface_to_volume[v]);
  return out;
}

double surface_l2(const Vector& t, const Vector& areas) {
  return std::sqrt(t.cwiseAbs2().dot(areas));
}

}  // namespace

BdieWorkspace build_workspace(const ManufacturedCase& c, const VolumeMesh& mesh,
                              const QuadratureConfig& cfg) {
  BdieWorkspace ws;
  ws.mesh = &mesh;
  ws.kase = c;
  ws.cfg = cfg;

  ws.remainder = collocation_remainder(c.a, mesh, cfg);
  ws.vsl = collocation_single_layer(c.a, mesh, cfg);
  ws.wdl = collocation_double_layer(c.a, mesh, cfg);
  ws.pot = nodal_volume_potential(c.rhs, c.a, mesh, cfg);
  ws.rhs_dual = pair_rhs_all_hats(c.rhs, mesh, cfg.volume_order);
  ws.bops = assemble_boundary_ops(c.a, mesh.surface, cfg);
  ws.fem = assemble_fem(c.a, mesh, cfg);
  ws.trace = make_trace_pairing(mesh);

  const int nv = mesh.num_vertices();
  const ConormalLifter lifter(mesh, ws.fem.stiffness);
  const Matrix grad_terms = Matrix(ws.fem.grad_a - ws.fem.surf_dna);
  // Variational conormal derivatives of the potential fields: each operator
  // K in {R, V, W} satisfies A(K g) = -div((c + K g) grad a) with c = u for
  // the remainder and c = 0 for the layer potentials, so the canonical flux
  // is the consistent-flux lift of those weak data. Summed along the third
  // Green identity the four duals recombine into the flux of the pair
  // (f~, u), which keeps the second-kind rows consistent with the first.
  const Matrix g_tot = grad_terms * (Matrix::Identity(nv, nv) + ws.remainder);
  ws.tplus_r_dual =
      lifter.boundary_dual_matrix(g_tot, gather_boundary_rows(mesh, ws.remainder));
  ws.tplus_v_dual = lifter.boundary_dual_matrix(Matrix(grad_terms * ws.vsl),
                                                gather_boundary_rows(mesh, ws.vsl));
  {
    // interior trace of W carries the double-layer jump at the vertices
    Matrix w_trace = gather_boundary_rows(mesh, ws.wdl);
    const auto omega = vertex_solid_angles(mesh);
    for (int v = 0; v < ws.n_s(); ++v)
      w_trace(v, v) -= 1.0 - omega[v] / (4.0 * std::numbers::pi);
    Matrix w_field = ws.wdl;
    for (int v = 0; v < ws.n_s(); ++v)
      w_field.row(mesh.surface_to_volume[v]) = w_trace.row(v);
    ws.tplus_w_dual =
        lifter.boundary_dual_matrix(Matrix(grad_terms * w_field), w_trace);
  }

  // T+(f~ + E0 R* f~, P f~): same construction around the volume potential
  const Vector g_fc = ws.rhs_dual + grad_terms * ws.pot;
  ws.fc_dual = lifter.boundary_dual(g_fc, gather_boundary(mesh, ws.pot));

  const SurfaceMesh& s = mesh.surface;
  ws.phi0 = Vector::Zero(ws.n_s());
  if (c.dirichlet)
    for (int v = 0; v < ws.n_s(); ++v) ws.phi0[v] = c.dirichlet(s.vertices[v]);
  ws.psi0 = Vector::Zero(ws.n_t());
  if (c.neumann) {
    const QuadratureRule rule = quadrature_for(ElementKind::Triangle, cfg.surface_order);
    for (int t = 0; t < ws.n_t(); ++t) {
      const Vec3 n = s.triangle_normals[t];
      double acc = 0.0;
      tri_quad(triangle_corners(s, t), rule,
               [&](const Vec3& x, double w) { acc += w * c.neumann(x, n); });
      ws.psi0[t] = acc / s.areas[t];
    }
  }

  ws.row_scale_p0 = ws.bops.areas.cwiseInverse();
  ws.row_scale_p1 = (ws.bops.M11 * Vector::Ones(ws.n_s())).cwiseInverse();
  const auto omega = vertex_solid_angles(mesh);
  ws.jump_w = Vector::Zero(ws.n_s());
  for (int v = 0; v < ws.n_s(); ++v)
    ws.jump_w[v] = 1.0 - omega[v] / (4.0 * std::numbers::pi);
  ws.boundary_area = ws.bops.areas.sum();
  return ws;
}

BdieWorkspace with_rhs(const BdieWorkspace& base, const ExtendedRhs& rhs) {
  BdieWorkspace ws = base;
  ws.kase.rhs = rhs;
  ws.pot = nodal_volume_potential(rhs, ws.kase.a, *ws.mesh, ws.cfg);
  ws.rhs_dual = pair_rhs_all_hats(rhs, *ws.mesh, ws.cfg.volume_order);
  const ConormalLifter lifter(*ws.mesh, ws.fem.stiffness);
  const Matrix grad_terms = Matrix(ws.fem.grad_a - ws.fem.surf_dna);
  const Vector g_fc = ws.rhs_dual + grad_terms * ws.pot;
  ws.fc_dual = lifter.boundary_dual(g_fc, gather_boundary(*ws.mesh, ws.pot));
  return ws;
}

namespace {

// shared first block: collocated u + R u - V psi (D) or u + R u + W phi (N)
void fill_domain_rows_dirichlet(const BdieWorkspace& ws, BdieSystem& sys) {
  const int nv = ws.n_u();
  const int nt = ws.n_t();
  sys.a.topLeftCorner(nv, nv) = Matrix::Identity(nv, nv) + ws.remainder;
  sys.a.topRightCorner(nv, nt) = -ws.vsl;
  sys.rhs.head(nv) = ws.pot - ws.wdl * ws.phi0;
  for (int v = 0; v < ws.n_s(); ++v)
    sys.rhs[ws.mesh->surface_to_volume[v]] += ws.jump_w[v] * ws.phi0[v];
}

void fill_domain_rows_neumann(const BdieWorkspace& ws, BdieSystem& sys, const Vector& psi0) {
  const int nv = ws.n_u();
  const int ns = ws.n_s();
  sys.a.topLeftCorner(nv, nv) = Matrix::Identity(nv, nv) + ws.remainder;
  sys.a.topRightCorner(nv, ns) = ws.wdl;
  for (int v = 0; v < ns; ++v)
    sys.a(ws.mesh->surface_to_volume[v], nv + v) -= ws.jump_w[v];
  sys.rhs.head(nv) = ws.pot + ws.vsl * psi0;
}

}  // namespace

BdieSystem assemble_d1(const BdieWorkspace& ws) {
  if (!ws.kase.dirichlet)
    throw std::invalid_argument("assemble_d1: case has no Dirichlet datum");
  const int nv = ws.n_u(), nt = ws.n_t(), ns = ws.n_s();
  BdieSystem sys;
  sys.label = SystemLabel::D1;
  sys.case_name = ws.kase.name;
  sys.n_u = nv;
  sys.n_b = nt;
  sys.boundary_space = BoundarySpace::P0;
  sys.a = Matrix::Zero(nv + nt, nv + nt);
  sys.rhs = Vector::Zero(nv + nt);
  fill_domain_rows_dirichlet(ws, sys);

  const Matrix r_bnd = gather_boundary_rows(*ws.mesh, ws.remainder);
  const Vector p_bnd = gather_boundary(*ws.mesh, ws.pot);
  const auto scale = ws.row_scale_p0.asDiagonal();
  sys.a.block(nv, 0, nt, nv) = scale * (ws.bops.M01 * r_bnd);
  sys.a.block(nv, nv, nt, nt) = -(scale * ws.bops.V);
  sys.rhs.tail(nt) =
      scale * (ws.bops.M01 * (p_bnd - 0.5 * ws.phi0) - ws.bops.W * ws.phi0);
  return sys;
}

BdieSystem assemble_d2(const BdieWorkspace& ws) {
  if (!ws.kase.dirichlet)
    throw std::invalid_argument("assemble_d2: case has no Dirichlet datum");
  const int nv = ws.n_u(), nt = ws.n_t();
  BdieSystem sys;
  sys.label = SystemLabel::D2;
  sys.case_name = ws.kase.name;
  sys.n_u = nv;
  sys.n_b = nt;
  sys.boundary_space = BoundarySpace::P0;
  sys.a = Matrix::Zero(nv + nt, nv + nt);
  sys.rhs = Vector::Zero(nv + nt);
  fill_domain_rows_dirichlet(ws, sys);

  // second-kind row psi/2 + T+ R u - W' psi = F2 realized through the
  // variational fluxes: psi/2 - W' psi = psi - T+ V psi by the jump
  // relation, and T+ W phi0 = L+ phi0; every potential flux then shares the
  // consistent-flux pipeline and recombines into the flux of (f~, u).
  sys.a.block(nv, 0, nt, nv) = ws.trace.lift * ws.tplus_r_dual;
  sys.a.block(nv, nv, nt, nt) =
      Matrix::Identity(nt, nt) - ws.trace.lift * ws.tplus_v_dual;
  sys.rhs.tail(nt) = ws.trace.lift * (ws.fc_dual - ws.tplus_w_dual * ws.phi0);
  return sys;
}

BdieSystem assemble_n1(const BdieWorkspace& ws, const std::optional<Vector>& psi0_override) {
  if (!ws.kase.neumann) throw std::invalid_argument("assemble_n1: case has no Neumann datum");
  const Vector psi0 = psi0_override.value_or(ws.psi0);
  const int nv = ws.n_u(), ns = ws.n_s();
  BdieSystem sys;
  sys.label = SystemLabel::N1;
  sys.case_name = ws.kase.name;
  sys.n_u = nv;
  sys.n_b = ns;
  sys.boundary_space = BoundarySpace::P1;
  sys.a = Matrix::Zero(nv + ns, nv + ns);
  sys.rhs = Vector::Zero(nv + ns);
  fill_domain_rows_neumann(ws, sys, psi0);

  const auto scale = ws.row_scale_p1.asDiagonal();
  sys.a.block(nv, 0, ns, nv) = scale * ws.tplus_r_dual;
  sys.a.block(nv, nv, ns, ns) = scale * ws.bops.Lp;
  sys.rhs.tail(ns) =
      scale * (ws.fc_dual - 0.5 * (ws.trace.pairing * psi0) + ws.bops.Wp * psi0);
  return sys;
}

BdieSystem assemble_n2(const BdieWorkspace& ws, const std::optional<Vector>& psi0_override) {
  if (!ws.kase.neumann) throw std::invalid_argument("assemble_n2: case has no Neumann datum");
  const Vector psi0 = psi0_override.value_or(ws.psi0);
  const int nv = ws.n_u(), ns = ws.n_s();
  BdieSystem sys;
  sys.label = SystemLabel::N2;
  sys.case_name = ws.kase.name;
  sys.n_u = nv;
  sys.n_b = ns;
  sys.boundary_space = BoundarySpace::P1;
  sys.a = Matrix::Zero(nv + ns, nv + ns);
  sys.rhs = Vector::Zero(nv + ns);
  fill_domain_rows_neumann(ws, sys, psi0);

  const Matrix r_bnd = gather_boundary_rows(*ws.mesh, ws.remainder);
  const Matrix w_bnd = gather_boundary_rows(*ws.mesh, ws.wdl);
  sys.a.block(nv, 0, ns, nv) = r_bnd;
  // the second-kind coefficient at a polyhedron vertex is the solid-angle
  // fraction omega/4pi (phi - [W phi]+ contributes 1 - jump), not 1/2
  const Vector second_kind = Vector::Ones(ns) - ws.jump_w;
  sys.a.block(nv, nv, ns, ns) = Matrix(second_kind.asDiagonal()) + w_bnd;
  sys.rhs.tail(ns) = gather_boundary(*ws.mesh, Vector(ws.pot + ws.vsl * psi0));
  return sys;
}

BdieSystem perturb(const BdieWorkspace& ws, const BdieSystem& system) {
  if (system.label != SystemLabel::N1 && system.label != SystemLabel::N2)
    throw std::invalid_argument("perturb: only the Neumann systems are perturbed");
  const int nv = ws.n_u(), ns = ws.n_s();
  const Vector m1 = ws.bops.M11 * Vector::Ones(ns);

  // g0 row functional: mean of phi over the boundary
  Vector row = Vector::Zero(nv + ns);
  row.tail(ns) = m1 / ws.boundary_area;

  // determinant conditions of the finite-dimensional perturbation theorem
  Vector u0 = Vector::Ones(nv + ns);
  const double g0_u0 = row.dot(u0);
  if (std::abs(g0_u0 - 1.0) > 1e-10)
    throw std::runtime_error("perturb: g0(U0) != 1, broken discretization");

  Vector col = Vector::Zero(nv + ns);
  BdieSystem out = system;
  if (system.label == SystemLabel::N1) {
    // G1 = (0, 1): dual representation of 1 in the scaled second-block rows
    col.tail(ns) = ws.row_scale_p1.asDiagonal() * m1;
    DomainDensity zero_f1 = DomainDensity::zero(*ws.mesh);
    BoundaryDensity one_f2 = BoundaryDensity::p0(ws.mesh->surface);
    one_f2.values.setOnes();
    const double g1 = cokernel_g1(zero_f1, one_f2, ws.kase.a, ws.cfg);
    if (!(std::abs(g1) > 1e-12 * ws.boundary_area))
      throw std::runtime_error("perturb: g*1(G1) vanishes");
    out.label = SystemLabel::N1hat;
  } else {
    // G2 = (1/a, gamma+ 1/a) hits collocated rows in both blocks
    for (int i = 0; i < nv; ++i) col[i] = 1.0 / ws.kase.a(ws.mesh->vertices[i]);
    for (int v = 0; v < ns; ++v)
      col[nv + v] = 1.0 / ws.kase.a(ws.mesh->surface.vertices[v]);
    Vector f1(nv), f2(ns);
    f1 = col.head(nv);
    f2 = col.tail(ns);
    double scale = 0.0;
    const double g2 = cokernel_g2_parts(ws, f1, f2, &scale);
    if (!(g2 < 0.0))
      throw std::runtime_error("perturb: g*2(G2) is not negative");
    out.label = SystemLabel::N2hat;
  }
  out.a += col * row.transpose();
  return out;
}

SolveReport solve(const BdieSystem& system) {
  SolveReport rep;
  Vector x;
  try {
    x = linalg::lu_solve(system.a, system.rhs);
  } catch (const std::runtime_error&) {
    x = linalg::lstsq(system.a, system.rhs);
  }
  const double rhs_norm = system.rhs.norm();
  rep.residual = (system.a * x - system.rhs).norm() / (rhs_norm > 0 ? rhs_norm : 1.0);
  rep.u = x.head(system.n_u);
  rep.boundary = x.tail(system.n_b);
  return rep;
}

SolveReport null_space(const BdieSystem& system) {
  SolveReport rep;
  const auto dec = linalg::svd(system.a);
  const int n = static_cast<int>(dec.sigma.size());
  const int k = std::min(3, n);
  rep.smallest_sv = Vector(k);
  rep.null_vectors = Matrix(system.a.cols(), k);
  for (int i = 0; i < k; ++i) {
    rep.smallest_sv[i] = dec.sigma[n - 1 - i];
    rep.null_vectors.col(i) = dec.v.col(n - 1 - i);
  }
  rep.sigma_max = dec.sigma[0];
  rep.condition = dec.sigma[n - 1] > 0 ? dec.sigma[0] / dec.sigma[n - 1]
                                       : std::numeric_limits<double>::infinity();
  return rep;
}

double solvability_neumann(const ManufacturedCase& c, const VolumeMesh& mesh,
                           const QuadratureConfig& cfg) {
  if (!c.neumann) throw std::invalid_argument("solvability_neumann: no Neumann datum");
  DomainDensity ones = DomainDensity::zero(mesh);
  ones.values.setOnes();
  const double vol_part = pair_rhs(c.rhs, ones, cfg.volume_order);
  const SurfaceMesh& s = mesh.surface;
  const QuadratureRule rule = quadrature_for(ElementKind::Triangle, cfg.surface_order);
  double surf = 0.0;
  for (int t = 0; t < s.num_triangles(); ++t) {
    const Vec3 n = s.triangle_normals[t];
    tri_quad(triangle_corners(s, t), rule,
             [&](const Vec3& x, double w) { surf += w * c.neumann(x, n); });
  }
  return vol_part - surf;
}

double cokernel_g1(const DomainDensity& f1, const BoundaryDensity& f2, const Coefficient& a,
                   const QuadratureConfig& cfg) {
  if (f2.space != BoundarySpace::P0)
    throw std::invalid_argument("cokernel_g1: second component must be P0");
  f2.check();
  const SurfaceMesh& s = *f2.mesh;
  double acc = f2.values.dot(Vector::Map(s.areas.data(), s.areas.size()));
  if (!a.constant && f1.mesh) {
    const VolumeMesh& mesh = *f1.mesh;
    const QuadratureRule rule = quadrature_for(ElementKind::Triangle, cfg.surface_order);
    for (int t = 0; t < s.num_triangles(); ++t) {
      const auto& tri = s.triangles[t];
      const auto c = triangle_corners(s, t);
      const Vec3 n = s.triangle_normals[t];
      const double v0 = f1.values[mesh.surface_to_volume[tri[0]]];
      const double v1 = f1.values[mesh.surface_to_volume[tri[1]]];
      const double v2 = f1.values[mesh.surface_to_volume[tri[2]]];
      tri_quad(c, rule, [&](const Vec3& x, double w) {
        const double b1 = ((c[1] - c[0]).cross(c[2] - c[0])).dot(n);
        const double lam1 = ((x - c[0]).cross(c[2] - c[0])).dot(n) / b1;
        const double lam2 = ((c[1] - c[0]).cross(x - c[0])).dot(n) / b1;
        const double lam0 = 1.0 - lam1 - lam2;
        const double trace = lam0 * v0 + lam1 * v1 + lam2 * v2;
        acc += w * trace * n.dot(a.gradient(x));
      });
    }
  }
  return acc;
}

double cokernel_g1_dual(const BdieWorkspace& ws, const Vector& f1_nodal, const Vector& f2_dual) {
  // partition of unity: pairing the dual data against gamma+ u0 = 1 is the
  // plain sum of the dual coefficients
  double acc = f2_dual.sum();
  DomainDensity f1{f1_nodal, ws.mesh};
  if (!ws.kase.a.constant) {
    BoundaryDensity zero = BoundaryDensity::p0(ws.mesh->surface);
    acc += cokernel_g1(f1, zero, ws.kase.a, ws.cfg);
  }
  return acc;
}

double cokernel_g1_dual_scale(const BdieWorkspace& ws, const Vector& f1_nodal,
                              const Vector& f2_dual) {
  double acc = f2_dual.cwiseAbs().sum();
  if (!ws.kase.a.constant) {
    DomainDensity f1{f1_nodal.cwiseAbs(), ws.mesh};
    BoundaryDensity zero = BoundaryDensity::p0(ws.mesh->surface);
    acc += std::abs(cokernel_g1(f1, zero, ws.kase.a, ws.cfg));
  }
  return std::max(acc, 1e-30);
}

double cokernel_g2(const DomainDensity& f1, const BoundaryDensity& f2, const Coefficient& a,
                   const BoundaryOps& bops) {
  if (f2.space != BoundarySpace::P1)
    throw std::invalid_argument("cokernel_g2: second component must be P1");
  f2.check();
  const VolumeMesh& mesh = *f1.mesh;
  const int ns = mesh.surface.num_vertices();
  Vector h(ns), f2a(ns);
  for (int v = 0; v < ns; ++v) {
    const double av = a(mesh.surface.vertices[v]);
    h[v] = av * f1.values[mesh.surface_to_volume[v]];
    f2a[v] = av * f2.values[v];
  }
  const Vector omega = linalg::lu_solve(bops.V0, bops.areas);
  const Vector wpo = bops.Wp0 * omega;
  const Vector mo = bops.M01.transpose() * omega;  // <omega, hat_v> pairing
  const double term1 = 0.5 * mo.dot(h) + wpo.dot(h);
  const double term2 = 0.5 * mo.dot(f2a) - wpo.dot(f2a);
  return -(term1 + term2);
}

double cokernel_g2_parts(const BdieWorkspace& ws, const Vector& f1_nodal, const Vector& f2_nodal,
                         double* scale) {
  const VolumeMesh& mesh = *ws.mesh;
  const int ns = ws.n_s();
  Vector h(ns), f2a(ns);
  for (int v = 0; v < ns; ++v) {
    const double av = ws.kase.a(mesh.surface.vertices[v]);
    h[v] = av * f1_nodal[mesh.surface_to_volume[v]];
    f2a[v] = av * f2_nodal[v];
  }
  const Vector omega = linalg::lu_solve(ws.bops.V0, ws.bops.areas);
  const Vector wpo = ws.bops.Wp0 * omega;
  const Vector mo = ws.bops.M01.transpose() * omega;
  const double term1 = 0.5 * mo.dot(h) + wpo.dot(h);
  const double term2 = 0.5 * mo.dot(f2a) - wpo.dot(f2a);
  if (scale) {
    *scale = 0.5 * mo.cwiseAbs().dot(h.cwiseAbs()) + wpo.cwiseAbs().dot(h.cwiseAbs()) +
             0.5 * mo.cwiseAbs().dot(f2a.cwiseAbs()) + wpo.cwiseAbs().dot(f2a.cwiseAbs());
    *scale = std::max(*scale, 1e-30);
  }
  return -(term1 + term2);
}

NeumannRhsParts neumann_rhs_parts(const BdieWorkspace& ws, SystemLabel label,
                                  const std::optional<Vector>& psi0_override) {
  const Vector psi0 = psi0_override.value_or(ws.psi0);
  NeumannRhsParts parts;
  parts.f1_nodal = ws.pot + ws.vsl * psi0;
  if (label == SystemLabel::N1) {
    parts.f2 = ws.fc_dual - 0.5 * (ws.trace.pairing * psi0) + ws.bops.Wp * psi0;
  } else if (label == SystemLabel::N2) {
    parts.f2 = gather_boundary(*ws.mesh, parts.f1_nodal);
  } else {
    throw std::invalid_argument("neumann_rhs_parts: N1 or N2 expected");
  }
  return parts;
}

EquivalenceReport equivalence_check(const BdieWorkspace& ws, bool dirichlet) {
  EquivalenceReport rep{};
  const VolumeMesh& mesh = *ws.mesh;
  if (!ws.kase.u) throw std::invalid_argument("equivalence_check: case has no exact solution");
  const DomainDensity u_exact = DomainDensity::interpolate(mesh, ws.kase.u);
  const double u_norm = u_exact.values.norm();

  if (dirichlet) {
    const SolveReport r1 = solve(assemble_d1(ws));
    const SolveReport r2 = solve(assemble_d2(ws));
    rep.u_cross_diff = (r1.u - r2.u).norm() / u_norm;
    rep.u_err_first = (r1.u - u_exact.values).norm() / u_norm;
    rep.u_err_second = (r2.u - u_exact.values).norm() / u_norm;
    const ConormalResult tref =
        generalized_conormal(ws.kase.rhs, u_exact, ws.kase.a, ws.cfg);
    const double tnorm = surface_l2(tref.density.values, ws.bops.areas);
    rep.boundary_cross_diff =
        surface_l2(r1.boundary - r2.boundary, ws.bops.areas) / std::max(tnorm, 1e-14);
    rep.boundary_vs_reference =
        surface_l2(r1.boundary - tref.density.values, ws.bops.areas) / std::max(tnorm, 1e-14);
  } else {
    const SolveReport r1 = solve(perturb(ws, assemble_n1(ws)));
    const SolveReport r2 = solve(perturb(ws, assemble_n2(ws)));
    const Vector m1 = ws.bops.M11 * Vector::Ones(ws.n_s());
    Vector phi_exact = gather_boundary(mesh, u_exact.values);
    const double mean = m1.dot(phi_exact) / ws.boundary_area;
    phi_exact.array() -= mean;
    Vector u_adj = u_exact.values.array() - mean;
    const double n_adj = std::max(u_adj.norm(), 1e-14);
    rep.u_cross_diff = (r1.u - r2.u).norm() / n_adj;
    rep.u_err_first = (r1.u - u_adj).norm() / n_adj;
    rep.u_err_second = (r2.u - u_adj).norm() / n_adj;
    const double pnorm = std::max(phi_exact.norm(), 1e-14);
    rep.boundary_cross_diff = (r1.boundary - r2.boundary).norm() / pnorm;
    rep.boundary_vs_reference = (r2.boundary - phi_exact).norm() / pnorm;
    rep.solvability = solvability_neumann(ws.kase, mesh, ws.cfg);
  }
  return rep;
}

// Appendix-style approximation of the generalised conormal derivative by the
// conormal derivatives of solutions with mollified data (declared in
// conormal.hpp; lives here because it drives the D1 system).
std::vector<double> smooth_approx_convergence(const ManufacturedCase& c, const VolumeMesh& mesh,
                                              int k_max, const QuadratureConfig& cfg) {
  if (!c.dirichlet) throw std::invalid_argument("smooth_approx_convergence: Dirichlet case needed");
  const double r0 = mesh.surface.radius;
  const BdieWorkspace ws = build_workspace(c, mesh, cfg);

  const SolveReport ref = solve(assemble_d1(ws));
  DomainDensity u_ref{ref.u, &mesh};
  const ConormalResult t_ref = generalized_conormal(c.rhs, u_ref, c.a, cfg);

  std::vector<double> errors;
  for (int k = 1; k <= k_max; ++k) {
    const double rho = r0 * (1.0 - 1.0 / k);
    ExtendedRhs mollified;
    mollified.f0 = c.rhs.f0;
    if (c.rhs.flux) {
      auto flux = c.rhs.flux;
      mollified.flux = [flux, rho](const Vec3& x, int) -> Vec3 {
        const double r = x.norm();
        if (r <= rho || r < 1e-14) return flux(x, -1);
        return flux(Vec3((rho / r) * x), -1);
      };
    }
    const BdieWorkspace wsk = with_rhs(ws, mollified);
    const SolveReport sol = solve(assemble_d1(wsk));
    DomainDensity uk{sol.u, &mesh};
    const ConormalResult tk = generalized_conormal(mollified, uk, c.a, cfg);
    errors.push_back(surface_l2(tk.density.values - t_ref.density.values, ws.bops.areas));
  }
  return errors;
}

}  // namespace bdie

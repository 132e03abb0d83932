#include "bdie/conormal.hpp"

#include "bdie/integration.hpp"
#include "bdie/geometry.hpp"
#include "bdie/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace bdie {

TraceP0Pairing make_trace_pairing(const VolumeMesh& mesh) {
  const SurfaceMesh& s = mesh.surface;
  const int ns = s.num_vertices();
  const int nt = s.num_triangles();
  TraceP0Pairing tp;
  tp.pairing = Matrix::Zero(ns, nt);
  tp.areas = Vector::Zero(nt);
  for (int t = 0; t < nt; ++t) {
    tp.areas[t] = s.areas[t];
    for (int k = 0; k < 3; ++k) tp.pairing(s.triangles[t][k], t) = s.areas[t] / 3.0;
  }
  // Lumped-mass flux recovery with a gradient shift correction: the nodal
  // value q_v = b_v / <hat_v,1> estimates the flux at the hat-mass centroid
  // x~_v rather than at the vertex, so the per-triangle average is corrected
  // by the recovered surface gradient times the centroid offset. Exact for
  // linear flux fields; unlike an exact interpolation of the dual data it
  // does not chase per-vertex noise.
  const Vector m1 = tp.pairing * Vector::Ones(nt);  // <hat_v, 1>
  std::vector<Vec3> hat_centroid(ns, Vec3::Zero());
  for (int t = 0; t < nt; ++t) {
    const auto& tri = s.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const Vec3 weighted = (s.areas[t] / 12.0) *
                            (2.0 * s.vertices[tri[k]] + s.vertices[tri[(k + 1) % 3]] +
                             s.vertices[tri[(k + 2) % 3]]);
      hat_centroid[tri[k]] += weighted;
    }
  }
  for (int v = 0; v < ns; ++v) hat_centroid[v] /= m1[v];
  tp.lift = Matrix::Zero(nt, ns);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = s.triangles[t];
    const auto grads = triangle_hat_gradients(s, t);
    Vec3 offset = s.centroid(t);
    for (int k = 0; k < 3; ++k) offset -= hat_centroid[tri[k]] / 3.0;
    for (int k = 0; k < 3; ++k) {
      const int v = tri[k];
      tp.lift(t, v) = (1.0 / 3.0 + grads[k].dot(offset)) / m1[v];
    }
  }
  tp.boundary_vertices = mesh.surface_to_volume;
  return tp;
}

ConormalLifter::ConormalLifter(const VolumeMesh& mesh, const SparseMatrix& stiffness) {
  for (int i = 0; i < mesh.num_vertices(); ++i)
    if (!mesh.is_boundary_vertex(i)) interior_.push_back(i);
  boundary_ = mesh.surface_to_volume;  // boundary block in surface order
  const Matrix k = Matrix(stiffness);
  const int ni = static_cast<int>(interior_.size());
  const int nb = static_cast<int>(boundary_.size());
  Matrix k_ii(ni, ni);
  k_ib_.resize(ni, nb);
  k_bi_.resize(nb, ni);
  k_bb_.resize(nb, nb);
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < ni; ++j) k_ii(i, j) = k(interior_[i], interior_[j]);
    for (int j = 0; j < nb; ++j) k_ib_(i, j) = k(interior_[i], boundary_[j]);
  }
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < ni; ++j) k_bi_(i, j) = k(boundary_[i], interior_[j]);
    for (int j = 0; j < nb; ++j) k_bb_(i, j) = k(boundary_[i], boundary_[j]);
  }
  k_ii_.compute(k_ii);
}

Vector ConormalLifter::boundary_dual(const Vector& g, const Vector& wb) const {
  const int ni = static_cast<int>(interior_.size());
  const int nb = static_cast<int>(boundary_.size());
  Vector g_i(ni), g_b(nb);
  for (int i = 0; i < ni; ++i) g_i[i] = g[interior_[i]];
  for (int i = 0; i < nb; ++i) g_b[i] = g[boundary_[i]];
  const Vector w_i = k_ii_.solve(Vector(-(g_i + k_ib_ * wb)));
  return g_b + k_bb_ * wb + k_bi_ * w_i;
}

Matrix ConormalLifter::boundary_dual_matrix(const Matrix& g, const Matrix& wb) const {
  const int ni = static_cast<int>(interior_.size());
  const int nb = static_cast<int>(boundary_.size());
  Matrix g_i(ni, g.cols()), g_b(nb, g.cols());
  for (int i = 0; i < ni; ++i) g_i.row(i) = g.row(interior_[i]);
  for (int i = 0; i < nb; ++i) g_b.row(i) = g.row(boundary_[i]);
  const Matrix w_i = k_ii_.solve(Matrix(-(g_i + k_ib_ * wb)));
  return g_b + k_bb_ * wb + k_bi_ * w_i;
}

namespace {

double p0_norm(const Vector& t, const Vector& areas) {
  return std::sqrt(t.cwiseAbs2().dot(areas));
}

}  // namespace

ConormalResult generalized_conormal(const ExtendedRhs& rhs, const DomainDensity& u,
                                    const Coefficient& a, const QuadratureConfig& cfg) {
  u.check();
  const VolumeMesh& mesh = *u.mesh;
  const TraceP0Pairing tp = make_trace_pairing(mesh);
  const FemMatrices fem = assemble_fem(a, mesh, cfg);
  const Vector b_f = pair_rhs_all_hats(rhs, mesh, cfg.volume_order);

  // consistency defect of the raw pair on the interior hats
  const Vector raw = b_f + fem.stiffness * u.values;
  double interior2 = 0.0;
  for (int i = 0; i < mesh.num_vertices(); ++i)
    if (!mesh.is_boundary_vertex(i)) interior2 += raw[i] * raw[i];

  const int ns = mesh.surface.num_vertices();
  Vector wb(ns);
  for (int v = 0; v < ns; ++v) wb[v] = u.values[mesh.surface_to_volume[v]];
  const ConormalLifter lifter(mesh, fem.stiffness);
  const Vector b_bnd = lifter.boundary_dual(b_f, wb);

  ConormalResult res;
  res.density = BoundaryDensity::p0(mesh.surface);
  res.density.values = tp.lift * b_bnd;
  const Vector m1 = tp.pairing * Vector::Ones(mesh.surface.num_triangles());
  const Vector q = b_bnd.cwiseQuotient(m1);
  res.residual = (m1.cwiseProduct(q) - b_bnd).norm() / (1.0 + b_bnd.norm());
  res.interior_residual = std::sqrt(interior2);
  res.flavor = ConormalFlavor::Generalized;
  return res;
}

ConormalResult canonical_conormal(const ExtendedRhs& rhs, const DomainDensity& u,
                                  const Coefficient& a, const QuadratureConfig& cfg) {
  if (rhs.flux)
    throw std::invalid_argument(
        "canonical_conormal: canonical extension requires an L2 right-hand side");
  ConormalResult res = generalized_conormal(rhs, u, a, cfg);
  res.flavor = ConormalFlavor::Canonical;
  return res;
}

ExtendedRhs rhs_linear_combination(double a1, const ExtendedRhs& r1, double a2,
                                   const ExtendedRhs& r2) {
  ExtendedRhs out;
  if (r1.f0 || r2.f0) {
    auto f1 = r1.f0, f2 = r2.f0;
    out.f0 = [a1, f1, a2, f2](const Vec3& x) {
      return (f1 ? a1 * f1(x) : 0.0) + (f2 ? a2 * f2(x) : 0.0);
    };
  }
  if (r1.flux || r2.flux) {
    auto g1 = r1.flux, g2 = r2.flux;
    out.flux = [a1, g1, a2, g2](const Vec3& x, int hint) -> Vec3 {
      Vec3 v = Vec3::Zero();
      if (g1) v += a1 * g1(x, hint);
      if (g2) v += a2 * g2(x, hint);
      return v;
    };
    const bool ok1 = !r1.flux || r1.flux_potential;
    const bool ok2 = !r2.flux || r2.flux_potential;
    if (ok1 && ok2) {
      auto p1 = r1.flux_potential, p2 = r2.flux_potential;
      out.flux_potential = [a1, p1, a2, p2](const Vec3& x) {
        return (p1 ? a1 * p1(x) : 0.0) + (p2 ? a2 * p2(x) : 0.0);
      };
    }
  }
  out.boundary_singular = r1.boundary_singular || r2.boundary_singular;
  return out;
}

double conormal_linearity_check(const ExtendedRhs& f1, const DomainDensity& u1,
                                const ExtendedRhs& f2, const DomainDensity& u2, double a1,
                                double a2, const Coefficient& a, const QuadratureConfig& cfg) {
  if (u1.mesh != u2.mesh)
    throw std::invalid_argument("conormal_linearity_check: mesh mismatch");
  DomainDensity u12 = DomainDensity::zero(*u1.mesh);
  u12.values = a1 * u1.values + a2 * u2.values;
  const ExtendedRhs f12 = rhs_linear_combination(a1, f1, a2, f2);
  const ConormalResult t12 = generalized_conormal(f12, u12, a, cfg);
  const ConormalResult t1 = generalized_conormal(f1, u1, a, cfg);
  const ConormalResult t2 = generalized_conormal(f2, u2, a, cfg);
  const Vector diff = t12.density.values - a1 * t1.density.values - a2 * t2.density.values;
  Vector areas(u1.mesh->surface.num_triangles());
  for (int t = 0; t < areas.size(); ++t) areas[t] = u1.mesh->surface.areas[t];
  return p0_norm(diff, areas);
}

namespace {

std::vector<EvalTarget> interior_checkpoints(const VolumeMesh& mesh) {
  std::vector<EvalTarget> pts;
  const double r0 = mesh.surface.radius;
  for (int i = 0; i < mesh.num_vertices(); ++i)
    if (r0 - mesh.vertices[i].norm() >= 0.2 * r0) pts.push_back({mesh.vertices[i], i});
  return pts;
}

BoundaryDensity trace_of(const DomainDensity& u) {
  const VolumeMesh& mesh = *u.mesh;
  BoundaryDensity tr = BoundaryDensity::p1(mesh.surface);
  for (int v = 0; v < mesh.surface.num_vertices(); ++v)
    tr.values[v] = u.values[mesh.surface_to_volume[v]];
  return tr;
}

GreenReport green_report(const Vector& residual, const Vector& scale_field) {
  GreenReport rep;
  rep.checkpoints = static_cast<int>(residual.size());
  rep.absolute_residual = residual.norm();
  const double scale = scale_field.norm();
  rep.relative_residual = scale > 1e-14 ? rep.absolute_residual / scale : rep.absolute_residual;
  return rep;
}

}  // namespace

GreenReport third_green_residual(const DomainDensity& u, const Coefficient& a,
                                 const QuadratureConfig& cfg) {
  u.check();
  const VolumeMesh& mesh = *u.mesh;
  const auto targets = interior_checkpoints(mesh);
  const ExtendedRhs flux_rhs = rhs_discrete_flux(u, a);
  const Vector pau = volume_potential_rhs(flux_rhs, a, mesh, targets, cfg);
  const Vector ru = remainder_potential(u, a, targets, cfg);
  const Vector wtr = double_layer(trace_of(u), a, mesh.surface, targets, cfg);
  Vector res(targets.size()), uvals(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double ui = u.values[targets[i].vertex];
    uvals[i] = ui;
    res[i] = ui + ru[i] + wtr[i] - pau[i];
  }
  return green_report(res, uvals);
}

GreenReport generalized_third_green_residual(const DomainDensity& u, const ExtendedRhs& rhs,
                                             const Coefficient& a, const QuadratureConfig& cfg) {
  u.check();
  const VolumeMesh& mesh = *u.mesh;
  const auto targets = interior_checkpoints(mesh);
  const ConormalResult tplus = generalized_conormal(rhs, u, a, cfg);
  const Vector pf = volume_potential_rhs(rhs, a, mesh, targets, cfg);
  const Vector ru = remainder_potential(u, a, targets, cfg);
  const Vector wtr = double_layer(trace_of(u), a, mesh.surface, targets, cfg);
  const Vector vpsi = single_layer(tplus.density, a, mesh.surface, targets, cfg);
  Vector res(targets.size()), uvals(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double ui = u.values[targets[i].vertex];
    uvals[i] = ui;
    res[i] = ui + ru[i] - vpsi[i] + wtr[i] - pf[i];
  }
  return green_report(res, uvals);
}

double second_green_residual(const ManufacturedCase& cu, const ManufacturedCase& cv,
                             const VolumeMesh& mesh, const QuadratureConfig& cfg) {
  if (cu.rhs.flux || cv.rhs.flux)
    throw std::invalid_argument("second_green_residual: needs L2 right-hand sides");
  const DomainDensity u = DomainDensity::interpolate(mesh, cu.u);
  const DomainDensity v = DomainDensity::interpolate(mesh, cv.u);
  const Coefficient& a = cu.a;

  const ConormalResult tu = canonical_conormal(cu.rhs, u, a, cfg);
  const ConormalResult tv = canonical_conormal(cv.rhs, v, a, cfg);

  // int (v Au - u Av) with the exact solution closures
  double vol = 0.0;
  const QuadratureRule rule = quadrature_for(ElementKind::Tetrahedron, cfg.volume_order);
  for (int t = 0; t < mesh.num_tets(); ++t) {
    tet_quad(tet_corners(mesh, t), rule, [&](const Vec3& x, double w) {
      const double au = cu.rhs.f0 ? cu.rhs.f0(x) : 0.0;
      const double av = cv.rhs.f0 ? cv.rhs.f0(x) : 0.0;
      vol += w * (cv.u(x) * au - cu.u(x) * av);
    });
  }

  const TraceP0Pairing tp = make_trace_pairing(mesh);
  const BoundaryDensity trv = trace_of(v), tru = trace_of(u);
  const double bu = (tp.pairing * tu.density.values).dot(trv.values);
  const double bv = (tp.pairing * tv.density.values).dot(tru.values);
  return std::abs(vol - bu + bv);
}

}  // namespace bdie

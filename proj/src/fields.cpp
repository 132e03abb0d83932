#include "bdie/fields.hpp"

#include "bdie/integration.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace bdie {

Coefficient coefficient_one() {
  Coefficient c;
  c.name = "one";
  c.value = [](const Vec3&) { return 1.0; };
  c.gradient = [](const Vec3&) { return Vec3::Zero(); };
  c.laplacian = [](const Vec3&) { return 0.0; };
  c.constant = true;
  return c;
}

Coefficient coefficient_one_plus_r2() {
  Coefficient c;
  c.name = "one_plus_r2";
  c.value = [](const Vec3& x) { return 1.0 + x.squaredNorm(); };
  c.gradient = [](const Vec3& x) { return Vec3(2.0 * x); };
  c.laplacian = [](const Vec3&) { return 6.0; };
  return c;
}

Coefficient coefficient_one_plus_x1() {
  Coefficient c;
  c.name = "one_plus_x1";
  c.value = [](const Vec3& x) { return 1.0 + x.x(); };
  c.gradient = [](const Vec3&) { return Vec3(1.0, 0.0, 0.0); };
  c.laplacian = [](const Vec3&) { return 0.0; };
  return c;
}

Coefficient coefficient_by_name(const std::string& name) {
  if (name == "one") return coefficient_one();
  if (name == "one_plus_r2") return coefficient_one_plus_r2();
  if (name == "one_plus_x1") return coefficient_one_plus_x1();
  throw std::invalid_argument("unknown coefficient: " + name);
}

ExtendedRhs rhs_zero() { return {}; }

ExtendedRhs rhs_regular(std::function<double(const Vec3&)> f0) {
  ExtendedRhs r;
  r.f0 = std::move(f0);
  return r;
}

ExtendedRhs rhs_discrete_flux(const DomainDensity& u, const Coefficient& a) {
  u.check();
  const VolumeMesh* mesh = u.mesh;
  auto grads = std::make_shared<std::vector<Vec3>>(mesh->num_tets(), Vec3::Zero());
  for (int t = 0; t < mesh->num_tets(); ++t) {
    const auto g = tet_hat_gradients(*mesh, t);
    for (int k = 0; k < 4; ++k) (*grads)[t] += u.values[mesh->tets[t][k]] * g[k];
  }
  ExtendedRhs r;
  r.flux = [mesh, grads, a](const Vec3& x, int hint) -> Vec3 {
    int t = hint;
    if (t < 0) t = locate_tet(*mesh, x);
    if (t < 0) throw std::runtime_error("rhs_discrete_flux: point outside the mesh");
    return a(x) * (*grads)[t];
  };
  return r;
}

std::vector<ManufacturedCase> builtin_cases(double r0) {
  std::vector<ManufacturedCase> cases;

  {  // MS0: harmonic linear, homogeneous rhs
    ManufacturedCase c;
    c.name = "MS0";
    c.a = coefficient_one();
    c.u = [](const Vec3& x) { return x.x(); };
    c.grad_u = [](const Vec3&) { return Vec3(1.0, 0.0, 0.0); };
    c.rhs = rhs_zero();
    c.dirichlet = c.u;
    c.neumann = [](const Vec3&, const Vec3& n) { return n.x(); };
    cases.push_back(std::move(c));
  }
  {  // MS1: Laplace with constant volume source
    ManufacturedCase c;
    c.name = "MS1";
    c.a = coefficient_one();
    c.u = [](const Vec3& x) { return x.x() * x.x() + x.y() * x.y(); };
    c.grad_u = [](const Vec3& x) { return Vec3(2.0 * x.x(), 2.0 * x.y(), 0.0); };
    c.rhs = rhs_regular([](const Vec3&) { return 4.0; });
    c.dirichlet = c.u;
    c.neumann = [](const Vec3& x, const Vec3& n) {
      return 2.0 * x.x() * n.x() + 2.0 * x.y() * n.y();
    };
    cases.push_back(std::move(c));
  }
  {  // MS2: variable coefficient, linear solution
    ManufacturedCase c;
    c.name = "MS2";
    c.a = coefficient_one_plus_r2();
    c.u = [](const Vec3& x) { return x.x(); };
    c.grad_u = [](const Vec3&) { return Vec3(1.0, 0.0, 0.0); };
    c.rhs = rhs_regular([](const Vec3& x) { return 2.0 * x.x(); });
    c.dirichlet = c.u;
    auto a = c.a;
    c.neumann = [a](const Vec3& x, const Vec3& n) { return a(x) * n.x(); };
    cases.push_back(std::move(c));
  }
  {  // MS-A: H^1 solution whose classical conormal derivative blows up;
     // the flux extension makes the generalised one vanish identically.
    ManufacturedCase c;
    c.name = "MS-A";
    c.a = coefficient_one();
    const double r2 = r0 * r0;
    c.u = [r2](const Vec3& x) {
      return std::pow(std::max(r2 - x.squaredNorm(), 0.0), 0.75);
    };
    c.grad_u = [r2](const Vec3& x) -> Vec3 {
      const double s = r2 - x.squaredNorm();
      if (s <= 0.0) throw std::domain_error("MS-A gradient evaluated on |x| >= r0");
      return -1.5 * std::pow(s, -0.25) * x;
    };
    ExtendedRhs rhs;
    rhs.flux = [r2](const Vec3& x, int) -> Vec3 {
      const double s = r2 - x.squaredNorm();
      if (s <= 0.0) return Vec3::Zero();
      return -1.5 * std::pow(s, -0.25) * x;
    };
    rhs.flux_potential = c.u;
    rhs.boundary_singular = true;
    c.rhs = std::move(rhs);
    c.dirichlet = [](const Vec3&) { return 0.0; };
    c.neumann = [](const Vec3&, const Vec3&) { return 0.0; };
    c.smooth = false;
    cases.push_back(std::move(c));
  }
  {  // MSK: constant solution, kernel case for the Neumann systems
    ManufacturedCase c;
    c.name = "MSK";
    c.a = coefficient_one_plus_r2();
    c.u = [](const Vec3&) { return 1.0; };
    c.grad_u = [](const Vec3&) { return Vec3::Zero(); };
    c.rhs = rhs_zero();
    c.dirichlet = [](const Vec3&) { return 1.0; };
    c.neumann = [](const Vec3&, const Vec3&) { return 0.0; };
    cases.push_back(std::move(c));
  }
  return cases;
}

ManufacturedCase case_by_name(const std::string& name, double r0) {
  for (auto& c : builtin_cases(r0))
    if (c.name == name) return c;
  throw std::invalid_argument("unknown manufactured case: " + name);
}

double energy_form(const Coefficient& a, const DomainDensity& u, const DomainDensity& v,
                   int quad_order) {
  u.check();
  v.check();
  if (u.mesh != v.mesh)
    throw std::invalid_argument("energy_form: densities live on different meshes");
  const VolumeMesh& mesh = *u.mesh;
  const QuadratureRule rule = quadrature_for(ElementKind::Tetrahedron, quad_order);
  double total = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto g = tet_hat_gradients(mesh, t);
    Vec3 gu = Vec3::Zero(), gv = Vec3::Zero();
    for (int k = 0; k < 4; ++k) {
      gu += u.values[mesh.tets[t][k]] * g[k];
      gv += v.values[mesh.tets[t][k]] * g[k];
    }
    const double dot = gu.dot(gv);
    double acc = 0.0;
    tet_quad(tet_corners(mesh, t), rule, [&](const Vec3& x, double w) {
      const double ax = a(x);
      if (!(ax > 0.0)) throw std::runtime_error("energy_form: coefficient not positive");
      acc += w * ax;
    });
    total += acc * dot;
  }
  return total;
}

namespace {

// shared tet sweep for the weak pairing; hats evaluated on the parent tet
template <typename Accum>
void rhs_tet_sweep(const ExtendedRhs& rhs, const VolumeMesh& mesh, int t,
                   const QuadratureRule& rule, Accum&& accum) {
  const auto corners = tet_corners(mesh, t);
  const auto sink = [&](const Vec3& x, double w) { accum(x, w, t); };
  if (rhs.boundary_singular)
    tet_quad_graded_sphere(corners, rule, mesh.surface.radius, 3, sink);
  else
    tet_quad(corners, rule, sink);
}

// int_tet F dx for F = grad(chi) via the divergence identity
// int grad(chi) dx = oint chi n dS over the tet boundary; chi stays bounded
// where F blows up, so the faces only need mild grading toward the sphere.
Vec3 tet_flux_moment(const ExtendedRhs& rhs, const VolumeMesh& mesh, int t) {
  static const int faces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  const QuadratureRule rule = quadrature_for(ElementKind::Triangle, 4);
  const auto& tet = mesh.tets[t];
  Vec3 total = Vec3::Zero();
  for (const auto& f : faces) {
    const std::array<Vec3, 3> c = {mesh.vertices[tet[f[0]]], mesh.vertices[tet[f[1]]],
                                   mesh.vertices[tet[f[2]]]};
    const Vec3 n = (c[1] - c[0]).cross(c[2] - c[0]).normalized();
    const auto sink = [&](const Vec3& x, double w) { total += w * rhs.flux_potential(x) * n; };
    if (rhs.boundary_singular)
      tri_quad_graded_sphere(c, rule, mesh.surface.radius, 4, sink);
    else
      tri_quad(c, rule, sink);
  }
  return total;
}

}  // namespace

double pair_rhs(const ExtendedRhs& rhs, const DomainDensity& v, int quad_order) {
  v.check();
  if (rhs.zero()) return 0.0;
  const VolumeMesh& mesh = *v.mesh;
  const QuadratureRule rule = quadrature_for(ElementKind::Tetrahedron, quad_order);
  const bool flux_by_parts = rhs.flux && rhs.flux_potential;
  double total = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto g = tet_hat_gradients(mesh, t);
    const Vec3 anchor = mesh.vertices[mesh.tets[t][0]];
    Vec3 gv = Vec3::Zero();
    for (int k = 0; k < 4; ++k) gv += v.values[mesh.tets[t][k]] * g[k];
    const double v_anchor = v.values[mesh.tets[t][0]];
    if (flux_by_parts) total -= tet_flux_moment(rhs, mesh, t).dot(gv);
    if (rhs.f0 || (rhs.flux && !flux_by_parts)) {
      rhs_tet_sweep(rhs, mesh, t, rule, [&](const Vec3& x, double w, int tet) {
        if (rhs.f0) total += w * rhs.f0(x) * (v_anchor + gv.dot(x - anchor));
        if (rhs.flux && !flux_by_parts) total -= w * rhs.flux(x, tet).dot(gv);
      });
    }
  }
  return total;
}

Vector pair_rhs_all_hats(const ExtendedRhs& rhs, const VolumeMesh& mesh, int quad_order) {
  Vector b = Vector::Zero(mesh.num_vertices());
  if (rhs.zero()) return b;
  const QuadratureRule rule = quadrature_for(ElementKind::Tetrahedron, quad_order);
  const bool flux_by_parts = rhs.flux && rhs.flux_potential;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& tet = mesh.tets[t];
    const auto g = tet_hat_gradients(mesh, t);
    const Vec3 anchor = mesh.vertices[tet[0]];
    if (flux_by_parts) {
      const Vec3 moment = tet_flux_moment(rhs, mesh, t);
      for (int k = 0; k < 4; ++k) b[tet[k]] -= moment.dot(g[k]);
    }
    if (rhs.f0 || (rhs.flux && !flux_by_parts)) {
      rhs_tet_sweep(rhs, mesh, t, rule, [&](const Vec3& x, double w, int tt) {
        const double f0x = rhs.f0 ? rhs.f0(x) : 0.0;
        for (int k = 0; k < 4; ++k) {
          const double hat = (k == 0 ? 1.0 : 0.0) + g[k].dot(x - anchor);
          if (rhs.f0) b[tet[k]] += w * f0x * hat;
          if (rhs.flux && !flux_by_parts) b[tet[k]] -= w * rhs.flux(x, tt).dot(g[k]);
        }
      });
    }
  }
  return b;
}

double pair_rhs_hat(const ExtendedRhs& rhs, const VolumeMesh& mesh, int vertex, int quad_order) {
  if (rhs.zero()) return 0.0;
  const QuadratureRule rule = quadrature_for(ElementKind::Tetrahedron, quad_order);
  const bool flux_by_parts = rhs.flux && rhs.flux_potential;
  double total = 0.0;
  for (int t = 0; t < mesh.num_tets(); ++t) {
    int local = -1;
    for (int k = 0; k < 4; ++k)
      if (mesh.tets[t][k] == vertex) local = k;
    if (local < 0) continue;
    const auto g = tet_hat_gradients(mesh, t);
    const Vec3 anchor = mesh.vertices[mesh.tets[t][0]];
    const double hat_anchor = local == 0 ? 1.0 : 0.0;
    if (flux_by_parts) total -= tet_flux_moment(rhs, mesh, t).dot(g[local]);
    if (rhs.f0 || (rhs.flux && !flux_by_parts)) {
      rhs_tet_sweep(rhs, mesh, t, rule, [&](const Vec3& x, double w, int tet) {
        if (rhs.f0) total += w * rhs.f0(x) * (hat_anchor + g[local].dot(x - anchor));
        if (rhs.flux && !flux_by_parts) total -= w * rhs.flux(x, tet).dot(g[local]);
      });
    }
  }
  return total;
}

}  // namespace bdie

#include "bdie/oracle.hpp"

#include "bdie/kernels.hpp"
#include "bdie/quadrature.hpp"
#include "bdie/integration.hpp"

#include <cmath>
#include <numbers>

namespace bdie::oracle {

namespace {

struct Cell {
  Vec3 center;
  double half;
};

// Uniform-grid accelerated point location (the octree touches far too many
// points for the brute-force mesh scan).
class TetLocator {
 public:
  explicit TetLocator(const VolumeMesh& mesh) : mesh_(mesh) {
    const double r0 = mesh.surface.radius;
    lo_ = Vec3(-r0, -r0, -r0);
    n_ = std::max(4, static_cast<int>(std::cbrt(static_cast<double>(mesh.num_tets()))));
    h_ = 2.0 * r0 / n_;
    cells_.resize(static_cast<std::size_t>(n_) * n_ * n_);
    for (int t = 0; t < mesh.num_tets(); ++t) {
      Vec3 bmin = mesh.vertices[mesh.tets[t][0]], bmax = bmin;
      for (int k = 1; k < 4; ++k) {
        bmin = bmin.cwiseMin(mesh.vertices[mesh.tets[t][k]]);
        bmax = bmax.cwiseMax(mesh.vertices[mesh.tets[t][k]]);
      }
      int i0[3], i1[3];
      for (int d = 0; d < 3; ++d) {
        i0[d] = std::clamp(static_cast<int>((bmin[d] - lo_[d]) / h_), 0, n_ - 1);
        i1[d] = std::clamp(static_cast<int>((bmax[d] - lo_[d]) / h_), 0, n_ - 1);
      }
      for (int i = i0[0]; i <= i1[0]; ++i)
        for (int j = i0[1]; j <= i1[1]; ++j)
          for (int k = i0[2]; k <= i1[2]; ++k)
            cells_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k].push_back(t);
    }
  }

  int locate(const Vec3& x) const {
    int idx[3];
    for (int d = 0; d < 3; ++d) {
      idx[d] = static_cast<int>((x[d] - lo_[d]) / h_);
      if (idx[d] < 0 || idx[d] >= n_) return -1;
    }
    const auto& cand = cells_[(static_cast<std::size_t>(idx[0]) * n_ + idx[1]) * n_ + idx[2]];
    constexpr double tol = -1e-10;
    for (int t : cand) {
      const auto& tet = mesh_.tets[t];
      const Vec3 &a = mesh_.vertices[tet[0]], &b = mesh_.vertices[tet[1]],
                 &c = mesh_.vertices[tet[2]], &d = mesh_.vertices[tet[3]];
      const double v = mesh_.volumes[t];
      const double l1 = (x - a).cross(c - a).dot(d - a) / (6.0 * v);
      const double l2 = (b - a).cross(x - a).dot(d - a) / (6.0 * v);
      const double l3 = (b - a).cross(c - a).dot(x - a) / (6.0 * v);
      if (l1 >= tol && l2 >= tol && l3 >= tol && 1.0 - l1 - l2 - l3 >= tol) return t;
    }
    return -1;
  }

 private:
  const VolumeMesh& mesh_;
  Vec3 lo_;
  int n_{1};
  double h_{1.0};
  std::vector<std::vector<int>> cells_;
};

// A cell needs refinement when it can straddle the polyhedron boundary
// (radial range reaching into the shell between the mesh inradius and r0)
// or sits close to the focus point.
bool needs_refinement(const Cell& c, double inradius, double r0, const Vec3& focus) {
  if ((c.center - focus).norm() < 4.0 * c.half) return true;
  double minr = std::numeric_limits<double>::max(), maxr = 0.0;
  for (int dx = -1; dx <= 1; dx += 2)
    for (int dy = -1; dy <= 1; dy += 2)
      for (int dz = -1; dz <= 1; dz += 2) {
        const double r = (c.center + c.half * Vec3(dx, dy, dz)).norm();
        minr = std::min(minr, r);
        maxr = std::max(maxr, r);
      }
  return maxr >= inradius && minr <= r0;
}

double mesh_inradius(const SurfaceMesh& s) {
  double d = std::numeric_limits<double>::max();
  for (int t = 0; t < s.num_triangles(); ++t)
    d = std::min(d, s.triangle_normals[t].dot(s.centroid(t)));
  return d;
}

double octree_pass(const VolumeMesh& mesh, const TetLocator& locator,
                   const std::function<double(const Vec3&, int)>& integrand, const Vec3& focus,
                   int base_depth, int depth) {
  const double r0 = mesh.surface.radius;
  const double inradius = mesh_inradius(mesh.surface);
  double total = 0.0;
  std::function<void(const Cell&, int)> walk = [&](const Cell& c, int level) {
    const double cell_r = std::sqrt(3.0) * c.half;
    if (c.center.norm() - cell_r > r0) return;  // fully outside the ball
    const bool refine =
        level < base_depth || (level < depth && needs_refinement(c, inradius, r0, focus));
    if (refine) {
      const double h = 0.5 * c.half;
      for (int dx = -1; dx <= 1; dx += 2)
        for (int dy = -1; dy <= 1; dy += 2)
          for (int dz = -1; dz <= 1; dz += 2)
            walk({c.center + h * Vec3(dx, dy, dz), h}, level + 1);
      return;
    }
    const int tet = locator.locate(c.center);
    if (tet < 0) return;  // midpoint outside the meshed ball
    const double vol = 8.0 * c.half * c.half * c.half;
    total += vol * integrand(c.center, tet);
  };
  walk({Vec3::Zero(), r0}, 0);
  return total;
}

}  // namespace

OracleValue octree_integrate(const VolumeMesh& mesh,
                             const std::function<double(const Vec3&, int)>& integrand,
                             const Vec3& focus, int depth) {
  const TetLocator locator(mesh);
  const int base = std::clamp(depth - 2, 2, 6);
  OracleValue out;
  const double coarse = octree_pass(mesh, locator, integrand, focus,
                                    std::clamp(depth - 3, 2, 6), depth - 1);
  out.value = octree_pass(mesh, locator, integrand, focus, base, depth);
  out.error_estimate = std::abs(out.value - coarse);
  return out;
}

OracleValue brute_volume_potential(const ExtendedRhs& rhs, const Coefficient& a,
                                   const VolumeMesh& mesh, const Vec3& y, int depth) {
  if (rhs.zero()) return {};
  const double ay = a(y);
  return octree_integrate(
      mesh,
      [&](const Vec3& x, int tet) {
        double v = 0.0;
        if (rhs.f0) v += rhs.f0(x) * kernels::laplace_fs(x, y) / ay;
        if (rhs.flux) v -= rhs.flux(x, tet).dot(kernels::grad_x_laplace_fs(x, y)) / ay;
        return v;
      },
      y, depth);
}

OracleValue brute_remainder_potential(const DomainDensity& u, const Coefficient& a,
                                      const Vec3& y, int depth) {
  u.check();
  const VolumeMesh& mesh = *u.mesh;
  return octree_integrate(
      mesh,
      [&](const Vec3& x, int tet) {
        const auto g = tet_hat_gradients(mesh, tet);
        const Vec3 anchor = mesh.vertices[mesh.tets[tet][0]];
        double uval = 0.0;
        for (int k = 0; k < 4; ++k) {
          const double hat = (k == 0 ? 1.0 : 0.0) + g[k].dot(x - anchor);
          uval += hat * u.values[mesh.tets[tet][k]];
        }
        return kernels::remainder(x, y, a) * uval;
      },
      y, depth);
}

double analytic_triangle_single_layer(const std::array<Vec3, 3>& c, const Vec3& y) {
  const Vec3 nraw = (c[1] - c[0]).cross(c[2] - c[0]);
  const Vec3 n = nraw.normalized();
  const double hgt = n.dot(y - c[0]);
  const Vec3 p = y - hgt * n;
  double value = 0.0;
  double omega = 0.0;
  for (int e = 0; e < 3; ++e) {
    const Vec3 a = c[e], b = c[(e + 1) % 3];
    const Vec3 edge = b - a;
    const double len = edge.norm();
    const Vec3 shat = edge / len;
    const Vec3 mhat = shat.cross(n);
    const double t0 = mhat.dot(a - p);
    const double sa = shat.dot(a - p);
    const double sb = shat.dot(b - p);
    const double ra = (y - a).norm();
    const double rb = (y - b).norm();
    const double r02 = t0 * t0 + hgt * hgt;
    // stable edge integral of 1/r: log((ra+rb+L)/(ra+rb-L)); vanishing
    // denominator only happens for targets on the closed edge segment
    const double den = ra + rb - len;
    if (std::abs(t0) > 1e-14 * len && den > 0.0)
      value += t0 * std::log((ra + rb + len) / den);
    omega += std::atan2(t0 * sb, r02 + std::abs(hgt) * rb) -
             std::atan2(t0 * sa, r02 + std::abs(hgt) * ra);
  }
  return value - std::abs(hgt) * omega;
}

double brute_galerkin_single_layer(const SurfaceMesh& s, const Coefficient& a, const Vector& g,
                                   const Vector& h, int outer_order) {
  const QuadratureRule rule = quadrature_for(ElementKind::Triangle, outer_order);
  double total = 0.0;
  for (int te = 0; te < s.num_triangles(); ++te) {
    double row = 0.0;
    tri_quad(triangle_corners(s, te), rule, [&](const Vec3& y, double wy) {
      const double ay = a(y);
      double inner = 0.0;
      for (int se = 0; se < s.num_triangles(); ++se)
        inner += g[se] * analytic_triangle_single_layer(triangle_corners(s, se), y);
      // kernel -P = 1/(4 pi a(y) r)
      row += wy * inner / (kernels::four_pi * ay);
    });
    total += h[te] * row;
  }
  return total;
}

SphereAnalytics sphere_analytics(double r0) {
  SphereAnalytics sa;
  sa.area = 4.0 * std::numbers::pi * r0 * r0;
  sa.volume = 4.0 / 3.0 * std::numbers::pi * r0 * r0 * r0;
  sa.single_layer_constant_interior = r0;
  sa.double_layer_constant_interior = -1.0;
  sa.equilibrium_density = 1.0 / r0;
  return sa;
}

FdEstimate fd_check(const std::function<double(const Vec3&)>& f, const Vec3& x, double h) {
  FdEstimate est;
  auto grad_at = [&](double step) {
    Vec3 g;
    for (int d = 0; d < 3; ++d) {
      Vec3 e = Vec3::Zero();
      e[d] = step;
      g[d] = (f(x + e) - f(x - e)) / (2.0 * step);
    }
    return g;
  };
  auto lap_at = [&](double step) {
    double l = -6.0 * f(x);
    for (int d = 0; d < 3; ++d) {
      Vec3 e = Vec3::Zero();
      e[d] = step;
      l += f(x + e) + f(x - e);
    }
    return l / (step * step);
  };
  const Vec3 g1 = grad_at(h), g2 = grad_at(0.5 * h);
  est.gradient = (4.0 * g2 - g1) / 3.0;
  const double l1 = lap_at(h), l2 = lap_at(0.5 * h);
  est.laplacian = (4.0 * l2 - l1) / 3.0;
  return est;
}

}  // namespace bdie::oracle

#include "bdie/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <utility>

namespace bdie {

namespace {

Vec3 triangle_raw_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  return (b - a).cross(c - a);
}

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

void finalize_surface(SurfaceMesh& m) {
  const int nt = m.num_triangles();
  m.triangle_normals.resize(nt);
  m.areas.resize(nt);
  m.vertex_normals.assign(m.vertices.size(), Vec3::Zero());
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles[t];
    const Vec3 &a = m.vertices[tri[0]], &b = m.vertices[tri[1]], &c = m.vertices[tri[2]];
    Vec3 n = triangle_raw_normal(a, b, c);
    const double twice_area = n.norm();
    m.areas[t] = 0.5 * twice_area;
    n /= twice_area;
    m.triangle_normals[t] = n;
    // angle-weighted vertex normal accumulation
    const Vec3* p[3] = {&a, &b, &c};
    for (int k = 0; k < 3; ++k) {
      const Vec3 e1 = (*p[(k + 1) % 3] - *p[k]).normalized();
      const Vec3 e2 = (*p[(k + 2) % 3] - *p[k]).normalized();
      const double angle = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
      m.vertex_normals[tri[k]] += angle * n;
    }
  }
  for (auto& n : m.vertex_normals) n.normalize();
}

}  // namespace

double SurfaceMesh::total_area() const {
  double s = 0.0;
  for (double a : areas) s += a;
  return s;
}

int SurfaceMesh::euler_characteristic() const {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  return num_vertices() - static_cast<int>(edges.size()) + num_triangles();
}

Vec3 SurfaceMesh::centroid(int t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double SurfaceMesh::mesh_size() const {
  double h = 0.0;
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k)
      h = std::max(h, (vertices[t[k]] - vertices[t[(k + 1) % 3]]).norm());
  return h;
}

double VolumeMesh::total_volume() const {
  double s = 0.0;
  for (double v : volumes) s += v;
  return s;
}

SurfaceMesh build_icosphere(int subdiv, double r0) {
  if (subdiv < 0) throw std::invalid_argument("build_icosphere: subdiv must be >= 0");
  if (subdiv > 6)
    throw std::length_error("build_icosphere: subdiv > 6 exceeds the dense-matrix budget");
  if (!(r0 > 0.0)) throw std::invalid_argument("build_icosphere: radius must be positive");

  SurfaceMesh m;
  m.subdiv = subdiv;
  m.radius = r0;

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double raw[12][3] = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& p : raw) m.vertices.push_back(r0 * Vec3(p[0], p[1], p[2]).normalized());
  const int f[20][3] = {{0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                        {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                        {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                        {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (const auto& t : f) m.triangles.push_back({t[0], t[1], t[2]});

  for (int level = 0; level < subdiv; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const Vec3 p = r0 * (0.5 * (m.vertices[a] + m.vertices[b])).normalized();
      const int idx = static_cast<int>(m.vertices.size());
      m.vertices.push_back(p);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * m.triangles.size());
    for (const auto& t : m.triangles) {
      const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }

  finalize_surface(m);
  return m;
}

VolumeMesh build_ball_mesh(const SurfaceMesh& surface, int layers) {
  if (layers < 1) throw std::invalid_argument("build_ball_mesh: layers must be >= 1");
  VolumeMesh m;
  m.surface = surface;
  m.layers = layers;
  const int ns = surface.num_vertices();
  const double r0 = surface.radius;

  // vertex 0 = center; shells at geometrically graded radii so the outermost
  // gap matches the surface mesh size (resolves boundary layers at the same
  // rate as the surface refinement); shell `layers` reproduces the surface
  // vertices exactly.
  std::vector<double> radii(layers + 1, 0.0);
  radii[layers] = r0;
  if (layers > 1) {
    const double h = surface.mesh_size();
    const double g0 = std::min(h * h / r0, r0 / layers);
    double qlo = 1.0, qhi = 32.0;
    auto total = [&](double q) {
      double sum = 0.0, g = g0;
      for (int i = 0; i < layers; ++i, g *= q) sum += g;
      return sum;
    };
    for (int it = 0; it < 80; ++it) {
      const double q = 0.5 * (qlo + qhi);
      (total(q) < r0 ? qlo : qhi) = q;
    }
    const double q = 0.5 * (qlo + qhi);
    double r = r0, g = g0;
    for (int k = layers - 1; k >= 1; --k, g *= q) {
      r -= g;
      radii[k] = r;
    }
  }
  m.vertices.push_back(Vec3::Zero());
  for (int k = 1; k <= layers; ++k) {
    const double scale = radii[k] / r0;
    for (int v = 0; v < ns; ++v)
      m.vertices.push_back(k == layers ? surface.vertices[v] : Vec3(scale * surface.vertices[v]));
  }
  auto shell_index = [ns](int k, int v) { return 1 + (k - 1) * ns + v; };
  m.surface_to_volume.resize(ns);
  m.volume_to_surface.assign(m.vertices.size(), -1);
  for (int v = 0; v < ns; ++v) {
    m.surface_to_volume[v] = shell_index(layers, v);
    m.volume_to_surface[shell_index(layers, v)] = v;
  }

  auto push_tet = [&m](int a, int b, int c, int d) {
    double vol = tet_signed_volume(m.vertices[a], m.vertices[b], m.vertices[c], m.vertices[d]);
    if (vol < 0.0) {
      std::swap(c, d);
      vol = -vol;
    }
    if (!(vol > 0.0)) throw std::runtime_error("build_ball_mesh: degenerate tetrahedron");
    m.tets.push_back({a, b, c, d});
    m.volumes.push_back(vol);
  };

  // innermost layer: cones from the center to shell 1
  for (const auto& t : surface.triangles)
    push_tet(0, shell_index(1, t[0]), shell_index(1, t[1]), shell_index(1, t[2]));

  // prisms between consecutive shells, split into 3 tets; quad-face diagonals
  // run from the top of the smaller-index column to the bottom of the larger,
  // which keeps the splits conforming across neighbouring prisms.
  for (int k = 1; k < layers; ++k) {
    for (const auto& t : surface.triangles) {
      int c[3] = {t[0], t[1], t[2]};
      int rot = 0;
      for (int i = 1; i < 3; ++i)
        if (c[i] < c[rot]) rot = i;
      const int s0 = c[rot], s1 = c[(rot + 1) % 3], s2 = c[(rot + 2) % 3];
      const int p0 = shell_index(k, s0), p1 = shell_index(k, s1), p2 = shell_index(k, s2);
      const int q0 = shell_index(k + 1, s0), q1 = shell_index(k + 1, s1),
                q2 = shell_index(k + 1, s2);
      push_tet(p0, p1, p2, q0);
      if (s1 < s2) {
        push_tet(p1, p2, q1, q0);
        push_tet(p2, q2, q1, q0);
      } else {
        push_tet(p1, p2, q2, q0);
        push_tet(p1, q2, q1, q0);
      }
    }
  }

  // map each surface triangle to the tet face that carries it
  m.boundary_face.assign(surface.num_triangles(), {-1, -1});
  std::map<std::array<int, 3>, int> tri_lookup;
  for (int t = 0; t < surface.num_triangles(); ++t) {
    std::array<int, 3> key = {m.surface_to_volume[surface.triangles[t][0]],
                              m.surface_to_volume[surface.triangles[t][1]],
                              m.surface_to_volume[surface.triangles[t][2]]};
    std::sort(key.begin(), key.end());
    tri_lookup.emplace(key, t);
  }
  static const int faces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  for (int tt = 0; tt < m.num_tets(); ++tt) {
    for (int fidx = 0; fidx < 4; ++fidx) {
      std::array<int, 3> key = {m.tets[tt][faces[fidx][0]], m.tets[tt][faces[fidx][1]],
                                m.tets[tt][faces[fidx][2]]};
      std::sort(key.begin(), key.end());
      auto it = tri_lookup.find(key);
      if (it != tri_lookup.end()) m.boundary_face[it->second] = {tt, fidx};
    }
  }
  for (const auto& bf : m.boundary_face)
    if (bf[0] < 0) throw std::runtime_error("build_ball_mesh: boundary faces do not tile the surface");

  return m;
}

std::array<Vec3, 4> tet_hat_gradients(const VolumeMesh& m, int t) {
  const auto& tet = m.tets[t];
  const Vec3& a = m.vertices[tet[0]];
  Eigen::Matrix3d J;
  J.col(0) = m.vertices[tet[1]] - a;
  J.col(1) = m.vertices[tet[2]] - a;
  J.col(2) = m.vertices[tet[3]] - a;
  const Eigen::Matrix3d Jit = J.inverse().transpose();
  std::array<Vec3, 4> g;
  g[1] = Jit.col(0);
  g[2] = Jit.col(1);
  g[3] = Jit.col(2);
  g[0] = -(g[1] + g[2] + g[3]);
  return g;
}

std::array<Vec3, 3> triangle_hat_gradients(const SurfaceMesh& m, int t) {
  const auto& tri = m.triangles[t];
  const Vec3 &a = m.vertices[tri[0]], &b = m.vertices[tri[1]], &c = m.vertices[tri[2]];
  const Vec3 n = m.triangle_normals[t];
  const double twice_area = 2.0 * m.areas[t];
  // grad of hat_i is the inward normal of the opposite edge scaled by 1/height
  std::array<Vec3, 3> g;
  g[0] = n.cross(c - b) / twice_area;
  g[1] = n.cross(a - c) / twice_area;
  g[2] = n.cross(b - a) / twice_area;
  return g;
}

int locate_tet(const VolumeMesh& m, const Vec3& x, std::array<double, 4>* bary) {
  constexpr double tol = -1e-10;
  for (int t = 0; t < m.num_tets(); ++t) {
    const auto& tet = m.tets[t];
    const Vec3 &a = m.vertices[tet[0]], &b = m.vertices[tet[1]], &c = m.vertices[tet[2]],
               &d = m.vertices[tet[3]];
    const double v = m.volumes[t];
    const double l1 = tet_signed_volume(a, x, c, d) / v;
    const double l2 = tet_signed_volume(a, b, x, d) / v;
    const double l3 = tet_signed_volume(a, b, c, x) / v;
    const double l0 = 1.0 - l1 - l2 - l3;
    if (l0 >= tol && l1 >= tol && l2 >= tol && l3 >= tol) {
      if (bary) *bary = {l0, l1, l2, l3};
      return t;
    }
  }
  return -1;
}

std::vector<double> vertex_solid_angles(const VolumeMesh& m) {
  std::vector<double> omega(m.surface.num_vertices(), 0.0);
  for (int t = 0; t < m.num_tets(); ++t) {
    for (int k = 0; k < 4; ++k) {
      const int v = m.tets[t][k];
      const int sv = m.volume_to_surface[v];
      if (sv < 0) continue;
      const Vec3 apex = m.vertices[v];
      Vec3 r[3];
      int idx = 0;
      for (int j = 0; j < 4; ++j)
        if (j != k) r[idx++] = m.vertices[m.tets[t][j]] - apex;
      const double la = r[0].norm(), lb = r[1].norm(), lc = r[2].norm();
      const double numer = std::abs(r[0].dot(r[1].cross(r[2])));
      const double denom = la * lb * lc + r[0].dot(r[1]) * lc + r[0].dot(r[2]) * lb +
                           r[1].dot(r[2]) * la;
      omega[sv] += 2.0 * std::atan2(numer, denom);
    }
  }
  return omega;
}

void dump_mesh(std::ostream& os, const SurfaceMesh& m) {
  for (const auto& v : m.vertices) os << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : m.triangles)
    os << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

void dump_mesh(std::ostream& os, const VolumeMesh& m) {
  for (const auto& v : m.vertices) os << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : m.surface.triangles)
    os << "f " << m.surface_to_volume[t[0]] + 1 << " " << m.surface_to_volume[t[1]] + 1 << " "
       << m.surface_to_volume[t[2]] + 1 << "\n";
  for (const auto& t : m.tets)
    os << "t " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << " " << t[3] + 1 << "\n";
}

}  // namespace bdie

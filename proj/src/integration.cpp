#include "bdie/integration.hpp"

#include <algorithm>
#include <cmath>

namespace bdie {

namespace {

double tri_area(const std::array<Vec3, 3>& c) {
  return 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
}

double tet_volume_abs(const std::array<Vec3, 4>& c) {
  return std::abs((c[1] - c[0]).cross(c[2] - c[0]).dot(c[3] - c[0])) / 6.0;
}

double point_tet_distance(const Vec3& y, const std::array<Vec3, 4>& c) {
  // cheap lower bound: distance to the corner hull via vertices and centroid
  double d = std::numeric_limits<double>::max();
  Vec3 g = Vec3::Zero();
  for (const auto& v : c) {
    d = std::min(d, (y - v).norm());
    g += v;
  }
  d = std::min(d, (y - g / 4.0).norm());
  return d;
}

}  // namespace

std::array<Vec3, 3> triangle_corners(const SurfaceMesh& m, int t) {
  const auto& tri = m.triangles[t];
  return {m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]};
}

std::array<Vec3, 4> tet_corners(const VolumeMesh& m, int t) {
  const auto& tet = m.tets[t];
  return {m.vertices[tet[0]], m.vertices[tet[1]], m.vertices[tet[2]], m.vertices[tet[3]]};
}

double tri_diameter(const std::array<Vec3, 3>& c) {
  return std::max({(c[0] - c[1]).norm(), (c[1] - c[2]).norm(), (c[2] - c[0]).norm()});
}

double tet_diameter(const std::array<Vec3, 4>& c) {
  double d = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) d = std::max(d, (c[i] - c[j]).norm());
  return d;
}

double point_triangle_distance(const Vec3& y, const std::array<Vec3, 3>& c) {
  // project onto the plane, clamp into the triangle via barycentric logic
  const Vec3 e0 = c[1] - c[0], e1 = c[2] - c[0], d = c[0] - y;
  const double a = e0.dot(e0), b = e0.dot(e1), cc = e1.dot(e1);
  const double d0 = e0.dot(d), d1 = e1.dot(d);
  const double det = a * cc - b * b;
  double s = b * d1 - cc * d0, t = b * d0 - a * d1;
  if (s + t <= det) {
    if (s < 0) {
      if (t < 0) {  // corner 0 region
        s = std::clamp(-d0 / a, 0.0, 1.0);
        t = 0;
        if (-d1 > 0) {
          t = std::clamp(-d1 / cc, 0.0, 1.0);
          s = 0;
        }
      } else {
        s = 0;
        t = std::clamp(-d1 / cc, 0.0, 1.0);
      }
    } else if (t < 0) {
      t = 0;
      s = std::clamp(-d0 / a, 0.0, 1.0);
    } else {
      s /= det;
      t /= det;
    }
  } else {
    if (s < 0) {
      s = 0;
      t = std::clamp(-d1 / cc, 0.0, 1.0);
    } else if (t < 0) {
      t = 0;
      s = std::clamp(-d0 / a, 0.0, 1.0);
    } else {
      const double numer = cc + d1 - b - d0;
      s = std::clamp(numer / (a - 2 * b + cc), 0.0, 1.0);
      t = 1 - s;
    }
  }
  return (c[0] + s * e0 + t * e1 - y).norm();
}

void tri_quad(const std::array<Vec3, 3>& c, const QuadratureRule& rule, const QuadSink& sink) {
  const double scale = 2.0 * tri_area(c);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto& p = rule.points[q];
    sink(c[0] + p[0] * (c[1] - c[0]) + p[1] * (c[2] - c[0]), rule.weights[q] * scale);
  }
}

void tet_quad(const std::array<Vec3, 4>& c, const QuadratureRule& rule, const QuadSink& sink) {
  const double scale = 6.0 * tet_volume_abs(c);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto& p = rule.points[q];
    sink(c[0] + p[0] * (c[1] - c[0]) + p[1] * (c[2] - c[0]) + p[2] * (c[3] - c[0]),
         rule.weights[q] * scale);
  }
}

void tri_quad_duffy(const std::array<Vec3, 3>& c, int n, const QuadSink& sink) {
  const LineRule g = gauss_legendre_01(n);
  const double twice_area = 2.0 * tri_area(c);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = g.x[i], t = g.x[j];
      const Vec3 x = c[0] + s * ((c[1] - c[0]) + t * (c[2] - c[1]));
      sink(x, g.w[i] * g.w[j] * twice_area * s);
    }
}

void tet_quad_duffy(const std::array<Vec3, 4>& c, int n, const QuadSink& sink) {
  const LineRule g = gauss_legendre_01(n);
  const double six_vol = 6.0 * tet_volume_abs(c);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double s = g.x[i], t = g.x[j], u = g.x[k];
        const double alpha = s * (1.0 - t), beta = s * t * (1.0 - u), gamma = s * t * u;
        const Vec3 x = c[0] + alpha * (c[1] - c[0]) + beta * (c[2] - c[0]) + gamma * (c[3] - c[0]);
        sink(x, g.w[i] * g.w[j] * g.w[k] * six_vol * s * s * t);
      }
}

void tri_quad_near(const std::array<Vec3, 3>& c, const QuadratureRule& rule, const Vec3& y,
                   int max_depth, double theta, const QuadSink& sink) {
  if (max_depth > 0 && tri_diameter(c) > theta * point_triangle_distance(y, c)) {
    const Vec3 m01 = 0.5 * (c[0] + c[1]), m12 = 0.5 * (c[1] + c[2]), m02 = 0.5 * (c[0] + c[2]);
    tri_quad_near({c[0], m01, m02}, rule, y, max_depth - 1, theta, sink);
    tri_quad_near({m01, c[1], m12}, rule, y, max_depth - 1, theta, sink);
    tri_quad_near({m02, m12, c[2]}, rule, y, max_depth - 1, theta, sink);
    tri_quad_near({m01, m12, m02}, rule, y, max_depth - 1, theta, sink);
    return;
  }
  tri_quad(c, rule, sink);
}

namespace {

// Red refinement (Bey): 4 corner tets + central octahedron cut along m02-m13.
std::array<std::array<Vec3, 4>, 8> tet_red_children(const std::array<Vec3, 4>& c) {
  const Vec3 m01 = 0.5 * (c[0] + c[1]), m02 = 0.5 * (c[0] + c[2]), m03 = 0.5 * (c[0] + c[3]);
  const Vec3 m12 = 0.5 * (c[1] + c[2]), m13 = 0.5 * (c[1] + c[3]), m23 = 0.5 * (c[2] + c[3]);
  return {{{c[0], m01, m02, m03},
           {m01, c[1], m12, m13},
           {m02, m12, c[2], m23},
           {m03, m13, m23, c[3]},
           {m01, m02, m03, m13},
           {m01, m02, m12, m13},
           {m02, m03, m13, m23},
           {m02, m12, m13, m23}}};
}

}  // namespace

void tet_quad_near(const std::array<Vec3, 4>& c, const QuadratureRule& rule, const Vec3& y,
                   int max_depth, double theta, const QuadSink& sink) {
  if (max_depth > 0 && tet_diameter(c) > theta * point_tet_distance(y, c)) {
    for (const auto& child : tet_red_children(c))
      tet_quad_near(child, rule, y, max_depth - 1, theta, sink);
    return;
  }
  tet_quad(c, rule, sink);
}

void tet_quad_graded_sphere(const std::array<Vec3, 4>& c, const QuadratureRule& rule, double r0,
                            int depth, const QuadSink& sink) {
  double max_r = 0.0;
  for (const auto& v : c) max_r = std::max(max_r, v.norm());
  const bool reaches_sphere = (r0 - max_r) < 0.5 * tet_diameter(c);
  if (depth > 0 && reaches_sphere) {
    for (const auto& child : tet_red_children(c))
      tet_quad_graded_sphere(child, rule, r0, depth - 1, sink);
    return;
  }
  tet_quad(c, rule, sink);
}

void tri_quad_graded_sphere(const std::array<Vec3, 3>& c, const QuadratureRule& rule, double r0,
                            int depth, const QuadSink& sink) {
  double max_r = 0.0;
  for (const auto& v : c) max_r = std::max(max_r, v.norm());
  const bool reaches_sphere = (r0 - max_r) < 0.5 * tri_diameter(c);
  if (depth > 0 && reaches_sphere) {
    const Vec3 m01 = 0.5 * (c[0] + c[1]), m12 = 0.5 * (c[1] + c[2]), m02 = 0.5 * (c[0] + c[2]);
    tri_quad_graded_sphere({c[0], m01, m02}, rule, r0, depth - 1, sink);
    tri_quad_graded_sphere({m01, c[1], m12}, rule, r0, depth - 1, sink);
    tri_quad_graded_sphere({m02, m12, c[2]}, rule, r0, depth - 1, sink);
    tri_quad_graded_sphere({m01, m12, m02}, rule, r0, depth - 1, sink);
    return;
  }
  tri_quad(c, rule, sink);
}

}  // namespace bdie

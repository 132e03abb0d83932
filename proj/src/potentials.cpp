#include "bdie/potentials.hpp"

#include "bdie/integration.hpp"
#include "bdie/kernels.hpp"
#include "bdie/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace bdie {

namespace {

// Barycentric coordinates of a point in the plane of a triangle.
std::array<double, 3> tri_bary(const std::array<Vec3, 3>& c, const Vec3& n, const Vec3& x) {
  const double twice_area = (c[1] - c[0]).cross(c[2] - c[0]).dot(n);
  std::array<double, 3> l;
  l[0] = (c[1] - x).cross(c[2] - x).dot(n) / twice_area;
  l[1] = (c[2] - x).cross(c[0] - x).dot(n) / twice_area;
  l[2] = 1.0 - l[0] - l[1];
  return l;
}

// Surface evaluation target: a point plus what makes the integrand singular
// there (a mesh vertex it coincides with, or the element it lies inside).
struct SurfTarget {
  Vec3 point;
  Vec3 normal{Vec3::Zero()};
  int vertex{-1};         // surface vertex index
  int self_triangle{-1};  // triangle containing the target in its interior
};

// Inner integration over one surface element relative to a target.
template <typename F>
void surface_element_quad(const SurfaceMesh& s, int t, const SurfTarget& tgt,
                          const QuadratureRule& rule, const QuadratureConfig& cfg, F&& f) {
  const auto c = triangle_corners(s, t);
  const QuadSink sink = [&f](const Vec3& x, double w) { f(x, w); };
  if (t == tgt.self_triangle) {
    tri_quad_duffy({tgt.point, c[0], c[1]}, cfg.duffy_points, sink);
    tri_quad_duffy({tgt.point, c[1], c[2]}, cfg.duffy_points, sink);
    tri_quad_duffy({tgt.point, c[2], c[0]}, cfg.duffy_points, sink);
    return;
  }
  if (tgt.vertex >= 0) {
    const auto& tri = s.triangles[t];
    for (int k = 0; k < 3; ++k)
      if (tri[k] == tgt.vertex) {
        std::array<Vec3, 3> rot = c;
        std::rotate(rot.begin(), rot.begin() + k, rot.end());
        tri_quad_duffy(rot, cfg.duffy_points, sink);
        return;
      }
  }
  tri_quad_near(c, rule, tgt.point, cfg.near_depth, cfg.near_theta, sink);
}

// kernel(x, nx, target) integrated against P0 / P1 trial functions; one row
// per target.
template <typename Kernel>
Matrix surface_eval_matrix(const SurfaceMesh& s, const std::vector<SurfTarget>& targets,
                           BoundarySpace trial, const QuadratureConfig& cfg, Kernel&& kernel) {
  const int cols = trial == BoundarySpace::P0 ? s.num_triangles() : s.num_vertices();
  Matrix out = Matrix::Zero(targets.size(), cols);
  const QuadratureRule rule = quadrature_for(ElementKind::Triangle, cfg.surface_order);
  parallel_for(
      static_cast<int>(targets.size()),
      [&](int i) {
        const SurfTarget& tgt = targets[i];
        for (int t = 0; t < s.num_triangles(); ++t) {
          const auto& tri = s.triangles[t];
          const auto c = triangle_corners(s, t);
          const Vec3 nx = s.triangle_normals[t];
          surface_element_quad(s, t, tgt, rule, cfg, [&](const Vec3& x, double w) {
            const double kv = w * kernel(x, nx, tgt);
            if (trial == BoundarySpace::P0)
              out(i, t) += kv;
            else {
              const auto l = tri_bary(c, nx, x);
              for (int k = 0; k < 3; ++k) out(i, tri[k]) += kv * l[k];
            }
          });
        }
      },
      cfg.parallel);
  return out;
}

std::vector<SurfTarget> volume_vertex_targets(const VolumeMesh& mesh) {
  std::vector<SurfTarget> targets(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    targets[i].point = mesh.vertices[i];
    targets[i].vertex = mesh.volume_to_surface[i];
    if (targets[i].vertex >= 0)
      targets[i].normal = mesh.surface.vertex_normals[targets[i].vertex];
  }
  return targets;
}

// Volume integration relative to a target: Duffy when the target is a corner
// of the tet, sphere grading for boundary-singular integrands, distance
// grading otherwise.
template <typename F>
void volume_element_quad(const VolumeMesh& mesh, int t, int target_vertex, const Vec3& y,
                         const QuadratureRule& rule, const QuadratureConfig& cfg,
                         bool boundary_singular, F&& f) {
  const auto corners = tet_corners(mesh, t);
  const QuadSink sink = [&f](const Vec3& x, double w) { f(x, w); };
  int corner = -1;
  if (target_vertex >= 0)
    for (int k = 0; k < 4; ++k)
      if (mesh.tets[t][k] == target_vertex) corner = k;
  if (corner >= 0) {
    std::array<Vec3, 4> rot = corners;
    std::swap(rot[0], rot[corner]);
    tet_quad_duffy(rot, cfg.duffy_points, sink);
    return;
  }
  if (boundary_singular) {
    tet_quad_graded_sphere(corners, rule, mesh.surface.radius, cfg.boundary_grading, sink);
    return;
  }
  tet_quad_near(corners, rule, y, cfg.near_depth, cfg.near_theta, sink);
}

}  // namespace

void dump_block_csv(std::ostream& os, const OperatorBlock& block) {
  os << "# " << block.row_space << " <- " << block.col_space << "\n";
  linalg::dump_csv(os, block.label, block.m);
}

// ---------------------------------------------------------------------------
// potential evaluations at free targets
// ---------------------------------------------------------------------------

Vector volume_potential_rhs(const ExtendedRhs& rhs, const Coefficient& a,
                            const VolumeMesh& mesh, const std::vector<EvalTarget>& targets,
                            const QuadratureConfig& cfg) {
  Vector out = Vector::Zero(targets.size());
  if (rhs.zero()) return out;
  const QuadratureRule rule = quadrature_for(ElementKind::Tetrahedron, cfg.volume_order);
  parallel_for(
      static_cast<int>(targets.size()),
      [&](int i) {
        const Vec3 y = targets[i].point;
        const double ay = a(y);
        double acc = 0.0;
        for (int t = 0; t < mesh.num_tets(); ++t) {
          volume_element_quad(
              mesh, t, targets[i].vertex, y, rule, cfg, rhs.boundary_singular,
              [&](const Vec3& x, double w) {
                if (rhs.f0) acc += w * rhs.f0(x) * kernels::laplace_fs(x, y) / ay;
                if (rhs.flux)
                  acc -= w * rhs.flux(x, t).dot(kernels::grad_x_laplace_fs(x, y)) / ay;
              });
        }
        out[i] = acc;
      },
      cfg.parallel);
  return out;
}

Vector remainder_potential(const DomainDensity& u, const Coefficient& a,
                           const std::vector<EvalTarget>& targets, const QuadratureConfig& cfg) {
  u.check();
  const VolumeMesh& mesh = *u.mesh;
  Vector out = Vector::Zero(targets.size());
  if (a.constant) return out;  // remainder kernel vanishes
  const QuadratureRule rule = quadrature_for(ElementKind::Tetrahedron, cfg.volume_order);
  parallel_for(
      static_cast<int>(targets.size()),
      [&](int i) {
        const Vec3 y = targets[i].point;
        const double ay = a(y);
        double acc = 0.0;
        for (int t = 0; t < mesh.num_tets(); ++t) {
          const auto g = tet_hat_gradients(mesh, t);
          const Vec3 anchor = mesh.vertices[mesh.tets[t][0]];
          Vec3 gu = Vec3::Zero();
          for (int k = 0; k < 4; ++k) gu += u.values[mesh.tets[t][k]] * g[k];
          const double u_anchor = u.values[mesh.tets[t][0]];
          volume_element_quad(mesh, t, targets[i].vertex, y, rule, cfg, false,
                              [&](const Vec3& x, double w) {
                                const Vec3 d = x - y;
                                const double r = d.norm();
                                const double R =
                                    d.dot(a.gradient(x)) / (kernels::four_pi * ay * r * r * r);
                                acc += w * R * (u_anchor + gu.dot(x - anchor));
                              });
        }
        out[i] = acc;
      },
      cfg.parallel);
  return out;
}

Vector single_layer(const BoundaryDensity& g, const Coefficient& a, const SurfaceMesh& surface,
                    const std::vector<EvalTarget>& targets, const QuadratureConfig& cfg) {
  if (g.space != BoundarySpace::P0)
    throw std::invalid_argument("single_layer: expected a P0 density");
  g.check();
  std::vector<SurfTarget> st(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) st[i].point = targets[i].point;
  const Matrix rows = surface_eval_matrix(
      surface, st, BoundarySpace::P0, cfg,
      [&a](const Vec3& x, const Vec3&, const SurfTarget& t) {
        return -kernels::laplace_fs(x, t.point) / a(t.point);
      });
  return rows * g.values;
}

Vector double_layer(const BoundaryDensity& g, const Coefficient& a, const SurfaceMesh& surface,
                    const std::vector<EvalTarget>& targets, const QuadratureConfig& cfg) {
  if (g.space != BoundarySpace::P1)
    throw std::invalid_argument("double_layer: expected a P1 density");
  g.check();
  std::vector<SurfTarget> st(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) st[i].point = targets[i].point;
  const Matrix rows = surface_eval_matrix(
      surface, st, BoundarySpace::P1, cfg,
      [&a](const Vec3& x, const Vec3& nx, const SurfTarget& t) {
        return -kernels::conormal_kernel(x, t.point, a, nx);
      });
  return rows * g.values;
}

std::vector<Vec3> single_layer_gradient(const BoundaryDensity& g, const Coefficient& a,
                                        const SurfaceMesh& surface,
                                        const std::vector<EvalTarget>& targets,
                                        const QuadratureConfig& cfg) {
  if (g.space != BoundarySpace::P0)
    throw std::invalid_argument("single_layer_gradient: expected a P0 density");
  g.check();
  const QuadratureRule rule = quadrature_for(ElementKind::Triangle, cfg.surface_order);
  std::vector<Vec3> out(targets.size(), Vec3::Zero());
  parallel_for(
      static_cast<int>(targets.size()),
      [&](int i) {
        SurfTarget tgt;
        tgt.point = targets[i].point;
        Vec3 acc = Vec3::Zero();
        for (int t = 0; t < surface.num_triangles(); ++t) {
          surface_element_quad(surface, t, tgt, rule, cfg, [&](const Vec3& x, double w) {
            const auto e = kernels::parametrix_eval(x, tgt.point, a);
            acc -= w * g.values[t] * e.gradient_y;
          });
        }
        out[i] = acc;
      },
      cfg.parallel);
  return out;
}

// ---------------------------------------------------------------------------
// collocation matrices at the volume-mesh vertices
// ---------------------------------------------------------------------------

Matrix collocation_single_layer(const Coefficient& a, const VolumeMesh& mesh,
                                const QuadratureConfig& cfg) {
  return surface_eval_matrix(mesh.surface, volume_vertex_targets(mesh), BoundarySpace::P0, cfg,
                             [&a](const Vec3& x, const Vec3&, const SurfTarget& t) {
                               return -kernels::laplace_fs(x, t.point) / a(t.point);
                             });
}

Matrix collocation_double_layer(const Coefficient& a, const VolumeMesh& mesh,
                                const QuadratureConfig& cfg) {
  return surface_eval_matrix(mesh.surface, volume_vertex_targets(mesh), BoundarySpace::P1, cfg,
                             [&a](const Vec3& x, const Vec3& nx, const SurfTarget& t) {
                               return -kernels::conormal_kernel(x, t.point, a, nx);
                             });
}

Matrix collocation_remainder(const Coefficient& a, const VolumeMesh& mesh,
                             const QuadratureConfig& cfg) {
  Matrix out = Matrix::Zero(mesh.num_vertices(), mesh.num_vertices());
  if (a.constant) return out;
  const QuadratureRule rule = quadrature_for(ElementKind::Tetrahedron, cfg.volume_order);
  parallel_for(
      mesh.num_vertices(),
      [&](int i) {
        const Vec3 y = mesh.vertices[i];
        const double ay = a(y);
        for (int t = 0; t < mesh.num_tets(); ++t) {
          const auto& tet = mesh.tets[t];
          const auto g = tet_hat_gradients(mesh, t);
          const Vec3 anchor = mesh.vertices[tet[0]];
          volume_element_quad(mesh, t, i, y, rule, cfg, false, [&](const Vec3& x, double w) {
            const Vec3 d = x - y;
            const double r = d.norm();
            const double R = d.dot(a.gradient(x)) / (kernels::four_pi * ay * r * r * r);
            const Vec3 rel = x - anchor;
            for (int k = 0; k < 4; ++k) {
              const double hat = (k == 0 ? 1.0 : 0.0) + g[k].dot(rel);
              out(i, tet[k]) += w * R * hat;
            }
          });
        }
      },
      cfg.parallel);
  return out;
}

Vector nodal_volume_potential(const ExtendedRhs& rhs, const Coefficient& a,
                              const VolumeMesh& mesh, const QuadratureConfig& cfg) {
  std::vector<EvalTarget> targets(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) targets[i] = {mesh.vertices[i], i};
  return volume_potential_rhs(rhs, a, mesh, targets, cfg);
}

// ---------------------------------------------------------------------------
// Galerkin boundary operators
// ---------------------------------------------------------------------------

namespace {

enum class TestSpace { P0, P1 };

// One pass assembles several kernels at once so every block sharing a
// (test, trial) space pair sees exactly the same quadrature points.
struct GalerkinKernel {
  // x: trial point, nx: trial normal, y: test point, ny: test normal
  std::function<double(const Vec3&, const Vec3&, const Vec3&, const Vec3&)> eval;
  Matrix* target;
};

void galerkin_pass(const SurfaceMesh& surface, TestSpace test, BoundarySpace trial,
                   std::vector<GalerkinKernel>& kernels_list, const QuadratureConfig& cfg) {
  const int nt = surface.num_triangles();
  const int ns = surface.num_vertices();
  const int cols = trial == BoundarySpace::P0 ? nt : ns;
  const int rows = test == TestSpace::P0 ? nt : ns;
  for (auto& k : kernels_list) *k.target = Matrix::Zero(rows, cols);
  const QuadratureRule rule = quadrature_for(ElementKind::Triangle, cfg.surface_order);
  const int nk = static_cast<int>(kernels_list.size());

  // per-test-element partial rows, reduced serially afterwards
  std::vector<std::vector<Matrix>> partial(nt);
  parallel_for(
      nt,
      [&](int te) {
        const auto ct = triangle_corners(surface, te);
        const Vec3 ny = surface.triangle_normals[te];
        const int local_rows = test == TestSpace::P0 ? 1 : 3;
        std::vector<Matrix> local(nk, Matrix::Zero(local_rows, cols));
        tri_quad(ct, rule, [&](const Vec3& y, double wy) {
          std::array<double, 3> ly{1.0, 0.0, 0.0};
          if (test == TestSpace::P1) ly = tri_bary(ct, ny, y);
          SurfTarget tgt;
          tgt.point = y;
          tgt.normal = ny;
          tgt.self_triangle = te;
          for (int se = 0; se < nt; ++se) {
            const auto& tri_s = surface.triangles[se];
            const auto cs = triangle_corners(surface, se);
            const Vec3 nx = surface.triangle_normals[se];
            surface_element_quad(surface, se, tgt, rule, cfg, [&](const Vec3& x, double wx) {
              std::array<double, 3> lx{1.0, 0.0, 0.0};
              if (trial == BoundarySpace::P1) lx = tri_bary(cs, nx, x);
              for (int k = 0; k < nk; ++k) {
                const double kv = wy * wx * kernels_list[k].eval(x, nx, y, ny);
                if (trial == BoundarySpace::P0) {
                  for (int r = 0; r < local_rows; ++r) local[k](r, se) += kv * (test == TestSpace::P0 ? 1.0 : ly[r]);
                } else {
                  for (int cidx = 0; cidx < 3; ++cidx) {
                    const double kvx = kv * lx[cidx];
                    for (int r = 0; r < local_rows; ++r)
                      local[k](r, tri_s[cidx]) += kvx * (test == TestSpace::P0 ? 1.0 : ly[r]);
                  }
                }
              }
            });
          }
        });
        partial[te] = std::move(local);
      },
      cfg.parallel);

  for (int te = 0; te < nt; ++te) {
    const auto& tri_t = surface.triangles[te];
    for (int k = 0; k < nk; ++k) {
      if (test == TestSpace::P0)
        kernels_list[k].target->row(te) += partial[te][k].row(0);
      else
        for (int r = 0; r < 3; ++r)
          kernels_list[k].target->row(tri_t[r]) += partial[te][k].row(r);
    }
  }
}

}  // namespace

BoundaryOps assemble_boundary_ops(const Coefficient& a, const SurfaceMesh& surface,
                                  const QuadratureConfig& cfg) {
  BoundaryOps ops;
  const int nt = surface.num_triangles();
  const int ns = surface.num_vertices();

  ops.areas = Vector::Zero(nt);
  for (int t = 0; t < nt; ++t) ops.areas[t] = surface.areas[t];
  ops.coeff_at_vertices = Vector::Zero(ns);
  for (int v = 0; v < ns; ++v) ops.coeff_at_vertices[v] = a(surface.vertices[v]);

  // exact P0/P1 and P1/P1 surface masses on flat triangles
  ops.M01 = Matrix::Zero(nt, ns);
  ops.M11 = Matrix::Zero(ns, ns);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = surface.triangles[t];
    for (int i = 0; i < 3; ++i) {
      ops.M01(t, tri[i]) = surface.areas[t] / 3.0;
      for (int j = 0; j < 3; ++j)
        ops.M11(tri[i], tri[j]) += surface.areas[t] * (i == j ? 1.0 / 6.0 : 1.0 / 12.0);
    }
  }

  // weighted P1 mass with m = a dn(1/a) = -dn a / a (flat normals)
  const QuadratureRule srule = quadrature_for(ElementKind::Triangle, cfg.surface_order);
  ops.Mm = Matrix::Zero(ns, ns);
  if (!a.constant) {
    for (int t = 0; t < nt; ++t) {
      const auto& tri = surface.triangles[t];
      const auto c = triangle_corners(surface, t);
      const Vec3 n = surface.triangle_normals[t];
      tri_quad(c, srule, [&](const Vec3& y, double w) {
        const double m = -n.dot(a.gradient(y)) / a(y);
        const auto l = tri_bary(c, n, y);
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) ops.Mm(tri[i], tri[j]) += w * m * l[i] * l[j];
      });
    }
  }

  // P0 x P0 pass: V (direct), composed twin, Laplace V0
  {
    std::vector<GalerkinKernel> ks;
    ks.push_back({[&a](const Vec3& x, const Vec3&, const Vec3& y, const Vec3&) {
                    return -kernels::parametrix(x, y, a);
                  },
                  &ops.V});
    ks.push_back({[&a](const Vec3& x, const Vec3&, const Vec3& y, const Vec3&) {
                    return -kernels::laplace_fs(x, y) / a(y);
                  },
                  &ops.V_composed});
    ks.push_back({[](const Vec3& x, const Vec3&, const Vec3& y, const Vec3&) {
                    return -kernels::laplace_fs(x, y);
                  },
                  &ops.V0});
    galerkin_pass(surface, TestSpace::P0, BoundarySpace::P0, ks, cfg);
    ops.V0 = 0.5 * (ops.V0 + ops.V0.transpose()).eval();
  }

  // P0 x P1 pass: W (direct) and composed twin
  {
    std::vector<GalerkinKernel> ks;
    ks.push_back({[&a](const Vec3& x, const Vec3& nx, const Vec3& y, const Vec3&) {
                    return -kernels::conormal_kernel(x, y, a, nx);
                  },
                  &ops.W});
    ks.push_back({[&a](const Vec3& x, const Vec3& nx, const Vec3& y, const Vec3&) {
                    return -a(x) * kernels::conormal_kernel_laplace(x, y, nx) / a(y);
                  },
                  &ops.W_composed});
    galerkin_pass(surface, TestSpace::P0, BoundarySpace::P1, ks, cfg);
  }

  // P1 x P0 pass: W' (direct), Laplace W'0, weighted Laplace single layer
  {
    std::vector<GalerkinKernel> ks;
    ks.push_back({[&a](const Vec3& x, const Vec3&, const Vec3& y, const Vec3& ny) {
                    return -kernels::conormal_kernel_y(x, y, a, ny);
                  },
                  &ops.Wp});
    ks.push_back({[](const Vec3& x, const Vec3&, const Vec3& y, const Vec3& ny) {
                    return -kernels::conormal_kernel_y_laplace(x, y, ny);
                  },
                  &ops.Wp0});
    ks.push_back({[&a](const Vec3& x, const Vec3&, const Vec3& y, const Vec3& ny) {
                    const double m = -ny.dot(a.gradient(y)) / a(y);
                    return -m * kernels::laplace_fs(x, y);
                  },
                  &ops.Vdm});
    galerkin_pass(surface, TestSpace::P1, BoundarySpace::P0, ks, cfg);
    ops.Wp_composed = ops.Wp0 + ops.Vdm;
  }

  // P1 x P1 pass: weighted Laplace double layer entering L+
  {
    std::vector<GalerkinKernel> ks;
    ks.push_back({[&a](const Vec3& x, const Vec3& nx, const Vec3& y, const Vec3& ny) {
                    const double m = -ny.dot(a.gradient(y)) / a(y);
                    return -m * kernels::conormal_kernel_laplace(x, y, nx);
                  },
                  &ops.W0m});
    galerkin_pass(surface, TestSpace::P1, BoundarySpace::P1, ks, cfg);
  }

  // Maue-regularized Laplace hypersingular operator: with the surface curls
  // c_T(v) = n_T x grad hat_v, <L0 g, h> = -sum_TS V0[T,S] (c_T(h) . c_S(g))
  {
    std::array<Matrix, 3> curl;
    for (auto& c : curl) c = Matrix::Zero(nt, ns);
    for (int t = 0; t < nt; ++t) {
      const auto g = triangle_hat_gradients(surface, t);
      const Vec3 n = surface.triangle_normals[t];
      for (int k = 0; k < 3; ++k) {
        const Vec3 c = n.cross(g[k]);
        for (int d = 0; d < 3; ++d) curl[d](t, surface.triangles[t][k]) = c[d];
      }
    }
    ops.L0 = Matrix::Zero(ns, ns);
    for (int d = 0; d < 3; ++d) ops.L0 -= curl[d].transpose() * ops.V0 * curl[d];
  }

  // L+ g = L0(a g) + m * [W_Delta(a g)]^+ with the interior-trace jump -1/2
  {
    const Matrix diag_a = ops.coeff_at_vertices.asDiagonal();
    ops.Lp = (ops.L0 + (-0.5) * ops.Mm + ops.W0m) * diag_a;
  }

  return ops;
}

// ---------------------------------------------------------------------------
// volume FEM forms
// ---------------------------------------------------------------------------

FemMatrices assemble_fem(const Coefficient& a, const VolumeMesh& mesh,
                         const QuadratureConfig& cfg) {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> tk, tg, tb;
  const QuadratureRule vrule = quadrature_for(ElementKind::Tetrahedron, cfg.volume_order);
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& tet = mesh.tets[t];
    const auto g = tet_hat_gradients(mesh, t);
    const Vec3 anchor = mesh.vertices[tet[0]];
    double int_a = 0.0;
    std::array<Vec3, 4> int_hat_grad_a{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    tet_quad(tet_corners(mesh, t), vrule, [&](const Vec3& x, double w) {
      const double ax = a(x);
      if (!(ax > 0.0)) throw std::runtime_error("assemble_fem: coefficient not positive");
      int_a += w * ax;
      const Vec3 ga = a.gradient(x);
      for (int j = 0; j < 4; ++j) {
        const double hatj = (j == 0 ? 1.0 : 0.0) + g[j].dot(x - anchor);
        int_hat_grad_a[j] += w * hatj * ga;
      }
    });
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        tk.emplace_back(tet[i], tet[j], int_a * g[j].dot(g[i]));
        tg.emplace_back(tet[i], tet[j], int_hat_grad_a[j].dot(g[i]));
      }
  }
  const QuadratureRule srule = quadrature_for(ElementKind::Triangle, cfg.surface_order);
  const SurfaceMesh& s = mesh.surface;
  for (int t = 0; t < s.num_triangles(); ++t) {
    const auto& tri = s.triangles[t];
    const auto c = triangle_corners(s, t);
    const Vec3 n = s.triangle_normals[t];
    tri_quad(c, srule, [&](const Vec3& x, double w) {
      const double dna = n.dot(a.gradient(x));
      const auto l = tri_bary(c, n, x);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          tb.emplace_back(mesh.surface_to_volume[tri[i]], mesh.surface_to_volume[tri[j]],
                          w * dna * l[i] * l[j]);
    });
  }
  FemMatrices fem;
  const int nv = mesh.num_vertices();
  fem.stiffness.resize(nv, nv);
  fem.grad_a.resize(nv, nv);
  fem.surf_dna.resize(nv, nv);
  fem.stiffness.setFromTriplets(tk.begin(), tk.end());
  fem.grad_a.setFromTriplets(tg.begin(), tg.end());
  fem.surf_dna.setFromTriplets(tb.begin(), tb.end());
  return fem;
}

double rstar_weak(const ExtendedRhs& rhs, const Coefficient& a, const VolumeMesh& mesh,
                  const DomainDensity& v, const QuadratureConfig& cfg) {
  v.check();
  if (a.constant || rhs.zero()) return 0.0;
  const Vector p = nodal_volume_potential(rhs, a, mesh, cfg);
  const FemMatrices fem = assemble_fem(a, mesh, cfg);
  return v.values.dot((fem.grad_a - fem.surf_dna) * p);
}

// ---------------------------------------------------------------------------
// jump relations
// ---------------------------------------------------------------------------

JumpReport jump_check(const Coefficient& a, const VolumeMesh& mesh, const BoundaryDensity& g0,
                      const BoundaryDensity& g1, const QuadratureConfig& cfg) {
  g0.check();
  g1.check();
  const SurfaceMesh& s = mesh.surface;
  const int ns = s.num_vertices();
  const int nt = s.num_triangles();

  auto richardson = [](const Vector& fh, const Vector& fh2) -> Vector {
    return 2.0 * fh2 - fh;
  };
  auto rel = [](const Vector& got, const Vector& want) {
    const double d = (got - want).norm();
    const double n = want.norm();
    return n > 0 ? d / n : d;
  };

  JumpReport rep{};

  // centroid targets (P0-natural) for the single-layer relations
  std::vector<EvalTarget> cnear1(nt), cnear2(nt);
  std::vector<SurfTarget> cat(nt);
  std::vector<double> hc(nt);
  for (int t = 0; t < nt; ++t) {
    const Vec3 c = s.centroid(t);
    const Vec3 n = s.triangle_normals[t];
    hc[t] = tri_diameter(triangle_corners(s, t));
    cnear1[t] = {c - hc[t] * n, -1};
    cnear2[t] = {c - 0.5 * hc[t] * n, -1};
    cat[t].point = c;
    cat[t].normal = n;
    cat[t].self_triangle = t;
  }

  {  // [Vg]+ vs V g
    const Vector fh = single_layer(g0, a, s, cnear1, cfg);
    const Vector fh2 = single_layer(g0, a, s, cnear2, cfg);
    const Matrix direct = surface_eval_matrix(
        s, cat, BoundarySpace::P0, cfg, [&a](const Vec3& x, const Vec3&, const SurfTarget& t) {
          return -kernels::laplace_fs(x, t.point) / a(t.point);
        });
    rep.single_layer = rel(richardson(fh, fh2), direct * g0.values);
  }

  {  // [T+ V g]+ vs g/2 + W' g at the centroids
    const auto gh = single_layer_gradient(g0, a, s, cnear1, cfg);
    const auto gh2 = single_layer_gradient(g0, a, s, cnear2, cfg);
    Vector fh(nt), fh2(nt);
    for (int t = 0; t < nt; ++t) {
      const Vec3 n = s.triangle_normals[t];
      const double ac = a(cat[t].point);
      fh[t] = ac * n.dot(gh[t]);
      fh2[t] = ac * n.dot(gh2[t]);
    }
    const Matrix wp = surface_eval_matrix(
        s, cat, BoundarySpace::P0, cfg, [&a](const Vec3& x, const Vec3&, const SurfTarget& t) {
          return -kernels::conormal_kernel_y(x, t.point, a, t.normal);
        });
    Vector want = wp * g0.values;
    want += 0.5 * g0.values;
    rep.conormal_single_layer = rel(richardson(fh, fh2), want);
  }

  {  // [Wg]+ vs -g/2 + W g at the vertices
    std::vector<double> h(ns, 0.0);
    for (const auto& tri : s.triangles)
      for (int k = 0; k < 3; ++k) {
        const double e = (s.vertices[tri[k]] - s.vertices[tri[(k + 1) % 3]]).norm();
        h[tri[k]] = std::max(h[tri[k]], e);
        h[tri[(k + 1) % 3]] = std::max(h[tri[(k + 1) % 3]], e);
      }
    std::vector<EvalTarget> vnear1(ns), vnear2(ns);
    std::vector<SurfTarget> vat(ns);
    for (int v = 0; v < ns; ++v) {
      const Vec3 n = s.vertex_normals[v];
      vnear1[v] = {s.vertices[v] - h[v] * n, -1};
      vnear2[v] = {s.vertices[v] - 0.5 * h[v] * n, -1};
      vat[v].point = s.vertices[v];
      vat[v].normal = n;
      vat[v].vertex = v;
    }
    const Vector fh = double_layer(g1, a, s, vnear1, cfg);
    const Vector fh2 = double_layer(g1, a, s, vnear2, cfg);
    const Matrix direct = surface_eval_matrix(
        s, vat, BoundarySpace::P1, cfg, [&a](const Vec3& x, const Vec3& nx, const SurfTarget& t) {
          return -kernels::conormal_kernel(x, t.point, a, nx);
        });
    Vector want = direct * g1.values;
    want -= 0.5 * g1.values;
    rep.double_layer = rel(richardson(fh, fh2), want);
  }

  return rep;
}

}  // namespace bdie

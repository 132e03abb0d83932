#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdie/integration.hpp"
#include "bdie/kernels.hpp"
#include "bdie/oracle.hpp"
#include "bdie/potentials.hpp"

#include <numbers>

using namespace bdie;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("sphere analytics table") {
  const auto sa = oracle::sphere_analytics(2.0);
  CHECK(sa.area == doctest::Approx(16.0 * kPi));
  CHECK(sa.volume == doctest::Approx(32.0 * kPi / 3.0));
  CHECK(sa.single_layer_constant_interior == doctest::Approx(2.0));
  CHECK(sa.double_layer_constant_interior == doctest::Approx(-1.0));
  CHECK(sa.equilibrium_density == doctest::Approx(0.5));
}

TEST_CASE("fd_check basics") {
  // |x|^2 has gradient 2x and Laplacian 6, both exactly representable
  const auto fd = oracle::fd_check([](const Vec3& x) { return x.squaredNorm(); },
                                   Vec3(0.3, -0.2, 0.1), 1e-3);
  CHECK((fd.gradient - Vec3(0.6, -0.4, 0.2)).norm() <= 1e-10);
  CHECK(fd.laplacian == doctest::Approx(6.0).epsilon(1e-8));

  // harmonicity of the Laplace fundamental solution away from the pole
  const Vec3 y(0.8, 0.1, -0.3);
  const auto fs = oracle::fd_check(
      [&](const Vec3& x) { return kernels::laplace_fs(x, y); }, Vec3(0.1, 0, 0), 1e-2);
  CHECK(std::abs(fs.laplacian) <= 1e-4);

  // parametrix gradient for a = 1 + |x|^2 against the closed form
  const auto a = coefficient_one_plus_r2();
  const Vec3 x0(0.2, 0.3, -0.1);
  const auto e = kernels::parametrix_eval(x0, y, a);
  const auto fx = oracle::fd_check(
      [&](const Vec3& p) { return kernels::parametrix(p, y, a); }, x0, 1e-3);
  CHECK((fx.gradient - e.gradient_x).norm() <= 1e-7 * e.gradient_x.norm());
}

TEST_CASE("octree volume potential hits the analytic center value") {
  const auto mesh = build_ball_mesh(build_icosphere(2, 1.0), 3);
  const auto a1 = coefficient_one();
  const auto rhs = rhs_regular([](const Vec3&) { return 1.0; });
  const auto v = oracle::brute_volume_potential(rhs, a1, mesh, Vec3::Zero(), 6);
  // the octree integrates the meshed polyhedron, whose mass deficit at this
  // level shifts the analytic ball value -1/2 by about its volume defect
  CHECK(v.value == doctest::Approx(-0.5).epsilon(0.04));
  CHECK(v.error_estimate < 0.01);

  const auto zero = oracle::brute_volume_potential(rhs_zero(), a1, mesh, Vec3::Zero(), 6);
  CHECK(zero.value == 0.0);
}

TEST_CASE("octree agrees with the production quadrature") {
  const auto mesh = build_ball_mesh(build_icosphere(2, 1.0), 3);
  const auto c = case_by_name("MS1", 1.0);
  QuadratureConfig cfg;
  const std::vector<EvalTarget> pts{{Vec3(0.2, 0.1, -0.05), -1},
                                    {Vec3(-0.3, 0.25, 0.15), -1},
                                    {Vec3(0.05, -0.4, 0.3), -1},
                                    {Vec3(0.4, 0.2, 0.1), -1},
                                    {Vec3(-0.1, -0.2, -0.35), -1}};
  const Vector main = volume_potential_rhs(c.rhs, c.a, mesh, pts, cfg);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto ref = oracle::brute_volume_potential(c.rhs, c.a, mesh, pts[i].point, 6);
    CHECK(main[i] == doctest::Approx(ref.value).epsilon(5e-3));
  }
}

TEST_CASE("oracle error estimates shrink by at least 3x per depth step") {
  // smooth integrand vanishing at the boundary, so the midpoint estimate is
  // not polluted by the O(cell) in/out misclassification of skin cells
  const auto mesh = build_ball_mesh(build_icosphere(1, 1.0), 2);
  auto integrand = [](const Vec3& x, int) {
    const double s = 1.0 - x.squaredNorm();
    return s * s * (1.0 + x.x() * x.y());
  };
  double prev = -1.0;
  for (int depth = 5; depth <= 7; ++depth) {
    const auto v = oracle::octree_integrate(mesh, integrand, Vec3(10, 10, 10), depth);
    if (prev > 0) CHECK(v.error_estimate < prev / 3.0);
    prev = v.error_estimate;
  }
}

TEST_CASE("analytic panel integral against graded quadrature") {
  const std::array<Vec3, 3> tri = {Vec3(0, 0, 0), Vec3(1, 0.1, 0), Vec3(0.3, 0.8, 0)};
  const QuadratureRule rule = quadrature_for(ElementKind::Triangle, 6);
  // off-plane target
  const Vec3 y1(0.4, 0.3, 0.5);
  double q1 = 0.0;
  tri_quad_near(tri, rule, y1, 8, 2.0, [&](const Vec3& x, double w) {
    q1 += w / (x - y1).norm();
  });
  CHECK(oracle::analytic_triangle_single_layer(tri, y1) ==
        doctest::Approx(q1).epsilon(1e-5));
  // in-plane interior target via the Duffy split
  const Vec3 y2(0.35, 0.25, 0.0);
  double q2 = 0.0;
  for (int e = 0; e < 3; ++e)
    tri_quad_duffy({y2, tri[e], tri[(e + 1) % 3]}, 12,
                   [&](const Vec3& x, double w) { q2 += w / (x - y2).norm(); });
  CHECK(oracle::analytic_triangle_single_layer(tri, y2) ==
        doctest::Approx(q2).epsilon(1e-5));
}

TEST_CASE("brute Galerkin single layer is consistent across outer orders") {
  const auto s = build_icosphere(1, 1.0);
  const Vector g = Vector::Ones(s.num_triangles());
  const double a = oracle::brute_galerkin_single_layer(s, coefficient_one(), g, g, 4);
  const double b = oracle::brute_galerkin_single_layer(s, coefficient_one(), g, g, 6);
  CHECK(a == doctest::Approx(b).epsilon(1e-4));
}

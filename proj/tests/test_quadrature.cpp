#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdie/integration.hpp"
#include "bdie/oracle.hpp"
#include "bdie/quadrature.hpp"

#include <cmath>

using namespace bdie;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// analytic monomial integrals on the reference elements
double tri_monomial(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}
double tet_monomial(int a, int b, int c) {
  return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
}

double integrate(const QuadratureRule& r, int a, int b, int c) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q)
    s += r.weights[q] * std::pow(r.points[q][0], a) * std::pow(r.points[q][1], b) *
         std::pow(r.points[q][2], c);
  return s;
}

}  // namespace

TEST_CASE("triangle order 1 is the centroid rule") {
  const auto r = quadrature_for(ElementKind::Triangle, 1);
  REQUIRE(r.size() == 1);
  CHECK(r.weights[0] == doctest::Approx(0.5));
  CHECK(r.points[0][0] == doctest::Approx(1.0 / 3.0));
  CHECK(r.points[0][1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("tetrahedron order 2 integrates x1 x2 to 1/120") {
  const auto r = quadrature_for(ElementKind::Tetrahedron, 2);
  CHECK(integrate(r, 1, 1, 0) == doctest::Approx(1.0 / 120.0).epsilon(1e-12));
}

TEST_CASE("triangle order 4 integrates x1^4 to 1/30") {
  const auto r = quadrature_for(ElementKind::Triangle, 4);
  CHECK(integrate(r, 4, 0, 0) == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
}

TEST_CASE("weights sum to the reference measure") {
  for (int order = 1; order <= 6; ++order) {
    const auto r = quadrature_for(ElementKind::Triangle, order);
    CHECK(integrate(r, 0, 0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  }
  for (int order = 1; order <= 5; ++order) {
    const auto r = quadrature_for(ElementKind::Tetrahedron, order);
    CHECK(integrate(r, 0, 0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  }
}

TEST_CASE("rules are exact up to their stated order") {
  for (int order = 1; order <= 6; ++order) {
    const auto r = quadrature_for(ElementKind::Triangle, order);
    for (int a = 0; a <= order; ++a)
      for (int b = 0; a + b <= order; ++b)
        CHECK(integrate(r, a, b, 0) == doctest::Approx(tri_monomial(a, b)).epsilon(1e-11));
  }
  for (int order = 1; order <= 5; ++order) {
    const auto r = quadrature_for(ElementKind::Tetrahedron, order);
    for (int a = 0; a <= order; ++a)
      for (int b = 0; a + b <= order; ++b)
        for (int c = 0; a + b + c <= order; ++c)
          CHECK(integrate(r, a, b, c) ==
                doctest::Approx(tet_monomial(a, b, c)).epsilon(1e-11));
  }
}

TEST_CASE("unsupported orders are configuration errors") {
  CHECK_THROWS_AS(quadrature_for(ElementKind::Triangle, 0), std::invalid_argument);
  CHECK_THROWS_AS(quadrature_for(ElementKind::Triangle, 7), std::invalid_argument);
  CHECK_THROWS_AS(quadrature_for(ElementKind::Tetrahedron, 6), std::invalid_argument);
}

TEST_CASE("gauss-jacobi rules integrate their weight exactly") {
  for (int alpha = 0; alpha <= 2; ++alpha) {
    const auto r = gauss_jacobi_01(4, alpha);
    double total = 0.0, x3 = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      total += r.w[i];
      x3 += r.w[i] * std::pow(r.x[i], 3);
    }
    CHECK(total == doctest::Approx(1.0 / (alpha + 1)).epsilon(1e-13));
    // int_0^1 (1-x)^alpha x^3 dx = 6 alpha! / (alpha+4)!
    const double exact = 6.0 * factorial(alpha) / factorial(alpha + 4);
    CHECK(x3 == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("duffy rule resolves the 1/r vertex singularity") {
  const std::array<Vec3, 3> tri = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.2, 0.9, 0)};
  const Vec3 y(0, 0, 0);
  const double exact = oracle::analytic_triangle_single_layer(tri, y);
  double q = 0.0;
  tri_quad_duffy(tri, 8, [&](const Vec3& x, double w) { q += w / (x - y).norm(); });
  CHECK(q == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("tet duffy resolves the 1/r^2 vertex singularity") {
  const std::array<Vec3, 4> tet = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                                   Vec3(0, 0, 1)};
  // reference: deeply graded subdivision
  const auto rule = quadrature_for(ElementKind::Tetrahedron, 5);
  double ref = 0.0;
  tet_quad_near(tet, rule, Vec3(0, 0, 0), 8, 4.0,
                [&](const Vec3& x, double w) { ref += w / x.squaredNorm(); });
  double q = 0.0;
  tet_quad_duffy(tet, 10, [&](const Vec3& x, double w) { q += w / x.squaredNorm(); });
  CHECK(q == doctest::Approx(ref).epsilon(2e-3));
}

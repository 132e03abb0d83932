#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdie/kernels.hpp"
#include "bdie/oracle.hpp"

#include <numbers>
#include <random>

using namespace bdie;

namespace {
constexpr double kPi = std::numbers::pi;

std::mt19937_64 rng(42);
Vec3 random_point(double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return {d(rng), d(rng), d(rng)};
}
}  // namespace

TEST_CASE("parametrix plug-in values") {
  const auto a1 = coefficient_one();
  const Vec3 x(1, 0, 0), y(0, 0, 0);
  CHECK(kernels::parametrix(x, y, a1) == doctest::Approx(-1.0 / (4.0 * kPi)));

  // doubling a(y) halves the value
  Coefficient a2 = coefficient_one();
  a2.value = [](const Vec3&) { return 2.0; };
  a2.constant = true;
  CHECK(kernels::parametrix(x, y, a2) ==
        doctest::Approx(-0.5 / (4.0 * kPi)).epsilon(1e-14));
}

TEST_CASE("parametrix is the scaled Laplace fundamental solution") {
  const auto a = coefficient_one_plus_r2();
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = random_point(), y = random_point();
    if ((x - y).norm() < 1e-3) continue;
    CHECK(kernels::parametrix(x, y, a) ==
          doctest::Approx(kernels::laplace_fs(x, y) / a(y)).epsilon(1e-14));
  }
}

TEST_CASE("remainder vanishes for constant coefficients") {
  const auto a = coefficient_one();
  for (int i = 0; i < 20; ++i)
    CHECK(kernels::remainder(random_point(), random_point(), a) == 0.0);
}

TEST_CASE("remainder equals grad a . grad_x parametrix") {
  const auto a = coefficient_one_plus_r2();
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = random_point(), y = random_point();
    if ((x - y).norm() < 1e-2) continue;
    const auto e = kernels::parametrix_eval(x, y, a);
    CHECK(kernels::remainder(x, y, a) ==
          doctest::Approx(a.gradient(x).dot(e.gradient_x)).epsilon(1e-12));
  }
}

TEST_CASE("remainder hand-computed value for a = 1 + x1") {
  const auto a = coefficient_one_plus_x1();
  const Vec3 y(0.0, 0.2, -0.1);  // a(y) = 1
  const Vec3 x = y + Vec3(1, 0, 0);
  CHECK(kernels::remainder(x, y, a) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-14));
}

TEST_CASE("laplace_fs is symmetric") {
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = random_point(), y = random_point();
    if ((x - y).norm() < 1e-3) continue;
    CHECK(kernels::laplace_fs(x, y) == kernels::laplace_fs(y, x));
  }
}

TEST_CASE("conormal kernel: hand derivative and solid-angle sign") {
  // differentiating P_Delta by hand gives n(x).(x-y)/(4 pi |x-y|^3); the
  // spec example's (y-x) orientation contradicts the Gauss solid-angle
  // identity it also asserts (W 1 = -1 inside), so the (x-y) form is frozen
  const auto a1 = coefficient_one();
  for (int i = 0; i < 30; ++i) {
    const Vec3 x = random_point(), y = random_point();
    if ((x - y).norm() < 1e-2) continue;
    const Vec3 n = random_point().normalized();
    const Vec3 d = x - y;
    const double r = d.norm();
    const double expect = n.dot(d) / (4.0 * kPi * r * r * r);
    CHECK(kernels::conormal_kernel(x, y, a1, n) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("conormal kernel scales by a(x)/a(y)") {
  const auto a = coefficient_one_plus_r2();
  const auto a1 = coefficient_one();
  for (int i = 0; i < 30; ++i) {
    const Vec3 x = random_point(), y = random_point();
    if ((x - y).norm() < 1e-2) continue;
    const Vec3 n = random_point().normalized();
    CHECK(kernels::conormal_kernel(x, y, a, n) ==
          doctest::Approx(a(x) / a(y) * kernels::conormal_kernel(x, y, a1, n))
              .epsilon(1e-12));
  }
}

TEST_CASE("gradients match central finite differences") {
  const auto a = coefficient_one_plus_r2();
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = random_point(), y = random_point();
    if ((x - y).norm() < 0.3) continue;
    const auto e = kernels::parametrix_eval(x, y, a);
    const auto fx = oracle::fd_check(
        [&](const Vec3& p) { return kernels::parametrix(p, y, a); }, x, 1e-3);
    const auto fy = oracle::fd_check(
        [&](const Vec3& p) { return kernels::parametrix(x, p, a); }, y, 1e-3);
    CHECK((e.gradient_x - fx.gradient).norm() <= 1e-6 * e.gradient_x.norm());
    CHECK((e.gradient_y - fy.gradient).norm() <= 1e-6 * e.gradient_y.norm());
  }
}

TEST_CASE("translation invariance for constant coefficients") {
  const auto a1 = coefficient_one();
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = random_point(), y = random_point();
    if ((x - y).norm() < 1e-2) continue;
    const auto e = kernels::parametrix_eval(x, y, a1);
    CHECK((e.gradient_x + e.gradient_y).norm() <= 1e-14);
  }
}

TEST_CASE("remainder stays O(|x-y|^-2) near the diagonal") {
  const auto a = coefficient_one_plus_r2();
  const Vec3 x0(0.3, -0.2, 0.5);
  const Vec3 dir = Vec3(1, 2, -1).normalized();
  double bound = 0.0;
  for (double h = 1e-1; h >= 1e-6; h *= 0.1) {
    const Vec3 y = x0 + h * dir;
    bound = std::max(bound, h * h * std::abs(kernels::remainder(x0, y, a)));
  }
  CHECK(bound < 1.0);  // |grad a| / (4 pi a) stays bounded near x0
}

TEST_CASE("diagonal evaluation is a hard error") {
  const auto a = coefficient_one();
  const Vec3 x(0.1, 0.2, 0.3);
  CHECK_THROWS_AS(kernels::parametrix(x, x, a), std::domain_error);
  CHECK_THROWS_AS(kernels::remainder(x, x, a), std::domain_error);
  CHECK_THROWS_AS(kernels::laplace_fs(x, x), std::domain_error);
  CHECK_THROWS_AS(kernels::conormal_kernel(x, x, a, Vec3(0, 0, 1)), std::domain_error);
}

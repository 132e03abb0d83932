#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdie/linalg.hpp"

#include <cmath>
#include <random>

using namespace bdie::linalg;

namespace {

// Roots of the Hilbert-3 characteristic polynomial by bisection: the matrix
// is SPD, so the singular values equal the eigenvalues. Independent of the
// SVD implementation under test.
std::array<double, 3> hilbert3_singular_values() {
  auto p = [](double l) {
    return ((l - 23.0 / 15.0) * l + 127.0 / 720.0) * l - 1.0 / 2160.0;
  };
  auto bisect = [&](double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      ((p(lo) < 0) == (p(mid) < 0) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  return {bisect(1.0, 2.0), bisect(0.05, 0.5), bisect(1e-4, 0.05)};
}

}  // namespace

TEST_CASE("identity solve returns the right-hand side") {
  const Matrix a = Matrix::Identity(5, 5);
  Vector b(5);
  b << 1, -2, 3, 0.5, 4;
  CHECK((lu_solve(a, b) - b).norm() == 0.0);
}

TEST_CASE("lu_solve hits the 1e-10 residual contract on random systems") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 5; ++trial) {
    Matrix a(40, 40);
    Vector b(40);
    for (int i = 0; i < 40; ++i) {
      b[i] = dist(rng);
      for (int j = 0; j < 40; ++j) a(i, j) = dist(rng);
    }
    a += 40.0 * Matrix::Identity(40, 40);  // keep it well conditioned
    const Vector x = lu_solve(a, b);
    CHECK((a * x - b).norm() <= 1e-10 * b.norm());
  }
}

TEST_CASE("exactly singular matrices raise a pivot failure") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;  // rank 2
  Vector b = Vector::Ones(3);
  CHECK_THROWS_AS(lu_solve(a, b), std::runtime_error);
}

TEST_CASE("hilbert 3x3 singular values match the characteristic polynomial") {
  Matrix h(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) h(i, j) = 1.0 / (i + j + 1);
  const auto ref = hilbert3_singular_values();
  const auto dec = svd(h);
  for (int i = 0; i < 3; ++i)
    CHECK(dec.sigma[i] == doctest::Approx(ref[i]).epsilon(1e-8));
}

TEST_CASE("svd of diag(3,2,1)") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 3;
  a(1, 1) = 2;
  a(2, 2) = 1;
  const auto dec = svd(a);
  CHECK(dec.sigma[0] == doctest::Approx(3.0));
  CHECK(dec.sigma[1] == doctest::Approx(2.0));
  CHECK(dec.sigma[2] == doctest::Approx(1.0));
}

TEST_CASE("svd reconstruction and orthogonality") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist;
  Matrix a(30, 18);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) = dist(rng);
  const auto dec = svd(a);
  // non-negative, descending
  for (int i = 0; i + 1 < dec.sigma.size(); ++i) {
    CHECK(dec.sigma[i] >= dec.sigma[i + 1]);
    CHECK(dec.sigma[i + 1] >= 0.0);
  }
  const Matrix rec = dec.u * dec.sigma.asDiagonal() * dec.v.transpose();
  CHECK((rec - a).norm() <= 1e-10 * a.norm());
  const int k = static_cast<int>(dec.sigma.size());
  CHECK((dec.u.transpose() * dec.u - Matrix::Identity(k, k)).norm() <= 1e-10);
  CHECK((dec.v.transpose() * dec.v - Matrix::Identity(k, k)).norm() <= 1e-10);
}

TEST_CASE("lstsq residual is orthogonal to the column space") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> dist;
  Matrix a(25, 10);
  Vector b(25);
  for (int i = 0; i < 25; ++i) {
    b[i] = dist(rng);
    for (int j = 0; j < 10; ++j) a(i, j) = dist(rng);
  }
  const Vector x = lstsq(a, b);
  CHECK((a.transpose() * (a * x - b)).norm() <= 1e-8 * a.norm() * b.norm());
}

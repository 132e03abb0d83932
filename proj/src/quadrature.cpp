#include "bdie/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace bdie {

namespace {

// Golub-Welsch on the Jacobi matrix of the weight (1-x)^alpha on [-1,1],
// then mapped to [0,1] with the weight power absorbed.
LineRule golub_welsch_jacobi(int n, int alpha) {
  if (n < 1) throw std::invalid_argument("quadrature: need at least one point");
  const double a = static_cast<double>(alpha);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double dk;
    if (k == 0)
      dk = -a / (a + 2.0);
    else {
      const double s = 2.0 * k + a;
      dk = -a * a / (s * (s + 2.0));
    }
    J(k, k) = dk;
    if (k + 1 < n) {
      double b2;
      if (k == 0)
        b2 = 4.0 * (1.0 + a) / ((2.0 + a) * (2.0 + a) * (3.0 + a));
      else {
        const double m = k + 1.0;
        const double s = 2.0 * m + a;
        b2 = 4.0 * m * (m + a) * m * (m + a) / (s * s * (s + 1.0) * (s - 1.0));
      }
      J(k, k + 1) = J(k + 1, k) = std::sqrt(b2);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
  LineRule r;
  r.x.resize(n);
  r.w.resize(n);
  const double scale = std::pow(0.5, a + 1.0);
  for (int i = 0; i < n; ++i) {
    r.x[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    const double v0 = es.eigenvectors()(0, i);
    r.w[i] = mu0 * v0 * v0 * scale;
  }
  return r;
}

QuadratureRule triangle_table(int order) {
  QuadratureRule r;
  r.kind = ElementKind::Triangle;
  r.order = order;
  auto add = [&r](double x, double y, double w) {
    r.points.push_back({x, y, 0.0});
    r.weights.push_back(w);
  };
  switch (order) {
    case 1:
      add(1.0 / 3.0, 1.0 / 3.0, 0.5);
      break;
    case 2:
      add(1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0);
      add(2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0);
      add(1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0);
      break;
    case 3:
      add(1.0 / 3.0, 1.0 / 3.0, -27.0 / 96.0);
      add(0.6, 0.2, 25.0 / 96.0);
      add(0.2, 0.6, 25.0 / 96.0);
      add(0.2, 0.2, 25.0 / 96.0);
      break;
    default:
      throw std::invalid_argument("triangle_table: no rule of requested order");
  }
  return r;
}

QuadratureRule tetrahedron_table(int order) {
  QuadratureRule r;
  r.kind = ElementKind::Tetrahedron;
  r.order = order;
  auto add = [&r](double x, double y, double z, double w) {
    r.points.push_back({x, y, z});
    r.weights.push_back(w);
  };
  switch (order) {
    case 1:
      add(0.25, 0.25, 0.25, 1.0 / 6.0);
      break;
    case 2: {
      const double a = 0.5854101966249685;  // (5+3*sqrt(5))/20
      const double b = 0.1381966011250105;  // (5-sqrt(5))/20
      add(a, b, b, 1.0 / 24.0);
      add(b, a, b, 1.0 / 24.0);
      add(b, b, a, 1.0 / 24.0);
      add(b, b, b, 1.0 / 24.0);
      break;
    }
    case 3: {
      add(0.25, 0.25, 0.25, -4.0 / 30.0);
      const double a = 0.5, b = 1.0 / 6.0;
      const double w = 9.0 / 120.0;
      add(a, b, b, w);
      add(b, a, b, w);
      add(b, b, a, w);
      add(b, b, b, w);
      break;
    }
    default:
      throw std::invalid_argument("tetrahedron_table: no rule of requested order");
  }
  return r;
}

// Conical-product (collapsed coordinate) rule; exact for total degree
// <= 2n-1 with n points per axis.
QuadratureRule triangle_conical(int order) {
  const int n = (order + 2) / 2;
  const LineRule gj1 = gauss_jacobi_01(n, 1);
  const LineRule gl = gauss_legendre_01(n);
  QuadratureRule r;
  r.kind = ElementKind::Triangle;
  r.order = order;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double xi = gj1.x[i], eta = gl.x[j];
      r.points.push_back({xi, eta * (1.0 - xi), 0.0});
      r.weights.push_back(gj1.w[i] * gl.w[j]);
    }
  return r;
}

QuadratureRule tetrahedron_conical(int order) {
  const int n = (order + 2) / 2;
  const LineRule gj2 = gauss_jacobi_01(n, 2);
  const LineRule gj1 = gauss_jacobi_01(n, 1);
  const LineRule gl = gauss_legendre_01(n);
  QuadratureRule r;
  r.kind = ElementKind::Tetrahedron;
  r.order = order;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double xi = gj2.x[i], eta = gj1.x[j], zeta = gl.x[k];
        r.points.push_back(
            {xi, eta * (1.0 - xi), zeta * (1.0 - xi) * (1.0 - eta)});
        r.weights.push_back(gj2.w[i] * gj1.w[j] * gl.w[k]);
      }
  return r;
}

}  // namespace

LineRule gauss_legendre_01(int n) { return golub_welsch_jacobi(n, 0); }

LineRule gauss_jacobi_01(int n, int alpha) {
  if (alpha < 0) throw std::invalid_argument("gauss_jacobi_01: alpha must be >= 0");
  return golub_welsch_jacobi(n, alpha);
}

QuadratureRule quadrature_for(ElementKind kind, int order) {
  if (kind == ElementKind::Triangle) {
    if (order < 1 || order > 6)
      throw std::invalid_argument("quadrature_for: triangle orders 1..6 supported");
    if (order <= 3) return triangle_table(order);
    return triangle_conical(order);
  }
  if (order < 1 || order > 5)
    throw std::invalid_argument("quadrature_for: tetrahedron orders 1..5 supported");
  if (order <= 3) return tetrahedron_table(order);
  return tetrahedron_conical(order);
}

}  // namespace bdie

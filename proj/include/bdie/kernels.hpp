#pragma once

#include "bdie/fields.hpp"
#include "bdie/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bdie::kernels {

inline constexpr double four_pi = 4.0 * std::numbers::pi;

/// The diagonal is a hard error; all smoothing lives in quadrature.
inline void require_offdiagonal(const Vec3& x, const Vec3& y) {
  if ((x - y).squaredNorm() == 0.0)
    throw std::domain_error("kernel evaluated on the diagonal x == y");
}

/// Fundamental solution of the Laplace equation, -1/(4 pi |x-y|).
inline double laplace_fs(const Vec3& x, const Vec3& y) {
  require_offdiagonal(x, y);
  return -1.0 / (four_pi * (x - y).norm());
}

inline Vec3 grad_x_laplace_fs(const Vec3& x, const Vec3& y) {
  require_offdiagonal(x, y);
  const Vec3 d = x - y;
  const double r = d.norm();
  return d / (four_pi * r * r * r);
}

/// Parametrix P(x,y) = -1/(4 pi a(y) |x-y|).
inline double parametrix(const Vec3& x, const Vec3& y, const Coefficient& a) {
  return laplace_fs(x, y) / a(y);
}

/// Remainder R(x,y) = grad a(x) . grad_x P(x,y)
///                  = (x-y) . grad a(x) / (4 pi a(y) |x-y|^3).
inline double remainder(const Vec3& x, const Vec3& y, const Coefficient& a) {
  require_offdiagonal(x, y);
  const Vec3 d = x - y;
  const double r = d.norm();
  return d.dot(a.gradient(x)) / (four_pi * a(y) * r * r * r);
}

/// Double-layer kernel T+_x P(x,y) = a(x) n(x) . grad_x P(x,y).
inline double conormal_kernel(const Vec3& x, const Vec3& y, const Coefficient& a,
                              const Vec3& nx) {
  return a(x) * nx.dot(grad_x_laplace_fs(x, y)) / a(y);
}

/// Target-side conormal T+_y P(x,y) = a(y) n(y) . grad_y P(x,y); expands to
/// n(y).grad_y P_Delta - (dn a / a)(y) P_Delta, the kernel of W'.
inline double conormal_kernel_y(const Vec3& x, const Vec3& y, const Coefficient& a,
                                const Vec3& ny) {
  require_offdiagonal(x, y);
  const Vec3 d = y - x;
  const double r = d.norm();
  const double dl = ny.dot(d) / (four_pi * r * r * r);
  return dl - ny.dot(a.gradient(y)) / a(y) * laplace_fs(x, y);
}

/// Laplace counterparts of the two conormal kernels.
inline double conormal_kernel_laplace(const Vec3& x, const Vec3& y, const Vec3& nx) {
  return nx.dot(grad_x_laplace_fs(x, y));
}
inline double conormal_kernel_y_laplace(const Vec3& x, const Vec3& y, const Vec3& ny) {
  require_offdiagonal(x, y);
  const Vec3 d = y - x;
  const double r = d.norm();
  return ny.dot(d) / (four_pi * r * r * r);
}

struct KernelPointEval {
  double value;
  Vec3 gradient_x;
  Vec3 gradient_y;
};

/// Value and both gradients of the parametrix in one evaluation.
inline KernelPointEval parametrix_eval(const Vec3& x, const Vec3& y, const Coefficient& a) {
  require_offdiagonal(x, y);
  const Vec3 d = x - y;
  const double r = d.norm();
  const double ay = a(y);
  const double pd = -1.0 / (four_pi * r);
  const Vec3 gx = d / (four_pi * r * r * r);
  KernelPointEval e;
  e.value = pd / ay;
  e.gradient_x = gx / ay;
  e.gradient_y = -gx / ay - (a.gradient(y) / (ay * ay)) * pd;
  return e;
}

}  // namespace bdie::kernels

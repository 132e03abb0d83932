#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace bdie {

enum class ElementKind { Triangle, Tetrahedron };

/// Quadrature rule on the reference triangle {(0,0),(1,0),(0,1)} or the
/// reference tetrahedron {0,e1,e2,e3}. Weights sum to the reference measure
/// (1/2 resp. 1/6) and the rule integrates polynomials up to `order` exactly.
struct QuadratureRule {
  ElementKind kind{ElementKind::Triangle};
  int order{0};
  std::vector<std::array<double, 3>> points;  // z component unused for triangles
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// Supported orders: 1..6 (triangle), 1..5 (tetrahedron). Unsupported orders
/// throw std::invalid_argument.
QuadratureRule quadrature_for(ElementKind kind, int order);

/// n-point Gauss rules on [0,1]. gauss_jacobi_01 integrates with the weight
/// (1-x)^alpha; both are exact for polynomials of degree <= 2n-1.
struct LineRule {
  std::vector<double> x, w;
};
LineRule gauss_legendre_01(int n);
LineRule gauss_jacobi_01(int n, int alpha);

}  // namespace bdie

#pragma once

#include <vector>

namespace am2r {

struct QuadPoint1D {
  double x;
  double w;
};

struct QuadPoint2D {
  double xi;
  double eta;
  double w;
};

// Gauss-Legendre rule with n points on [-1,1], exact for degree 2n-1.
std::vector<QuadPoint1D> gauss_legendre(int n);

// Same rule mapped to [0,1].
std::vector<QuadPoint1D> gauss_legendre01(int n);

// Rule on the reference triangle {xi>=0, eta>=0, xi+eta<=1}, exact for all
// bivariate polynomials of total degree <= deg. Built from a tensor
// Gauss-Legendre grid under the collapsed map (u,v) -> (u, v(1-u)); the
// Jacobian factor (1-u) is polynomial, so exactness is preserved.
// Weights sum to the reference area 1/2.
const std::vector<QuadPoint2D>& triangle_rule(int deg);

}  // namespace am2r

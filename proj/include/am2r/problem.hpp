#pragma once

#include "am2r/mesh.hpp"

#include <functional>
#include <string>

namespace am2r {

// Poisson model problem -div(grad u) = f on one of the supported geometries,
// with Dirichlet data g on the whole boundary.
struct ProblemSpec {
  GeometryKind geometry = GeometryKind::UnitSquare;
  // Opening angle of the removed sector for the pacman geometry, in (0, 2*pi).
  double omega = 0.0;

  std::function<double(const Vec2&)> source;
  std::function<double(const Vec2&)> dirichlet;
  // Optional manufactured solution; enables energy_error and corner checks.
  std::function<double(const Vec2&)> exact;
  std::function<Vec2(const Vec2&)> exact_grad;
  // Leading corner singularity exponent r^alpha, if the solution has one.
  double corner_exponent = 0.0;

  std::string id;

  bool has_exact() const { return static_cast<bool>(exact); }
};

// u = sin(pi x) sin(pi y) on the unit square.
ProblemSpec make_square_sine();
// u = x + y, harmonic, reproduced exactly by every order.
ProblemSpec make_square_linear();
// u = x^2 - y^2, harmonic, reproduced exactly from order 2 on.
ProblemSpec make_square_saddle();
// f = 0, g = 0; the discrete solution is identically zero.
ProblemSpec make_square_zero();
// Re-entrant corner on (-1,1)^2 minus the fourth quadrant:
// u = r^(2/3) sin(2 phi / 3), harmonic, with phi measured from the positive
// x axis counterclockwise in [0, 3 pi / 2].
ProblemSpec make_lshape_corner();
// Unit disk minus a closed sector of opening angle omega:
// u = r^alpha sin(alpha phi) with alpha = pi / (2 pi - omega),
// phi in [0, 2 pi - omega].
ProblemSpec make_pacman_corner(double omega);

// Builds the coarsest conforming mesh of the geometry at the given grid
// resolution, with every element at polynomial order `order`, refinement
// edges assigned (longest edge, ties by lowest opposite-vertex index) and
// boundary edges tagged. For the pacman geometry the curved boundary is the
// unit circle and its tag projects future split points back onto it.
TriMesh build_initial_mesh(const ProblemSpec& spec, int resolution, int order = 1);

}  // namespace am2r

#include "doctest.h"

#include "am2r/fem.hpp"
#include "am2r/problem.hpp"
#include "am2r/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace am2r;

namespace {

TriMesh one_tri(int order) {
  TriMesh m;
  m.vertices = {Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  Tri t;
  t.v = {0, 1, 2};
  t.order = order;
  m.tris = {t};
  assign_refinement_edges(m);
  tag_boundary_edges(m);
  m.id = next_mesh_id();
  return m;
}

double fit_slope(const std::vector<double>& lx, const std::vector<double>& ly) {
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

// Reference coordinates of a point on local edge (la, lb) at global edge
// parameter s (running from the lower global vertex id to the higher).
Vec2 edge_ref_point(const Tri& tri, int la, int lb, double s) {
  static const Vec2 ref[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const double t = (tri.v[la] < tri.v[lb]) ? s : 1.0 - s;
  return (1.0 - t) * ref[la] + t * ref[lb];
}

}  // namespace

TEST_CASE("dof counts for the documented examples") {
  auto square = build_initial_mesh(make_square_sine(), 1, 1);
  CHECK(count_dofs(square) == 4);
  for (auto& t : square.tris) t.order = 2;
  square.id = next_mesh_id();
  CHECK(count_dofs(square) == 9);
  CHECK(count_dofs(one_tri(3)) == 10);
  CHECK(count_dofs(one_tri(8)) == 3 + 3 * 7 + 21);
}

TEST_CASE("dof count does not depend on element enumeration") {
  auto m = build_initial_mesh(make_lshape_corner(), 2, 1);
  m.tris[0].order = 4;
  m.tris[3].order = 2;
  m.tris[5].order = 7;
  m.id = next_mesh_id();
  const int n0 = count_dofs(m);
  auto shuffled = m;
  std::reverse(shuffled.tris.begin(), shuffled.tris.end());
  shuffled.id = next_mesh_id();
  CHECK(count_dofs(shuffled) == n0);
}

TEST_CASE("minimum rule on a shared edge") {
  auto m = build_initial_mesh(make_square_sine(), 1, 1);
  m.tris[0].order = 5;
  m.tris[1].order = 3;
  m.id = next_mesh_id();
  const auto dm = build_dof_map(m);
  // Shared diagonal carries min(5,3)-1 = 2 modes; exterior edges keep their
  // element's order.
  int shared = -1;
  for (int le = 0; le < 3; ++le)
    for (int le2 = 0; le2 < 3; ++le2)
      if (dm.elem_edge[0][le] == dm.elem_edge[1][le2]) shared = dm.elem_edge[0][le];
  REQUIRE(shared >= 0);
  CHECK(dm.edge_order[shared] == 3);
  CHECK(dm.ndofs == 4 + (4 + 4 + 2 + 2 + 2) + (6 + 1));
}

TEST_CASE("basis: vertex hats form a partition of unity") {
  LocalSignature sig;
  sig.p = 6;
  sig.pe = {4, 6, 5};
  sig.sign = {1, -1, 1};
  Eigen::VectorXd v, dx, dy;
  Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    const double xi = rng.uniform();
    const double eta = rng.uniform() * (1.0 - xi);
    eval_basis(sig, xi, eta, v, dx, dy);
    CHECK(v(0) + v(1) + v(2) == doctest::Approx(1.0).epsilon(1e-13));
    // Edge and bubble modes vanish at every vertex.
    CHECK(local_dof_count(sig) == v.size());
  }
  eval_basis(sig, 0.0, 0.0, v, dx, dy);
  for (int i = 3; i < v.size(); ++i) CHECK(v(i) == 0.0);
}

TEST_CASE("basis derivatives match finite differences") {
  LocalSignature sig;
  sig.p = 7;
  sig.pe = {7, 2, 5};
  sig.sign = {-1, 1, -1};
  Eigen::VectorXd v0, vx1, vx2, vy1, vy2, dx, dy, tmp1, tmp2;
  Rng rng(2);
  const double h = 1e-6;
  for (int k = 0; k < 20; ++k) {
    const double xi = 0.1 + 0.6 * rng.uniform();
    const double eta = 0.1 * (1.0 + rng.uniform());
    eval_basis(sig, xi, eta, v0, dx, dy);
    eval_basis(sig, xi + h, eta, vx1, tmp1, tmp2);
    eval_basis(sig, xi - h, eta, vx2, tmp1, tmp2);
    eval_basis(sig, xi, eta + h, vy1, tmp1, tmp2);
    eval_basis(sig, xi, eta - h, vy2, tmp1, tmp2);
    for (int i = 0; i < v0.size(); ++i) {
      CHECK(dx(i) == doctest::Approx((vx1(i) - vx2(i)) / (2 * h)).epsilon(1e-5));
      CHECK(dy(i) == doctest::Approx((vy1(i) - vy2(i)) / (2 * h)).epsilon(1e-5));
    }
  }
}

TEST_CASE("zero data gives identically zero coefficients") {
  const auto spec = make_square_zero();
  auto m = build_initial_mesh(spec, 2, 3);
  const auto u = solve(m, spec);
  CHECK(u.coeffs.size() == count_dofs(m));
  for (int i = 0; i < u.coeffs.size(); ++i) CHECK(u.coeffs(i) == 0.0);
}

TEST_CASE("linear and quadratic harmonics are reproduced exactly") {
  for (int p : {1, 2, 3}) {
    const auto spec = make_square_linear();
    auto m = build_initial_mesh(spec, 2, p);
    m = refine_h(m, {0, 1, 2});
    const auto u = solve(m, spec);
    CHECK(energy_error(u, m, spec) <= 1e-10);
  }
  for (int p : {2, 3, 4}) {
    const auto spec = make_square_saddle();
    auto m = build_initial_mesh(spec, 2, p);
    m = refine_h(m, {1, 4});
    const auto u = solve(m, spec);
    CHECK(energy_error(u, m, spec) <= 1e-10);
    // Pointwise agreement at interior reference points.
    for (int t = 0; t < m.n_elems(); ++t) {
      const Eigen::Matrix2d J = jacobian(m, t);
      const Vec2 x = m.vertex(t, 0) + J * Vec2(0.25, 0.4);
      CHECK(value_at(m, u, t, 0.25, 0.4) ==
            doctest::Approx(spec.exact(x)).epsilon(1e-9));
    }
  }
  {
    // p = 1 cannot represent the saddle.
    const auto spec = make_square_saddle();
    const auto m = build_initial_mesh(spec, 2, 1);
    const auto u = solve(m, spec);
    CHECK(energy_error(u, m, spec) > 0.1);
  }
}

TEST_CASE("galerkin residual vanishes for polynomial solutions") {
  const auto spec = make_square_saddle();
  auto m = build_initial_mesh(spec, 2, 2);
  m.tris[2].order = 4;
  m.tris[5].order = 3;
  m.id = next_mesh_id();
  const auto u = solve(m, spec);
  const auto r = galerkin_residual(m, u, spec);
  CHECK(r.lpNorm<Eigen::Infinity>() <= 1e-8 * std::max(1.0, gradient_norm(u, m)));
}

TEST_CASE("solution is continuous across mixed-order edges") {
  auto m = build_initial_mesh(make_square_sine(), 1, 1);
  m.tris[0].order = 5;
  m.tris[1].order = 3;
  m.id = next_mesh_id();
  const auto spec = make_square_sine();
  const auto u = solve(m, spec);

  // Locate the shared edge in both elements.
  const auto dm = build_dof_map(m);
  int la0 = -1, lb0 = -1, la1 = -1, lb1 = -1;
  static const int ev[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int le = 0; le < 3; ++le)
    for (int le2 = 0; le2 < 3; ++le2)
      if (dm.elem_edge[0][le] == dm.elem_edge[1][le2]) {
        la0 = ev[le][0];
        lb0 = ev[le][1];
        la1 = ev[le2][0];
        lb1 = ev[le2][1];
      }
  REQUIRE(la0 >= 0);
  for (double s : {0.1, 0.3, 0.5, 0.77, 0.9}) {
    const Vec2 r0 = edge_ref_point(m.tris[0], la0, lb0, s);
    const Vec2 r1 = edge_ref_point(m.tris[1], la1, lb1, s);
    const double u0 = value_at(m, u, 0, r0.x(), r0.y());
    const double u1 = value_at(m, u, 1, r1.x(), r1.y());
    CHECK(u0 == doctest::Approx(u1).epsilon(1e-12));
  }
}

TEST_CASE("dirichlet data is matched on the boundary") {
  const auto spec = make_square_saddle();
  auto m = build_initial_mesh(spec, 2, 2);
  m = refine_h(m, {0, 3});
  const auto u = solve(m, spec);
  const auto dm = build_dof_map(m);
  static const int ev[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int t = 0; t < m.n_elems(); ++t) {
    for (int le = 0; le < 3; ++le) {
      const int a = m.tris[t].v[ev[le][0]];
      const int b = m.tris[t].v[ev[le][1]];
      if (!m.boundary_tags.count(edge_key(a, b))) continue;
      for (double s : {0.25, 0.5, 0.8}) {
        const Vec2 r = edge_ref_point(m.tris[t], ev[le][0], ev[le][1], s);
        const Eigen::Matrix2d J = jacobian(m, t);
        const Vec2 x = m.vertex(t, 0) + J * Vec2(r.x(), r.y());
        CHECK(value_at(m, u, t, r.x(), r.y()) ==
              doctest::Approx(spec.dirichlet(x)).epsilon(1e-9));
      }
    }
  }
  (void)dm;
}

TEST_CASE("smooth problem converges at the expected rate") {
  const auto spec = make_square_sine();
  for (int p : {1, 2}) {
    std::vector<double> lx, ly;
    for (int res : {4, 8, 16, 32}) {
      const auto m = build_initial_mesh(spec, res, p);
      const auto u = solve(m, spec);
      lx.push_back(std::log2(static_cast<double>(count_dofs(m))));
      ly.push_back(std::log2(energy_error(u, m, spec)));
    }
    const double slope = fit_slope(lx, ly);
    CHECK(slope == doctest::Approx(-0.5 * p).epsilon(0.1));
  }
}

TEST_CASE("re-entrant corner limits the uniform rate") {
  const auto spec = make_lshape_corner();
  std::vector<double> lx, ly;
  for (int res : {4, 8, 16, 32}) {
    const auto m = build_initial_mesh(spec, res, 1);
    const auto u = solve(m, spec);
    lx.push_back(std::log2(static_cast<double>(count_dofs(m))));
    ly.push_back(std::log2(energy_error(u, m, spec)));
  }
  const double slope = fit_slope(lx, ly);
  CHECK(std::abs(slope - (-1.0 / 3.0)) < 0.05);
}

TEST_CASE("cg agrees with the direct solver and reports failures") {
  const auto spec = make_square_sine();
  const auto m = build_initial_mesh(spec, 8, 2);
  const auto u1 = solve(m, spec);
  SolverOptions cg;
  cg.method = SolverOptions::Method::Cg;
  const auto u2 = solve(m, spec, cg);
  CHECK(u2.solver_iterations > 0);
  CHECK((u1.coeffs - u2.coeffs).lpNorm<Eigen::Infinity>() <= 1e-7);

  SolverOptions bad = cg;
  bad.maxit_factor = 0.02;
  bool threw = false;
  try {
    solve(m, spec, bad);
  } catch (const SolveError& e) {
    threw = true;
    CHECK(e.iterations > 0);
    CHECK(e.residual > bad.tol);
  }
  CHECK(threw);
}

TEST_CASE("solves are deterministic") {
  const auto spec = make_lshape_corner();
  const auto m = build_initial_mesh(spec, 2, 2);
  const auto u1 = solve(m, spec);
  const auto u2 = solve(m, spec);
  REQUIRE(u1.coeffs.size() == u2.coeffs.size());
  for (int i = 0; i < u1.coeffs.size(); ++i) CHECK(u1.coeffs(i) == u2.coeffs(i));
}

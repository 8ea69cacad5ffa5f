#include "am2r/problem.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace am2r {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Angle in [0, 2*pi) measured counterclockwise from the positive x axis.
double positive_angle(const Vec2& p) {
  double t = std::atan2(p.y(), p.x());
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

// u = r^alpha sin(alpha phi); harmonic away from the corner at the origin.
double corner_value(double alpha, const Vec2& p) {
  const double r = p.norm();
  if (r == 0.0) return 0.0;
  return std::pow(r, alpha) * std::sin(alpha * positive_angle(p));
}

Vec2 corner_gradient(double alpha, const Vec2& p) {
  const double r = p.norm();
  if (r == 0.0) return Vec2::Zero();
  const double phi = positive_angle(p);
  const double s = alpha * std::pow(r, alpha - 1.0);
  return Vec2(s * std::sin((alpha - 1.0) * phi), s * std::cos((alpha - 1.0) * phi));
}

TriMesh square_grid(double x0, double y0, double x1, double y1, int res,
                    std::function<bool(int, int)> keep_cell) {
  TriMesh m;
  const int nx = res, ny = res;
  std::map<std::pair<int, int>, int> vid;
  auto vertex = [&](int i, int j) {
    auto it = vid.find({i, j});
    if (it != vid.end()) return it->second;
    const double x = x0 + (x1 - x0) * i / nx;
    const double y = y0 + (y1 - y0) * j / ny;
    m.vertices.emplace_back(x, y);
    const int id = static_cast<int>(m.vertices.size()) - 1;
    vid.emplace(std::make_pair(i, j), id);
    return id;
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (keep_cell && !keep_cell(i, j)) continue;
      const int ll = vertex(i, j);
      const int lr = vertex(i + 1, j);
      const int ur = vertex(i + 1, j + 1);
      const int ul = vertex(i, j + 1);
      Tri a, b;
      a.v = {ll, lr, ur};
      b.v = {ll, ur, ul};
      m.tris.push_back(a);
      m.tris.push_back(b);
    }
  }
  return m;
}

TriMesh pacman_grid(double omega, int res) {
  const double span = 2.0 * kPi - omega;
  const int wedges = std::max(2, static_cast<int>(std::ceil(span / (kPi / 4.0))));
  const int na = wedges * res;
  TriMesh m;
  m.vertices.emplace_back(0.0, 0.0);
  auto ring_vertex = [&](int ring, int j) {
    // Rings are stored contiguously: ring r >= 1 starts at 1 + (r-1)*(na+1).
    return 1 + (ring - 1) * (na + 1) + j;
  };
  for (int ring = 1; ring <= res; ++ring) {
    const double r = static_cast<double>(ring) / res;
    for (int j = 0; j <= na; ++j) {
      const double phi = span * j / na;
      m.vertices.emplace_back(r * std::cos(phi), r * std::sin(phi));
    }
  }
  for (int j = 0; j < na; ++j) {
    Tri t;
    t.v = {0, ring_vertex(1, j), ring_vertex(1, j + 1)};
    m.tris.push_back(t);
  }
  for (int ring = 2; ring <= res; ++ring) {
    for (int j = 0; j < na; ++j) {
      const int a = ring_vertex(ring - 1, j);
      const int b = ring_vertex(ring, j);
      const int c = ring_vertex(ring, j + 1);
      const int d = ring_vertex(ring - 1, j + 1);
      Tri t1, t2;
      t1.v = {a, b, c};
      t2.v = {a, c, d};
      m.tris.push_back(t1);
      m.tris.push_back(t2);
    }
  }
  // Outer ring chords lie on the unit circle.
  const int arc_tag = 2;
  for (int j = 0; j < na; ++j)
    m.boundary_tags.emplace(edge_key(ring_vertex(res, j), ring_vertex(res, j + 1)),
                            arc_tag);
  m.arc_tag = arc_tag;
  m.geometry = GeometryKind::Pacman;
  return m;
}

}  // namespace

ProblemSpec make_square_sine() {
  ProblemSpec s;
  s.geometry = GeometryKind::UnitSquare;
  s.id = "square_sine";
  s.exact = [](const Vec2& p) {
    return std::sin(kPi * p.x()) * std::sin(kPi * p.y());
  };
  s.exact_grad = [](const Vec2& p) {
    return Vec2(kPi * std::cos(kPi * p.x()) * std::sin(kPi * p.y()),
                kPi * std::sin(kPi * p.x()) * std::cos(kPi * p.y()));
  };
  s.source = [](const Vec2& p) {
    return 2.0 * kPi * kPi * std::sin(kPi * p.x()) * std::sin(kPi * p.y());
  };
  s.dirichlet = s.exact;
  return s;
}

ProblemSpec make_square_linear() {
  ProblemSpec s;
  s.geometry = GeometryKind::UnitSquare;
  s.id = "square_linear";
  s.exact = [](const Vec2& p) { return p.x() + p.y(); };
  s.exact_grad = [](const Vec2&) { return Vec2(1.0, 1.0); };
  s.source = [](const Vec2&) { return 0.0; };
  s.dirichlet = s.exact;
  return s;
}

ProblemSpec make_square_saddle() {
  ProblemSpec s;
  s.geometry = GeometryKind::UnitSquare;
  s.id = "square_saddle";
  s.exact = [](const Vec2& p) { return p.x() * p.x() - p.y() * p.y(); };
  s.exact_grad = [](const Vec2& p) { return Vec2(2.0 * p.x(), -2.0 * p.y()); };
  s.source = [](const Vec2&) { return 0.0; };
  s.dirichlet = s.exact;
  return s;
}

ProblemSpec make_square_zero() {
  ProblemSpec s;
  s.geometry = GeometryKind::UnitSquare;
  s.id = "square_zero";
  s.exact = [](const Vec2&) { return 0.0; };
  s.exact_grad = [](const Vec2&) { return Vec2::Zero(); };
  s.source = [](const Vec2&) { return 0.0; };
  s.dirichlet = s.exact;
  return s;
}

ProblemSpec make_lshape_corner() {
  ProblemSpec s;
  s.geometry = GeometryKind::LShape;
  s.id = "lshape";
  const double alpha = 2.0 / 3.0;
  s.corner_exponent = alpha;
  s.exact = [alpha](const Vec2& p) { return corner_value(alpha, p); };
  s.exact_grad = [alpha](const Vec2& p) { return corner_gradient(alpha, p); };
  s.source = [](const Vec2&) { return 0.0; };
  s.dirichlet = s.exact;
  return s;
}

ProblemSpec make_pacman_corner(double omega) {
  if (!(omega > 0.0 && omega < 2.0 * kPi))
    throw std::invalid_argument("pacman: omega must lie in (0, 2*pi)");
  ProblemSpec s;
  s.geometry = GeometryKind::Pacman;
  s.omega = omega;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "pacman_%.4fpi", omega / kPi);
  s.id = buf;
  const double alpha = kPi / (2.0 * kPi - omega);
  s.corner_exponent = alpha;
  s.exact = [alpha](const Vec2& p) { return corner_value(alpha, p); };
  s.exact_grad = [alpha](const Vec2& p) { return corner_gradient(alpha, p); };
  s.source = [](const Vec2&) { return 0.0; };
  s.dirichlet = s.exact;
  return s;
}

TriMesh build_initial_mesh(const ProblemSpec& spec, int resolution, int order) {
  if (resolution < 1)
    throw std::invalid_argument("build_initial_mesh: resolution must be >= 1");
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument("build_initial_mesh: order out of range");
  TriMesh m;
  switch (spec.geometry) {
    case GeometryKind::UnitSquare:
      m = square_grid(0.0, 0.0, 1.0, 1.0, resolution, nullptr);
      break;
    case GeometryKind::LShape: {
      // (-1,1)^2 with the quadrant x>0, y<0 removed.
      const int res = resolution;
      m = square_grid(-1.0, -1.0, 1.0, 1.0, 2 * res, [res](int i, int j) {
        return !(i >= res && j < res);
      });
      break;
    }
    case GeometryKind::Pacman:
      m = pacman_grid(spec.omega, resolution);
      break;
  }
  m.geometry = spec.geometry;
  for (auto& t : m.tris) t.order = order;
  assign_refinement_edges(m);
  tag_boundary_edges(m);
  m.id = next_mesh_id();
  std::string why;
  if (!is_conforming(m, &why))
    throw std::logic_error("build_initial_mesh: " + why);
  return m;
}

}  // namespace am2r

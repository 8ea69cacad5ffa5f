#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace am2r {

using Vec2 = Eigen::Vector2d;

inline constexpr int kMaxOrder = 8;

// Undirected edge id from two vertex ids.
inline std::uint64_t edge_key(int a, int b) {
  const std::uint32_t lo = static_cast<std::uint32_t>(a < b ? a : b);
  const std::uint32_t hi = static_cast<std::uint32_t>(a < b ? b : a);
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

// Triangle with the newest-vertex-bisection convention baked into the vertex
// order: v[0] is the peak (newest vertex), the refinement edge is (v[1], v[2]).
struct Tri {
  std::array<int, 3> v{-1, -1, -1};
  int order = 1;
  int generation = 0;
};

enum class GeometryKind { UnitSquare, LShape, Pacman };

struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<Tri> tris;
  // Boundary edges with an integer tag; edges absent from the map are interior.
  std::unordered_map<std::uint64_t, int> boundary_tags;
  GeometryKind geometry = GeometryKind::UnitSquare;
  // Tag whose split points are projected back to the unit circle; -1 if none.
  int arc_tag = -1;
  // Bumped on every structural change; lets consumers detect stale references.
  std::uint64_t id = 0;

  int n_elems() const { return static_cast<int>(tris.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }

  const Vec2& vertex(int t, int local) const { return vertices[tris[t].v[local]]; }

  double signed_area(int t) const {
    const Vec2& a = vertex(t, 0);
    const Vec2& b = vertex(t, 1);
    const Vec2& c = vertex(t, 2);
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                  (b.y() - a.y()) * (c.x() - a.x()));
  }

  double area(int t) const;
  double min_angle() const;
  bool uniform_order() const;
  int max_order() const;
};

std::uint64_t next_mesh_id();

// Rotates every triangle so the refinement edge (v[1], v[2]) is its longest
// edge; ties go to the edge whose opposite vertex has the lowest index.
void assign_refinement_edges(TriMesh& mesh);

// Tags every edge incident to exactly one element; existing tags are kept.
void tag_boundary_edges(TriMesh& mesh, int default_tag = 0);

// Bisects every marked element (plus whatever conformity closure demands)
// through its refinement edge. Marked indices outside [0, n_elems) throw.
// Vertex indices of untouched vertices and the relative order of surviving
// elements are preserved; new vertices and elements are appended
// deterministically.
TriMesh refine_h(const TriMesh& mesh, const std::vector<int>& marked);

// Raises elem_order by one on each marked element, saturating at kMaxOrder.
TriMesh refine_p(const TriMesh& mesh, const std::vector<int>& marked);

// One sweep of refine_h with every element marked.
TriMesh refine_all(const TriMesh& mesh);

// Two mark-all sweeps; on product meshes this quadruples the element count
// and halves the mesh size.
TriMesh uniform_refine(const TriMesh& mesh);

bool is_conforming(const TriMesh& mesh, std::string* why = nullptr);

// Plain text snapshot:
//   n_tris n_vertices
//   x y               (per vertex)
//   v0 v1 v2 order    (per triangle)
void write_snapshot(const TriMesh& mesh, std::ostream& os);
TriMesh read_snapshot(std::istream& is);
void write_snapshot_file(const TriMesh& mesh, const std::string& path);

}  // namespace am2r

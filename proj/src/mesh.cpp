#include "am2r/mesh.hpp"

#include <algorithm>
#include "am2r/rng.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace am2r {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Tri rotate_tri(const Tri& t, int peak) {
  Tri out = t;
  for (int i = 0; i < 3; ++i) out.v[i] = t.v[(peak + i) % 3];
  return out;
}

struct RefineWork {
  std::vector<Vec2> verts;
  std::vector<Tri> tris;
  std::vector<char> alive;
  std::unordered_map<std::uint64_t, int> btags;
  std::unordered_map<std::uint64_t, std::array<int, 2>> incid;
  std::unordered_map<std::uint64_t, int> midpoint;
  int arc_tag = -1;

  std::uint64_t refedge(int t) const {
    return edge_key(tris[t].v[1], tris[t].v[2]);
  }

  void incid_add(std::uint64_t e, int t) {
    auto& slots = incid.try_emplace(e, std::array<int, 2>{-1, -1}).first->second;
    if (slots[0] < 0) {
      slots[0] = t;
    } else if (slots[1] < 0) {
      slots[1] = t;
    } else {
      throw std::logic_error("mesh: edge shared by more than two elements");
    }
  }

  void incid_remove(std::uint64_t e, int t) {
    auto it = incid.find(e);
    if (it == incid.end()) return;
    auto& slots = it->second;
    if (slots[0] == t) slots[0] = -1;
    if (slots[1] == t) slots[1] = -1;
    if (slots[0] < 0 && slots[1] < 0) incid.erase(it);
  }

  int neighbor(std::uint64_t e, int t) const {
    auto it = incid.find(e);
    if (it == incid.end()) return -1;
    const auto& slots = it->second;
    if (slots[0] != t && slots[0] >= 0) return slots[0];
    if (slots[1] != t && slots[1] >= 0) return slots[1];
    return -1;
  }

  int midpoint_vertex(std::uint64_t e) {
    auto it = midpoint.find(e);
    if (it != midpoint.end()) return it->second;
    const int a = static_cast<int>(e & 0xffffffffull);
    const int b = static_cast<int>(e >> 32);
    Vec2 p = 0.5 * (verts[a] + verts[b]);
    auto bt = btags.find(e);
    if (bt != btags.end() && arc_tag >= 0 && bt->second == arc_tag) {
      p /= p.norm();
    }
    verts.push_back(p);
    const int id = static_cast<int>(verts.size()) - 1;
    midpoint.emplace(e, id);
    return id;
  }

  void bisect(int t, int m) {
    const Tri T = tris[t];
    alive[t] = 0;
    const std::uint64_t e12 = edge_key(T.v[1], T.v[2]);
    const std::uint64_t e01 = edge_key(T.v[0], T.v[1]);
    const std::uint64_t e20 = edge_key(T.v[2], T.v[0]);
    incid_remove(e12, t);
    incid_remove(e01, t);
    incid_remove(e20, t);

    Tri c1;
    c1.v = {m, T.v[0], T.v[1]};
    c1.order = T.order;
    c1.generation = T.generation + 1;
    Tri c2;
    c2.v = {m, T.v[2], T.v[0]};
    c2.order = T.order;
    c2.generation = T.generation + 1;
    tris.push_back(c1);
    alive.push_back(1);
    const int i1 = static_cast<int>(tris.size()) - 1;
    tris.push_back(c2);
    alive.push_back(1);
    const int i2 = static_cast<int>(tris.size()) - 1;

    incid_add(e01, i1);
    incid_add(e20, i2);
    incid_add(edge_key(T.v[1], m), i1);
    incid_add(edge_key(m, T.v[2]), i2);
    incid_add(edge_key(m, T.v[0]), i1);
    incid_add(edge_key(m, T.v[0]), i2);

    auto bt = btags.find(e12);
    if (bt != btags.end()) {
      const int tag = bt->second;
      btags.erase(bt);
      btags.emplace(edge_key(T.v[1], m), tag);
      btags.emplace(edge_key(m, T.v[2]), tag);
    }
  }
};

// Exact bit-pattern key; equality means bitwise-identical coordinates.
struct PointKey {
  std::uint64_t x, y;
  bool operator==(const PointKey&) const = default;
};

PointKey point_key(const Vec2& p) {
  return {std::bit_cast<std::uint64_t>(p.x()), std::bit_cast<std::uint64_t>(p.y())};
}

struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const {
    std::uint64_t a = k.x;
    std::uint64_t s1 = Rng::splitmix64(a);
    std::uint64_t b = k.y ^ s1;
    return static_cast<std::size_t>(Rng::splitmix64(b));
  }
};

}  // namespace

std::uint64_t next_mesh_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

double TriMesh::area(int t) const { return std::abs(signed_area(t)); }

double TriMesh::min_angle() const {
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < n_elems(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const Vec2& a = vertex(t, i);
      const Vec2 u = vertex(t, (i + 1) % 3) - a;
      const Vec2 v = vertex(t, (i + 2) % 3) - a;
      const double c = u.dot(v) / (u.norm() * v.norm());
      best = std::min(best, std::acos(std::clamp(c, -1.0, 1.0)));
    }
  }
  return best;
}

bool TriMesh::uniform_order() const {
  for (const auto& t : tris)
    if (t.order != tris[0].order) return false;
  return true;
}

int TriMesh::max_order() const {
  int p = 0;
  for (const auto& t : tris) p = std::max(p, t.order);
  return p;
}

void assign_refinement_edges(TriMesh& mesh) {
  for (auto& T : mesh.tris) {
    double best_len = -1.0;
    int best_i = 0;
    int best_opp = std::numeric_limits<int>::max();
    for (int i = 0; i < 3; ++i) {
      const int a = T.v[(i + 1) % 3];
      const int b = T.v[(i + 2) % 3];
      const double L = (mesh.vertices[a] - mesh.vertices[b]).squaredNorm();
      if (L > best_len || (L == best_len && T.v[i] < best_opp)) {
        best_len = L;
        best_i = i;
        best_opp = T.v[i];
      }
    }
    T = rotate_tri(T, best_i);
  }
}

void tag_boundary_edges(TriMesh& mesh, int default_tag) {
  std::unordered_map<std::uint64_t, int> count;
  for (const auto& T : mesh.tris)
    for (int i = 0; i < 3; ++i)
      ++count[edge_key(T.v[i], T.v[(i + 1) % 3])];
  for (const auto& [e, c] : count)
    if (c == 1 && !mesh.boundary_tags.count(e))
      mesh.boundary_tags.emplace(e, default_tag);
}

TriMesh refine_h(const TriMesh& mesh, const std::vector<int>& marked) {
  const int n = mesh.n_elems();
  for (int t : marked)
    if (t < 0 || t >= n) throw std::out_of_range("refine_h: bad element index");

  RefineWork w;
  w.verts = mesh.vertices;
  w.tris = mesh.tris;
  w.alive.assign(n, 1);
  w.btags = mesh.boundary_tags;
  w.arc_tag = mesh.arc_tag;
  for (int t = 0; t < n; ++t)
    for (int i = 0; i < 3; ++i)
      w.incid_add(edge_key(mesh.tris[t].v[i], mesh.tris[t].v[(i + 1) % 3]), t);

  std::vector<int> order(marked);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  long guard = 0;
  const long guard_max = 64l * (n + static_cast<long>(order.size()) + 16);
  std::vector<int> stack;
  for (int t0 : order) {
    if (!w.alive[t0]) continue;
    stack.assign(1, t0);
    while (!stack.empty()) {
      if (++guard > guard_max)
        throw std::logic_error("refine_h: conformity closure did not terminate");
      const int e = stack.back();
      if (!w.alive[e]) {
        stack.pop_back();
        continue;
      }
      const std::uint64_t ek = w.refedge(e);
      const int nb = w.neighbor(ek, e);
      if (nb >= 0 && w.refedge(nb) != ek) {
        stack.push_back(nb);
        continue;
      }
      const int m = w.midpoint_vertex(ek);
      w.bisect(e, m);
      if (nb >= 0) w.bisect(nb, m);
      stack.pop_back();
    }
  }

  TriMesh out;
  out.vertices = std::move(w.verts);
  out.tris.reserve(w.tris.size());
  for (std::size_t i = 0; i < w.tris.size(); ++i)
    if (w.alive[i]) out.tris.push_back(w.tris[i]);
  out.boundary_tags = std::move(w.btags);
  out.geometry = mesh.geometry;
  out.arc_tag = mesh.arc_tag;
  out.id = next_mesh_id();
  return out;
}

TriMesh refine_p(const TriMesh& mesh, const std::vector<int>& marked) {
  for (int t : marked)
    if (t < 0 || t >= mesh.n_elems())
      throw std::out_of_range("refine_p: bad element index");
  TriMesh out = mesh;
  for (int t : marked)
    out.tris[t].order = std::min(out.tris[t].order + 1, kMaxOrder);
  out.id = next_mesh_id();
  return out;
}

TriMesh refine_all(const TriMesh& mesh) {
  std::vector<int> all(mesh.n_elems());
  for (int i = 0; i < mesh.n_elems(); ++i) all[i] = i;
  return refine_h(mesh, all);
}

TriMesh uniform_refine(const TriMesh& mesh) { return refine_all(refine_all(mesh)); }

bool is_conforming(const TriMesh& mesh, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  for (int t = 0; t < mesh.n_elems(); ++t)
    if (!(mesh.signed_area(t) > 0.0))
      return fail("element " + std::to_string(t) + " not positively oriented");

  std::unordered_map<PointKey, int, PointKeyHash> vert_at;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (!vert_at.emplace(point_key(mesh.vertices[v]), v).second) {
      return fail("duplicate vertex coordinates at id " + std::to_string(v));
    }
  }

  std::unordered_map<std::uint64_t, int> count;
  for (const auto& T : mesh.tris)
    for (int i = 0; i < 3; ++i)
      ++count[edge_key(T.v[i], T.v[(i + 1) % 3])];

  int n_boundary = 0;
  for (const auto& [e, c] : count) {
    if (c != 1 && c != 2)
      return fail("edge incidence count " + std::to_string(c));
    if (c == 1) {
      ++n_boundary;
      if (!mesh.boundary_tags.count(e)) return fail("untagged boundary edge");
    } else if (mesh.boundary_tags.count(e)) {
      return fail("interior edge carries a boundary tag");
    }
    const int a = static_cast<int>(e & 0xffffffffull);
    const int b = static_cast<int>(e >> 32);
    const Vec2 mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    auto hit = vert_at.find(point_key(mid));
    if (hit != vert_at.end() && mesh.vertices[hit->second] == mid)
      return fail("hanging vertex " + std::to_string(hit->second) +
                  " at midpoint of edge (" + std::to_string(a) + "," +
                  std::to_string(b) + ")");
  }
  if (static_cast<int>(mesh.boundary_tags.size()) != n_boundary)
    return fail("boundary tag map does not match boundary edges");

  // Euler characteristic of a triangulated disk.
  const long V = mesh.n_vertices();
  const long E = static_cast<long>(count.size());
  const long F = mesh.n_elems();
  if (V - E + F != 1)
    return fail("Euler characteristic V-E+F = " + std::to_string(V - E + F));
  return true;
}

void write_snapshot(const TriMesh& mesh, std::ostream& os) {
  os << mesh.n_elems() << ' ' << mesh.n_vertices() << '\n';
  for (const auto& p : mesh.vertices)
    os << fmt_double(p.x()) << ' ' << fmt_double(p.y()) << '\n';
  for (const auto& T : mesh.tris)
    os << T.v[0] << ' ' << T.v[1] << ' ' << T.v[2] << ' ' << T.order << '\n';
}

TriMesh read_snapshot(std::istream& is) {
  TriMesh mesh;
  int nt = 0, nv = 0;
  if (!(is >> nt >> nv)) throw std::runtime_error("snapshot: bad header");
  mesh.vertices.resize(nv);
  for (int i = 0; i < nv; ++i) {
    double x, y;
    if (!(is >> x >> y)) throw std::runtime_error("snapshot: bad vertex line");
    mesh.vertices[i] = Vec2(x, y);
  }
  mesh.tris.resize(nt);
  for (int i = 0; i < nt; ++i) {
    Tri& T = mesh.tris[i];
    if (!(is >> T.v[0] >> T.v[1] >> T.v[2] >> T.order))
      throw std::runtime_error("snapshot: bad element line");
    for (int k = 0; k < 3; ++k)
      if (T.v[k] < 0 || T.v[k] >= nv)
        throw std::runtime_error("snapshot: vertex id out of range");
  }
  tag_boundary_edges(mesh);
  mesh.id = next_mesh_id();
  return mesh;
}

void write_snapshot_file(const TriMesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_snapshot(mesh, os);
}

}  // namespace am2r

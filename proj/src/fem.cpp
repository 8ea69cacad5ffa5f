#include "am2r/fem.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace am2r {

namespace {

// P_0..P_n and derivatives at x by the three-term recurrence.
void legendre_all(int n, double x, double* P, double* dP) {
  if (n < 0) return;
  P[0] = 1.0;
  dP[0] = 0.0;
  if (n == 0) return;
  P[1] = x;
  dP[1] = 1.0;
  for (int k = 2; k <= n; ++k) {
    P[k] = ((2.0 * k - 1.0) * x * P[k - 1] - (k - 1.0) * P[k - 2]) / k;
    dP[k] = dP[k - 2] + (2.0 * k - 1.0) * P[k - 1];
  }
}

constexpr int kEdgeVerts[3][2] = {{0, 1}, {1, 2}, {2, 0}};

struct BasisTable {
  Eigen::MatrixXd val, dxi, deta;  // n_local x n_points
};

std::uint32_t table_key(const LocalSignature& sig, int deg) {
  std::uint32_t k = static_cast<std::uint32_t>(sig.p);
  for (int e = 0; e < 3; ++e) k = (k << 4) | static_cast<std::uint32_t>(sig.pe[e]);
  for (int e = 0; e < 3; ++e) k = (k << 1) | (sig.sign[e] > 0 ? 1u : 0u);
  return (k << 8) | static_cast<std::uint32_t>(deg);
}

const BasisTable& basis_table(const LocalSignature& sig, int deg) {
  thread_local std::unordered_map<std::uint32_t, BasisTable> cache;
  const std::uint32_t key = table_key(sig, deg);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const auto& rule = triangle_rule(deg);
  const int nl = local_dof_count(sig);
  const int nq = static_cast<int>(rule.size());
  BasisTable tab;
  tab.val.resize(nl, nq);
  tab.dxi.resize(nl, nq);
  tab.deta.resize(nl, nq);
  Eigen::VectorXd v(nl), dx(nl), dy(nl);
  for (int q = 0; q < nq; ++q) {
    eval_basis(sig, rule[q].xi, rule[q].eta, v, dx, dy);
    tab.val.col(q) = v;
    tab.dxi.col(q) = dx;
    tab.deta.col(q) = dy;
  }
  return cache.emplace(key, std::move(tab)).first->second;
}

// Trace modes of an edge in its global parameter t in [0,1]:
// k-th mode is t(1-t) P_{k-2}(2t-1), k = 2..pe.
void edge_trace_modes(int pe, double t, double* phi) {
  double P[kMaxOrder + 1], dP[kMaxOrder + 1];
  legendre_all(pe - 2, 2.0 * t - 1.0, P, dP);
  const double q = t * (1.0 - t);
  for (int k = 2; k <= pe; ++k) phi[k - 2] = q * P[k - 2];
}

}  // namespace

int local_dof_count(const LocalSignature& sig) {
  int n = 3;
  for (int e = 0; e < 3; ++e) n += std::max(0, sig.pe[e] - 1);
  n += (sig.p - 1) * (sig.p - 2) / 2;
  return n;
}

void eval_basis(const LocalSignature& sig, double xi, double eta,
                Eigen::VectorXd& val, Eigen::VectorXd& dxi,
                Eigen::VectorXd& deta) {
  const int nl = local_dof_count(sig);
  val.resize(nl);
  dxi.resize(nl);
  deta.resize(nl);

  const double lam[3] = {1.0 - xi - eta, xi, eta};
  const double dlx[3] = {-1.0, 1.0, 0.0};
  const double dly[3] = {-1.0, 0.0, 1.0};

  for (int i = 0; i < 3; ++i) {
    val(i) = lam[i];
    dxi(i) = dlx[i];
    deta(i) = dly[i];
  }
  int idx = 3;

  double P[kMaxOrder + 1], dP[kMaxOrder + 1];
  for (int le = 0; le < 3; ++le) {
    const int pe = sig.pe[le];
    if (pe < 2) continue;
    const int a = kEdgeVerts[le][0];
    const int b = kEdgeVerts[le][1];
    const double s = static_cast<double>(sig.sign[le]);
    const double arg = s * (lam[b] - lam[a]);
    const double darg_x = s * (dlx[b] - dlx[a]);
    const double darg_y = s * (dly[b] - dly[a]);
    legendre_all(pe - 2, arg, P, dP);
    const double q = lam[a] * lam[b];
    const double dq_x = dlx[a] * lam[b] + lam[a] * dlx[b];
    const double dq_y = dly[a] * lam[b] + lam[a] * dly[b];
    for (int k = 2; k <= pe; ++k) {
      val(idx) = q * P[k - 2];
      dxi(idx) = dq_x * P[k - 2] + q * dP[k - 2] * darg_x;
      deta(idx) = dq_y * P[k - 2] + q * dP[k - 2] * darg_y;
      ++idx;
    }
  }

  if (sig.p >= 3) {
    double P1[kMaxOrder + 1], dP1[kMaxOrder + 1];
    double P2[kMaxOrder + 1], dP2[kMaxOrder + 1];
    const double a1 = lam[1] - lam[0];  // d = (2, 1)
    const double a2 = 2.0 * lam[2] - 1.0;  // d = (0, 2)
    legendre_all(sig.p - 3, a1, P1, dP1);
    legendre_all(sig.p - 3, a2, P2, dP2);
    const double B = lam[0] * lam[1] * lam[2];
    const double dB_x = lam[2] * (lam[0] - lam[1]);
    const double dB_y = lam[1] * (lam[0] - lam[2]);
    for (int total = 0; total <= sig.p - 3; ++total) {
      for (int i = 0; i <= total; ++i) {
        const int j = total - i;
        val(idx) = B * P1[i] * P2[j];
        dxi(idx) = dB_x * P1[i] * P2[j] + 2.0 * B * dP1[i] * P2[j];
        deta(idx) = dB_y * P1[i] * P2[j] + B * dP1[i] * P2[j] +
                    2.0 * B * P1[i] * dP2[j];
        ++idx;
      }
    }
  }
}

void DofMap::local_to_global(int t, const Tri& tri, std::vector<int>& out) const {
  const LocalSignature& sig = signature[t];
  out.clear();
  out.reserve(local_dof_count(sig));
  for (int i = 0; i < 3; ++i) out.push_back(tri.v[i]);
  for (int le = 0; le < 3; ++le) {
    const int e = elem_edge[t][le];
    for (int k = 2; k <= edge_order[e]; ++k)
      out.push_back(edge_offset[e] + (k - 2));
  }
  const int nb = (sig.p - 1) * (sig.p - 2) / 2;
  for (int b = 0; b < nb; ++b) out.push_back(interior_offset[t] + b);
}

DofMap build_dof_map(const TriMesh& mesh) {
  DofMap dm;
  dm.mesh_id = mesh.id;
  dm.n_vertices = mesh.n_vertices();
  const int nt = mesh.n_elems();
  dm.elem_edge.resize(nt);
  dm.signature.resize(nt);

  std::unordered_map<std::uint64_t, int> edge_index;
  for (int t = 0; t < nt; ++t) {
    const Tri& tri = mesh.tris[t];
    if (tri.order < 1 || tri.order > kMaxOrder)
      throw std::invalid_argument("build_dof_map: element order out of range");
    for (int le = 0; le < 3; ++le) {
      const int a = tri.v[kEdgeVerts[le][0]];
      const int b = tri.v[kEdgeVerts[le][1]];
      const std::uint64_t key = edge_key(a, b);
      auto it = edge_index.find(key);
      int e;
      if (it == edge_index.end()) {
        e = static_cast<int>(dm.edge_keys.size());
        edge_index.emplace(key, e);
        dm.edge_keys.push_back(key);
        dm.edge_order.push_back(tri.order);
      } else {
        e = it->second;
        dm.edge_order[e] = std::min(dm.edge_order[e], tri.order);
      }
      dm.elem_edge[t][le] = e;
    }
  }

  int off = dm.n_vertices;
  dm.edge_offset.resize(dm.edge_keys.size());
  for (std::size_t e = 0; e < dm.edge_keys.size(); ++e) {
    dm.edge_offset[e] = off;
    off += dm.edge_order[e] - 1;
  }
  dm.interior_offset.resize(nt);
  for (int t = 0; t < nt; ++t) {
    dm.interior_offset[t] = off;
    const int p = mesh.tris[t].order;
    off += (p - 1) * (p - 2) / 2;
  }
  dm.ndofs = off;

  for (int t = 0; t < nt; ++t) {
    const Tri& tri = mesh.tris[t];
    LocalSignature& sig = dm.signature[t];
    sig.p = tri.order;
    for (int le = 0; le < 3; ++le) {
      sig.pe[le] = dm.edge_order[dm.elem_edge[t][le]];
      const int a = tri.v[kEdgeVerts[le][0]];
      const int b = tri.v[kEdgeVerts[le][1]];
      sig.sign[le] = (a < b) ? 1 : -1;
    }
  }

  dm.is_boundary.assign(dm.ndofs, 0);
  for (const auto& [key, tag] : mesh.boundary_tags) {
    (void)tag;
    auto it = edge_index.find(key);
    if (it == edge_index.end())
      throw std::logic_error("build_dof_map: boundary tag on unknown edge");
    const int e = it->second;
    const int a = static_cast<int>(key & 0xffffffffull);
    const int b = static_cast<int>(key >> 32);
    dm.is_boundary[a] = 1;
    dm.is_boundary[b] = 1;
    for (int k = 2; k <= dm.edge_order[e]; ++k)
      dm.is_boundary[dm.edge_offset[e] + (k - 2)] = 1;
  }
  return dm;
}

int count_dofs(const TriMesh& mesh) { return build_dof_map(mesh).ndofs; }

Eigen::Matrix2d jacobian(const TriMesh& mesh, int t) {
  Eigen::Matrix2d J;
  J.col(0) = mesh.vertex(t, 1) - mesh.vertex(t, 0);
  J.col(1) = mesh.vertex(t, 2) - mesh.vertex(t, 0);
  return J;
}

namespace {

// Dirichlet data: vertex values plus per-boundary-edge L2 projection of the
// residual g minus its linear interpolant onto the edge trace modes.
Eigen::VectorXd boundary_values(const TriMesh& mesh, const DofMap& dm,
                                const ProblemSpec& spec,
                                const std::unordered_map<std::uint64_t, int>& edge_index) {
  Eigen::VectorXd ug = Eigen::VectorXd::Zero(dm.ndofs);
  for (const auto& [key, tag] : mesh.boundary_tags) {
    (void)tag;
    const int a = static_cast<int>(key & 0xffffffffull);
    const int b = static_cast<int>(key >> 32);
    ug(a) = spec.dirichlet(mesh.vertices[a]);
    ug(b) = spec.dirichlet(mesh.vertices[b]);
  }
  for (const auto& [key, tag] : mesh.boundary_tags) {
    (void)tag;
    const int e = edge_index.at(key);
    const int pe = dm.edge_order[e];
    if (pe < 2) continue;
    const int a = static_cast<int>(key & 0xffffffffull);
    const int b = static_cast<int>(key >> 32);
    const Vec2& xa = mesh.vertices[a];
    const Vec2& xb = mesh.vertices[b];
    const int nm = pe - 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nm, nm);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(nm);
    const auto gl = gauss_legendre01(pe + 2);
    double phi[kMaxOrder + 1];
    for (const auto& qp : gl) {
      const double t = qp.x;
      edge_trace_modes(pe, t, phi);
      const Vec2 x = xa + t * (xb - xa);
      const double res = spec.dirichlet(x) - ((1.0 - t) * ug(a) + t * ug(b));
      for (int i = 0; i < nm; ++i) {
        r(i) += qp.w * res * phi[i];
        for (int j = 0; j < nm; ++j) M(i, j) += qp.w * phi[i] * phi[j];
      }
    }
    const Eigen::VectorXd c = M.ldlt().solve(r);
    for (int k = 0; k < nm; ++k) ug(dm.edge_offset[e] + k) = c(k);
  }
  return ug;
}

}  // namespace

DiscreteSolution solve(const TriMesh& mesh, const ProblemSpec& spec,
                       const SolverOptions& opts) {
  auto dofs = std::make_shared<DofMap>(build_dof_map(mesh));
  const DofMap& dm = *dofs;
  const int n = dm.ndofs;
  const int nt = mesh.n_elems();

  std::unordered_map<std::uint64_t, int> edge_index;
  for (std::size_t e = 0; e < dm.edge_keys.size(); ++e)
    edge_index.emplace(dm.edge_keys[e], static_cast<int>(e));

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  std::vector<int> gids;
  for (int t = 0; t < nt; ++t) {
    const LocalSignature& sig = dm.signature[t];
    const int p = sig.p;
    const Eigen::Matrix2d J = jacobian(mesh, t);
    const double detJ = J.determinant();
    const Eigen::Matrix2d Jit = J.inverse().transpose();
    dm.local_to_global(t, mesh.tris[t], gids);
    const int nl = static_cast<int>(gids.size());

    {
      const auto& tab = basis_table(sig, 2 * p);
      const auto& rule = triangle_rule(2 * p);
      const int nq = static_cast<int>(rule.size());
      Eigen::MatrixXd gx(nl, nq), gy(nl, nq);
      for (int q = 0; q < nq; ++q) {
        gx.col(q) = Jit(0, 0) * tab.dxi.col(q) + Jit(0, 1) * tab.deta.col(q);
        gy.col(q) = Jit(1, 0) * tab.dxi.col(q) + Jit(1, 1) * tab.deta.col(q);
      }
      Eigen::VectorXd w(nq);
      for (int q = 0; q < nq; ++q) w(q) = rule[q].w * detJ;
      const Eigen::MatrixXd Ke =
          gx * w.asDiagonal() * gx.transpose() + gy * w.asDiagonal() * gy.transpose();
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j)
          trips.emplace_back(gids[i], gids[j], Ke(i, j));
    }

    {
      const int deg = 2 * p + 2;
      const auto& tab = basis_table(sig, deg);
      const auto& rule = triangle_rule(deg);
      const int nq = static_cast<int>(rule.size());
      Eigen::VectorXd wf(nq);
      for (int q = 0; q < nq; ++q) {
        const Vec2 x = mesh.vertex(t, 0) + J * Vec2(rule[q].xi, rule[q].eta);
        wf(q) = rule[q].w * detJ * spec.source(x);
      }
      const Eigen::VectorXd be = tab.val * wf;
      for (int i = 0; i < nl; ++i) b(gids[i]) += be(i);
    }
  }

  const Eigen::VectorXd ug = boundary_values(mesh, dm, spec, edge_index);

  std::vector<int> free_id(n, -1);
  int nfree = 0;
  for (int i = 0; i < n; ++i)
    if (!dm.is_boundary[i]) free_id[i] = nfree++;

  std::vector<Eigen::Triplet<double>> ff;
  ff.reserve(trips.size());
  Eigen::VectorXd corr = Eigen::VectorXd::Zero(n);
  for (const auto& tr : trips) {
    const bool fi = free_id[tr.row()] >= 0;
    const bool fj = free_id[tr.col()] >= 0;
    if (fi && fj) {
      ff.emplace_back(free_id[tr.row()], free_id[tr.col()], tr.value());
    } else if (fi) {
      corr(tr.row()) += tr.value() * ug(tr.col());
    }
  }
  Eigen::VectorXd rhs(nfree);
  for (int i = 0; i < n; ++i)
    if (free_id[i] >= 0) rhs(free_id[i]) = b(i) - corr(i);

  DiscreteSolution sol;
  sol.dofs = dofs;
  sol.mesh_id = mesh.id;
  sol.ndofs = n;
  sol.coeffs = ug;

  const double rhs_norm = rhs.norm();
  if (nfree > 0 && rhs_norm > 0.0) {
    Eigen::SparseMatrix<double> A(nfree, nfree);
    A.setFromTriplets(ff.begin(), ff.end());
    Eigen::VectorXd x;
    if (opts.method == SolverOptions::Method::Ldlt) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
      ldlt.compute(A);
      if (ldlt.info() != Eigen::Success)
        throw SolveError("solve: LDLT factorization failed", 0,
                         std::numeric_limits<double>::quiet_NaN());
      x = ldlt.solve(rhs);
      double res = (A * x - rhs).norm() / rhs_norm;
      for (int pass = 0; pass < 3 && res > opts.tol; ++pass) {
        const Eigen::VectorXd dx = ldlt.solve(rhs - A * x);
        x += dx;
        res = (A * x - rhs).norm() / rhs_norm;
      }
      if (res > opts.tol)
        throw SolveError("solve: LDLT residual above tolerance", 0, res);
      sol.residual = res;
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                               Eigen::Lower | Eigen::Upper>
          cg;
      cg.setTolerance(opts.tol);
      cg.setMaxIterations(static_cast<int>(
          std::ceil(opts.maxit_factor * std::sqrt(static_cast<double>(nfree)))));
      cg.compute(A);
      x = cg.solve(rhs);
      sol.solver_iterations = static_cast<int>(cg.iterations());
      sol.residual = cg.error();
      if (cg.info() != Eigen::Success)
        throw SolveError("solve: CG did not converge after " +
                             std::to_string(cg.iterations()) + " iterations, residual " +
                             std::to_string(cg.error()),
                         static_cast<int>(cg.iterations()), cg.error());
    }
    for (int i = 0; i < n; ++i)
      if (free_id[i] >= 0) sol.coeffs(i) = x(free_id[i]);
  }
  return sol;
}

namespace {

void check_solution(const TriMesh& mesh, const DiscreteSolution& u) {
  if (u.mesh_id != mesh.id || !u.dofs)
    throw std::invalid_argument("discrete solution does not belong to this mesh");
}

}  // namespace

Eigen::Matrix2Xd gradient_at_rule(const TriMesh& mesh, const DiscreteSolution& u,
                                  int t, int rule_degree) {
  check_solution(mesh, u);
  const DofMap& dm = *u.dofs;
  const auto& tab = basis_table(dm.signature[t], rule_degree);
  const Eigen::Matrix2d Jit = jacobian(mesh, t).inverse().transpose();
  std::vector<int> gids;
  dm.local_to_global(t, mesh.tris[t], gids);
  Eigen::VectorXd local(gids.size());
  for (std::size_t i = 0; i < gids.size(); ++i) local(i) = u.coeffs(gids[i]);
  const int nq = static_cast<int>(tab.val.cols());
  Eigen::Matrix2Xd g(2, nq);
  const Eigen::VectorXd gxi = tab.dxi.transpose() * local;
  const Eigen::VectorXd geta = tab.deta.transpose() * local;
  for (int q = 0; q < nq; ++q) g.col(q) = Jit * Vec2(gxi(q), geta(q));
  return g;
}

double value_at(const TriMesh& mesh, const DiscreteSolution& u, int t,
                double xi, double eta) {
  check_solution(mesh, u);
  const DofMap& dm = *u.dofs;
  Eigen::VectorXd val, dx, dy;
  eval_basis(dm.signature[t], xi, eta, val, dx, dy);
  std::vector<int> gids;
  dm.local_to_global(t, mesh.tris[t], gids);
  double s = 0.0;
  for (std::size_t i = 0; i < gids.size(); ++i) s += u.coeffs(gids[i]) * val(i);
  return s;
}

double energy_error(const DiscreteSolution& u, const TriMesh& mesh,
                    const ProblemSpec& spec) {
  check_solution(mesh, u);
  if (!spec.exact_grad)
    throw std::invalid_argument("energy_error: problem has no exact gradient");
  double acc = 0.0;
  for (int t = 0; t < mesh.n_elems(); ++t) {
    const int deg = 2 * mesh.tris[t].order + 2;
    const auto& rule = triangle_rule(deg);
    const Eigen::Matrix2d J = jacobian(mesh, t);
    const double detJ = J.determinant();
    const Eigen::Matrix2Xd g = gradient_at_rule(mesh, u, t, deg);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 x = mesh.vertex(t, 0) + J * Vec2(rule[q].xi, rule[q].eta);
      acc += rule[q].w * detJ * (g.col(q) - spec.exact_grad(x)).squaredNorm();
    }
  }
  return std::sqrt(acc);
}

double gradient_norm(const DiscreteSolution& u, const TriMesh& mesh) {
  check_solution(mesh, u);
  double acc = 0.0;
  for (int t = 0; t < mesh.n_elems(); ++t) {
    const int deg = 2 * mesh.tris[t].order;
    const auto& rule = triangle_rule(deg);
    const double detJ = jacobian(mesh, t).determinant();
    const Eigen::Matrix2Xd g = gradient_at_rule(mesh, u, t, deg);
    for (std::size_t q = 0; q < rule.size(); ++q)
      acc += rule[q].w * detJ * g.col(q).squaredNorm();
  }
  return std::sqrt(acc);
}

Eigen::VectorXd galerkin_residual(const TriMesh& mesh, const DiscreteSolution& u,
                                  const ProblemSpec& spec) {
  check_solution(mesh, u);
  if (!spec.exact_grad)
    throw std::invalid_argument("galerkin_residual: no exact gradient");
  const DofMap& dm = *u.dofs;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(dm.ndofs);
  std::vector<int> gids;
  for (int t = 0; t < mesh.n_elems(); ++t) {
    const int deg = 2 * mesh.tris[t].order + 2;
    const auto& rule = triangle_rule(deg);
    const auto& tab = basis_table(dm.signature[t], deg);
    const Eigen::Matrix2d J = jacobian(mesh, t);
    const double detJ = J.determinant();
    const Eigen::Matrix2d Jit = J.inverse().transpose();
    const Eigen::Matrix2Xd gh = gradient_at_rule(mesh, u, t, deg);
    dm.local_to_global(t, mesh.tris[t], gids);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 x = mesh.vertex(t, 0) + J * Vec2(rule[q].xi, rule[q].eta);
      const Vec2 diff = spec.exact_grad(x) - gh.col(q);
      for (std::size_t i = 0; i < gids.size(); ++i) {
        const Vec2 gphi = Jit * Vec2(tab.dxi(i, q), tab.deta(i, q));
        r(gids[i]) += rule[q].w * detJ * diff.dot(gphi);
      }
    }
  }
  for (int i = 0; i < dm.ndofs; ++i)
    if (dm.is_boundary[i]) r(i) = 0.0;
  return r;
}

}  // namespace am2r

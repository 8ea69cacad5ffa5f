#include "am2r/estimator.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace am2r {

ErrorStats stats_of(const Eigen::VectorXd& v) {
  ErrorStats s;
  s.count = static_cast<int>(v.size());
  if (s.count == 0) return s;
  s.mean = v.mean();
  const double msq = v.squaredNorm() / s.count;
  s.variance = std::max(0.0, msq - s.mean * s.mean);
  s.sd = std::sqrt(s.variance);
  s.rms = std::sqrt(msq);
  return s;
}

LocalErrorField estimate(const DiscreteSolution& sol, const TriMesh& mesh) {
  if (sol.mesh_id != mesh.id || !sol.dofs)
    throw std::invalid_argument("estimate: solution does not belong to this mesh");
  const int nt = mesh.n_elems();
  const int nv = mesh.n_vertices();

  LocalErrorField f;
  f.n_elems = nt;
  f.ndofs = sol.ndofs;
  f.max_order = mesh.max_order();
  f.uniform = mesh.uniform_order();
  f.eta = Eigen::VectorXd::Zero(nt);

  // Per-element quadrature data, reused by the patch projections and the
  // local norms below.
  std::vector<Eigen::Matrix2Xd> grads(nt);
  std::vector<Eigen::Matrix2d> jacs(nt);
  std::vector<double> dets(nt);
  std::vector<int> degs(nt);
  double grad_sq = 0.0;
  for (int t = 0; t < nt; ++t) {
    const int deg = 2 * mesh.tris[t].order;
    degs[t] = deg;
    jacs[t] = jacobian(mesh, t);
    dets[t] = jacs[t].determinant();
    grads[t] = gradient_at_rule(mesh, sol, t, deg);
    const auto& rule = triangle_rule(deg);
    for (std::size_t q = 0; q < rule.size(); ++q)
      grad_sq += rule[q].w * dets[t] * grads[t].col(q).squaredNorm();
  }
  const double gn = std::sqrt(grad_sq);

  auto finish_normalized = [&](void) {
    if (f.uniform) {
      const double factor =
          std::sqrt(static_cast<double>(f.n_elems)) *
          std::pow(static_cast<double>(f.ndofs), 0.5 * f.max_order);
      f.eta_tilde = factor * f.eta;
    }
    const double ln_n = std::log(static_cast<double>(f.ndofs));
    const double half_ln_T = 0.5 * std::log(static_cast<double>(f.n_elems));
    f.zeta.resize(nt);
    for (int t = 0; t < nt; ++t)
      f.zeta(t) = -(half_ln_T + std::log(std::max(f.eta(t), kZetaFloor))) / ln_n;
  };

  if (!(gn > kZetaFloor)) {
    f.degenerate = true;
    finish_normalized();
    return f;
  }

  std::vector<std::vector<int>> patch(nv);
  for (int t = 0; t < nt; ++t)
    for (int i = 0; i < 3; ++i) patch[mesh.tris[t].v[i]].push_back(t);

  // Recovered gradient at each vertex: value of the patchwise linear fit.
  Eigen::Matrix2Xd G(2, nv);
  for (int v = 0; v < nv; ++v) {
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    Eigen::Matrix<double, 3, 2> R = Eigen::Matrix<double, 3, 2>::Zero();
    const Vec2& xv = mesh.vertices[v];
    for (int t : patch[v]) {
      const auto& rule = triangle_rule(degs[t]);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2 x =
            mesh.vertex(t, 0) + jacs[t] * Vec2(rule[q].xi, rule[q].eta);
        const Eigen::Vector3d m(1.0, x.x() - xv.x(), x.y() - xv.y());
        const double w = rule[q].w * dets[t];
        M.noalias() += w * m * m.transpose();
        R.noalias() += w * m * grads[t].col(q).transpose();
      }
    }
    const Eigen::Matrix<double, 3, 2> a = M.ldlt().solve(R);
    G.col(v) = a.row(0).transpose();
  }

  double sum_sq = 0.0;
  for (int t = 0; t < nt; ++t) {
    const auto& rule = triangle_rule(degs[t]);
    const auto& tri = mesh.tris[t];
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double l1 = rule[q].xi, l2 = rule[q].eta, l0 = 1.0 - l1 - l2;
      const Vec2 Gq =
          l0 * G.col(tri.v[0]) + l1 * G.col(tri.v[1]) + l2 * G.col(tri.v[2]);
      acc += rule[q].w * dets[t] * (Gq - grads[t].col(q)).squaredNorm();
    }
    f.eta(t) = std::sqrt(acc) / gn;
  }
  for (int t = 0; t < nt; ++t) sum_sq += f.eta(t) * f.eta(t);
  f.eta_global = std::sqrt(sum_sq);

  finish_normalized();
  return f;
}

ErrorStats normalized_stats_h(const LocalErrorField& f) {
  if (!f.uniform)
    throw std::invalid_argument(
        "normalized_stats_h: non-uniform order field, use zeta_stats");
  return stats_of(f.eta_tilde);
}

ErrorStats zeta_stats(const LocalErrorField& f) {
  if (f.ndofs < 2) throw std::invalid_argument("zeta_stats: ndofs must be >= 2");
  std::vector<double> kept;
  kept.reserve(f.zeta.size());
  for (int t = 0; t < f.n_elems; ++t)
    if (f.eta(t) > kZetaFloor) kept.push_back(f.zeta(t));
  Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(kept.data(), kept.size());
  return stats_of(v);
}

}  // namespace am2r

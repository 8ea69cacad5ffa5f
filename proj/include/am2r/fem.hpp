#pragma once

#include "am2r/mesh.hpp"
#include "am2r/problem.hpp"
#include "am2r/quadrature.hpp"

#include <Eigen/Core>

#include <memory>
#include <stdexcept>
#include <vector>

namespace am2r {

// Per-element basis description. Edge orders follow the minimum rule, so the
// trace on a shared edge is the same polynomial space from both sides. sign
// flips the edge parameter so both sides orient it from the lower global
// vertex id to the higher one.
struct LocalSignature {
  int p = 1;
  std::array<int, 3> pe{1, 1, 1};
  std::array<int, 3> sign{1, 1, 1};
  bool operator==(const LocalSignature&) const = default;
};

int local_dof_count(const LocalSignature& sig);

// Hierarchical basis on the reference triangle (xi, eta), xi+eta <= 1.
// Layout: 3 vertex hats, then edge modes per local edge (v0,v1), (v1,v2),
// (v2,v0) with k = 2..pe each, then interior bubbles of total degree 3..p.
void eval_basis(const LocalSignature& sig, double xi, double eta,
                Eigen::VectorXd& val, Eigen::VectorXd& dxi,
                Eigen::VectorXd& deta);

struct DofMap {
  int ndofs = 0;
  int n_vertices = 0;
  std::vector<std::uint64_t> edge_keys;
  std::vector<int> edge_order;
  std::vector<int> edge_offset;
  std::vector<std::array<int, 3>> elem_edge;
  std::vector<int> interior_offset;
  std::vector<LocalSignature> signature;
  std::vector<char> is_boundary;
  std::uint64_t mesh_id = 0;

  int n_local(int t) const { return local_dof_count(signature[t]); }
  void local_to_global(int t, const Tri& tri, std::vector<int>& out) const;
};

DofMap build_dof_map(const TriMesh& mesh);
int count_dofs(const TriMesh& mesh);

struct SolverOptions {
  enum class Method { Ldlt, Cg };
  Method method = Method::Ldlt;
  double tol = 1e-10;
  // Iteration cap for CG: ceil(maxit_factor * sqrt(n_free)).
  double maxit_factor = 50.0;
};

struct SolveError : std::runtime_error {
  SolveError(const std::string& msg, int iters, double res)
      : std::runtime_error(msg), iterations(iters), residual(res) {}
  int iterations;
  double residual;
};

struct DiscreteSolution {
  Eigen::VectorXd coeffs;
  std::shared_ptr<const DofMap> dofs;
  std::uint64_t mesh_id = 0;
  int ndofs = 0;
  int solver_iterations = 0;
  double residual = 0.0;
};

DiscreteSolution solve(const TriMesh& mesh, const ProblemSpec& spec,
                       const SolverOptions& opts = {});

// Reference-to-physical Jacobian [v1-v0, v2-v0]; constant per triangle.
Eigen::Matrix2d jacobian(const TriMesh& mesh, int t);

// Gradient of u_h at the points of triangle_rule(rule_degree) on element t,
// as a 2 x n matrix in physical coordinates.
Eigen::Matrix2Xd gradient_at_rule(const TriMesh& mesh, const DiscreteSolution& u,
                                  int t, int rule_degree);

double value_at(const TriMesh& mesh, const DiscreteSolution& u, int t,
                double xi, double eta);

// ||grad(u_h - u_exact)||_{L2} over the whole mesh; requires spec.exact_grad.
double energy_error(const DiscreteSolution& u, const TriMesh& mesh,
                    const ProblemSpec& spec);

double gradient_norm(const DiscreteSolution& u, const TriMesh& mesh);

// Energy inner product of (u_exact - u_h) against every basis function,
// zero on constrained dofs. Vanishes to quadrature accuracy when u_h is the
// Galerkin projection and the integrands are inside the quadrature degree.
Eigen::VectorXd galerkin_residual(const TriMesh& mesh, const DiscreteSolution& u,
                                  const ProblemSpec& spec);

}  // namespace am2r

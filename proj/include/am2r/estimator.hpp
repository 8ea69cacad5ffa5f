#pragma once

#include "am2r/fem.hpp"

#include <Eigen/Core>

namespace am2r {

// Per-element relative error indicators plus the normalized views used by the
// h and hp observation layers. eta_tilde is only populated on uniform-order
// meshes (its ndofs exponent needs a single p); zeta is always populated,
// with near-zero indicators floored at 1e-300 inside the logarithm.
struct LocalErrorField {
  Eigen::VectorXd eta;
  Eigen::VectorXd eta_tilde;
  Eigen::VectorXd zeta;
  double eta_global = 0.0;
  int n_elems = 0;
  int ndofs = 0;
  int max_order = 1;
  bool uniform = false;
  bool degenerate = false;
};

struct ErrorStats {
  double mean = 0.0;
  double variance = 0.0;
  double sd = 0.0;
  double rms = 0.0;
  int count = 0;
};

ErrorStats stats_of(const Eigen::VectorXd& v);

inline constexpr double kZetaFloor = 1e-300;

// Zienkiewicz-Zhu recovery: componentwise L2 projection of grad(u_h) onto
// linears over every vertex patch, nodal values averaged into a continuous
// piecewise-linear field G. eta_T = ||G - grad u_h||_{L2(T)} / ||grad u_h||.
// A zero discrete gradient flags the field degenerate and leaves eta at zero.
LocalErrorField estimate(const DiscreteSolution& sol, const TriMesh& mesh);

// Statistics of eta_tilde_T = n_elems^(1/2) * ndofs^(p/2) * eta_T; rejects
// non-uniform-order fields.
ErrorStats normalized_stats_h(const LocalErrorField& f);

// Statistics of zeta_T = -ln(n_elems^(1/2) eta_T) / ln(ndofs), excluding
// floored (zero-estimate) elements.
ErrorStats zeta_stats(const LocalErrorField& f);

}  // namespace am2r

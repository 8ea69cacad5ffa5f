#pragma once

#include "am2r/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace am2r {

double swish(double x);
double swish_prime(double x);

// Fully connected net, swish between affine layers, identity output.
// Columns are samples throughout.
struct Mlp {
  struct Layer {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
  };
  std::vector<Layer> layers;

  // Caches needed to backpropagate: act[l] is the input to layer l,
  // pre[l] the pre-activation of hidden layer l.
  struct Trace {
    std::vector<Eigen::MatrixXd> act;
    std::vector<Eigen::MatrixXd> pre;
  };

  static Mlp make(const std::vector<int>& sizes, Rng& rng,
                  double out_weight_scale = 1.0);

  int in_dim() const { return static_cast<int>(layers.front().W.cols()); }
  int out_dim() const { return static_cast<int>(layers.back().W.rows()); }
  std::vector<int> sizes() const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& X, Trace& trace) const;
  // Accumulates d(loss)/d(params) into grad given d(loss)/d(output).
  void backward(const Trace& trace, const Eigen::MatrixXd& dY,
                Mlp& grad) const;

  Mlp zeros_like() const;
  long long n_params() const;
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& v);
  bool all_finite() const;
};

struct Adam {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long t = 0;
  Eigen::VectorXd m, v;

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
};

inline constexpr double kLnSigmaMin = -5.0;
inline constexpr double kLnSigmaMax = 2.0;

struct ActionSample {
  Eigen::VectorXd raw;
  Eigen::VectorXd clamped;
  double logp = 0.0;
};

// Diagonal Gaussian over raw actions; emitted actions are the raw samples
// projected into [0,1]. Densities are always evaluated at the raw point.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(int obs_dim, int action_dim, Rng& init_rng);

  int obs_dim() const { return net.in_dim(); }
  int action_dim() const { return adim; }

  // Heads of the net output: rows [0,a) are means, rows [a,2a) raw
  // log-sigmas (clamped before use).
  void heads(const Eigen::MatrixXd& Y, Eigen::MatrixXd& mu,
             Eigen::MatrixXd& ln_sigma) const;

  ActionSample sample(const Eigen::VectorXd& obs, Rng& rng) const;
  Eigen::VectorXd mean_action(const Eigen::VectorXd& obs) const;

  // Batched log-densities of raw actions (columns) under net output Y.
  Eigen::VectorXd log_prob(const Eigen::MatrixXd& Y,
                           const Eigen::MatrixXd& raw) const;
  Eigen::VectorXd entropy(const Eigen::MatrixXd& Y) const;

  // d(sum_j coeff_j * logp_j + sum_j ent_coeff_j * H_j)/dY; the clamp on
  // ln-sigma zeroes its rows where saturated.
  Eigen::MatrixXd head_gradient(const Eigen::MatrixXd& Y,
                                const Eigen::MatrixXd& raw,
                                const Eigen::VectorXd& coeff,
                                const Eigen::VectorXd& ent_coeff) const;

  Mlp net;
  int adim = 0;
};

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace am2r

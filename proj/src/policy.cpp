#include "am2r/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace am2r {

namespace {

constexpr double kLn2Pi = 1.8378770664093454836;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double swish(double x) { return x * sigmoid(x); }

double swish_prime(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

Mlp Mlp::make(const std::vector<int>& sizes, Rng& rng,
              double out_weight_scale) {
  if (sizes.size() < 2) throw std::invalid_argument("mlp: need two sizes");
  Mlp net;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Layer layer;
    const int rows = sizes[l + 1];
    const int cols = sizes[l];
    const double limit = std::sqrt(6.0 / (rows + cols));
    const double scale = (l + 2 == sizes.size()) ? out_weight_scale : 1.0;
    layer.W.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        layer.W(i, j) = scale * rng.uniform(-limit, limit);
    layer.b = Eigen::VectorXd::Zero(rows);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<int> Mlp::sizes() const {
  std::vector<int> s;
  s.push_back(in_dim());
  for (const auto& layer : layers) s.push_back(static_cast<int>(layer.W.rows()));
  return s;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd a = X;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = (layers[l].W * a).colwise() + layers[l].b;
    if (l + 1 < layers.size())
      a = z.unaryExpr([](double x) { return swish(x); });
    else
      a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X, Trace& trace) const {
  trace.act.clear();
  trace.pre.clear();
  Eigen::MatrixXd a = X;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    trace.act.push_back(a);
    Eigen::MatrixXd z = (layers[l].W * a).colwise() + layers[l].b;
    if (l + 1 < layers.size()) {
      trace.pre.push_back(z);
      a = z.unaryExpr([](double x) { return swish(x); });
    } else {
      a = std::move(z);
    }
  }
  return a;
}

void Mlp::backward(const Trace& trace, const Eigen::MatrixXd& dY,
                   Mlp& grad) const {
  Eigen::MatrixXd g = dY;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    grad.layers[l].W.noalias() += g * trace.act[l].transpose();
    grad.layers[l].b += g.rowwise().sum();
    if (l > 0) {
      g = (layers[l].W.transpose() * g)
              .cwiseProduct(trace.pre[l - 1].unaryExpr(
                  [](double x) { return swish_prime(x); }));
    }
  }
}

Mlp Mlp::zeros_like() const {
  Mlp z;
  for (const auto& layer : layers) {
    Layer zl;
    zl.W = Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols());
    zl.b = Eigen::VectorXd::Zero(layer.b.size());
    z.layers.push_back(std::move(zl));
  }
  return z;
}

long long Mlp::n_params() const {
  long long n = 0;
  for (const auto& layer : layers) n += layer.W.size() + layer.b.size();
  return n;
}

Eigen::VectorXd Mlp::flatten() const {
  Eigen::VectorXd v(n_params());
  long long at = 0;
  for (const auto& layer : layers) {
    v.segment(at, layer.W.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.W.data(), layer.W.size());
    at += layer.W.size();
    v.segment(at, layer.b.size()) = layer.b;
    at += layer.b.size();
  }
  return v;
}

void Mlp::unflatten(const Eigen::VectorXd& v) {
  if (v.size() != n_params()) throw std::invalid_argument("mlp: size mismatch");
  long long at = 0;
  for (auto& layer : layers) {
    Eigen::Map<Eigen::VectorXd>(layer.W.data(), layer.W.size()) =
        v.segment(at, layer.W.size());
    at += layer.W.size();
    layer.b = v.segment(at, layer.b.size());
    at += layer.b.size();
  }
}

bool Mlp::all_finite() const {
  for (const auto& layer : layers)
    if (!layer.W.allFinite() || !layer.b.allFinite()) return false;
  return true;
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (m.size() != params.size()) {
    m = Eigen::VectorXd::Zero(params.size());
    v = Eigen::VectorXd::Zero(params.size());
    t = 0;
  }
  ++t;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  params.array() -=
      lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

GaussianPolicy::GaussianPolicy(int obs_dim, int action_dim, Rng& init_rng)
    : adim(action_dim) {
  net = Mlp::make({obs_dim, 128, 128, 2 * action_dim}, init_rng, 0.01);
  auto& out = net.layers.back();
  out.b.head(adim).setConstant(0.5);   // initial action mean mid-interval
  out.b.tail(adim).setConstant(-0.5);  // initial ln-sigma
}

void GaussianPolicy::heads(const Eigen::MatrixXd& Y, Eigen::MatrixXd& mu,
                           Eigen::MatrixXd& ln_sigma) const {
  mu = Y.topRows(adim);
  ln_sigma = Y.bottomRows(adim).cwiseMax(kLnSigmaMin).cwiseMin(kLnSigmaMax);
}

ActionSample GaussianPolicy::sample(const Eigen::VectorXd& obs,
                                    Rng& rng) const {
  const Eigen::MatrixXd Y = net.forward(obs);
  Eigen::MatrixXd mu, ls;
  heads(Y, mu, ls);
  ActionSample out;
  out.raw.resize(adim);
  out.clamped.resize(adim);
  out.logp = 0.0;
  for (int d = 0; d < adim; ++d) {
    const double sigma = std::exp(ls(d, 0));
    const double raw = mu(d, 0) + sigma * rng.normal();
    const double z = (raw - mu(d, 0)) / sigma;
    out.raw(d) = raw;
    out.clamped(d) = clamp01(raw);
    out.logp += -ls(d, 0) - 0.5 * kLn2Pi - 0.5 * z * z;
  }
  return out;
}

Eigen::VectorXd GaussianPolicy::mean_action(const Eigen::VectorXd& obs) const {
  const Eigen::MatrixXd Y = net.forward(obs);
  Eigen::MatrixXd mu, ls;
  heads(Y, mu, ls);
  return mu.col(0).unaryExpr([](double x) { return clamp01(x); });
}

Eigen::VectorXd GaussianPolicy::log_prob(const Eigen::MatrixXd& Y,
                                         const Eigen::MatrixXd& raw) const {
  Eigen::MatrixXd mu, ls;
  heads(Y, mu, ls);
  const Eigen::ArrayXXd sigma = ls.array().exp();
  const Eigen::ArrayXXd z = (raw.array() - mu.array()) / sigma;
  return (-ls.array() - 0.5 * kLn2Pi - 0.5 * z.square())
      .colwise()
      .sum()
      .transpose();
}

Eigen::VectorXd GaussianPolicy::entropy(const Eigen::MatrixXd& Y) const {
  Eigen::MatrixXd mu, ls;
  heads(Y, mu, ls);
  return (ls.array() + 0.5 * (1.0 + kLn2Pi)).colwise().sum().transpose();
}

Eigen::MatrixXd GaussianPolicy::head_gradient(
    const Eigen::MatrixXd& Y, const Eigen::MatrixXd& raw,
    const Eigen::VectorXd& coeff, const Eigen::VectorXd& ent_coeff) const {
  Eigen::MatrixXd mu, ls;
  heads(Y, mu, ls);
  const Eigen::ArrayXXd sigma = ls.array().exp();
  const Eigen::ArrayXXd z = (raw.array() - mu.array()) / sigma;
  const Eigen::ArrayXXd crow =
      coeff.transpose().replicate(adim, 1).array();
  const Eigen::ArrayXXd erow =
      ent_coeff.transpose().replicate(adim, 1).array();
  const Eigen::ArrayXXd s_raw = Y.bottomRows(adim).array();
  const Eigen::ArrayXXd mask =
      ((s_raw >= kLnSigmaMin) && (s_raw <= kLnSigmaMax)).cast<double>();
  Eigen::MatrixXd dY(2 * adim, Y.cols());
  dY.topRows(adim) = (crow * z / sigma).matrix();
  dY.bottomRows(adim) = ((crow * (z.square() - 1.0) + erow) * mask).matrix();
  return dY;
}

}  // namespace am2r

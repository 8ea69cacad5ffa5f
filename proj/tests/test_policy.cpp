#include "doctest.h"

#include "am2r/ppo.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace am2r;

namespace {

constexpr double kHalfLn2Pi = 0.91893853320467274178;

struct BanditEnv : RolloutEnv {
  double target;
  bool done_ = true;
  double ret_ = 0.0;
  explicit BanditEnv(double t) : target(t) {}
  int action_dim() const override { return 1; }
  Eigen::Vector3d reset() override {
    done_ = false;
    ret_ = 0.0;
    return {0.5, 0.5, 0.5};
  }
  RolloutStep step(const Eigen::VectorXd& a) override {
    if (done_) throw std::logic_error("bandit: done");
    const double th = clamp01(a(0));
    const double r = -(th - target) * (th - target);
    done_ = true;
    ret_ = r;
    return {{0.5, 0.5, 0.5}, r, true};
  }
  bool done() const override { return done_; }
  double episode_return() const override { return ret_; }
  bool episode_guarded() const override { return false; }
};

// Policy whose output is constant in the observation: zero weights, chosen
// output biases.
GaussianPolicy constant_policy(int adim, const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& ln_sigma) {
  Rng rng(9);
  GaussianPolicy p(3, adim, rng);
  for (auto& layer : p.net.layers) layer.W.setZero();
  for (std::size_t l = 0; l + 1 < p.net.layers.size(); ++l)
    p.net.layers[l].b.setZero();
  p.net.layers.back().b.head(adim) = mu;
  p.net.layers.back().b.tail(adim) = ln_sigma;
  return p;
}

double ppo_loss(GaussianPolicy& pol, const Eigen::VectorXd& theta,
                const Eigen::MatrixXd& X, const Eigen::MatrixXd& R,
                const Eigen::VectorXd& oldlp, const Eigen::VectorXd& adv,
                double clip, double ent_coef) {
  pol.net.unflatten(theta);
  const Eigen::MatrixXd Y = pol.net.forward(X);
  const Eigen::VectorXd lp = pol.log_prob(Y, R);
  const Eigen::ArrayXd ratio = (lp - oldlp).array().exp();
  const Eigen::ArrayXd advA = adv.array();
  const Eigen::ArrayXd unc = ratio * advA;
  const Eigen::ArrayXd cl = ratio.min(1.0 + clip).max(1.0 - clip) * advA;
  return -unc.min(cl).mean() - ent_coef * pol.entropy(Y).mean();
}

Eigen::VectorXd ppo_grad(GaussianPolicy& pol, const Eigen::VectorXd& theta,
                         const Eigen::MatrixXd& X, const Eigen::MatrixXd& R,
                         const Eigen::VectorXd& oldlp,
                         const Eigen::VectorXd& adv, double clip,
                         double ent_coef) {
  pol.net.unflatten(theta);
  const int m = static_cast<int>(X.cols());
  Mlp::Trace trace;
  const Eigen::MatrixXd Y = pol.net.forward(X, trace);
  const Eigen::VectorXd lp = pol.log_prob(Y, R);
  const Eigen::ArrayXd ratio = (lp - oldlp).array().exp();
  const Eigen::ArrayXd advA = adv.array();
  const Eigen::ArrayXd unc = ratio * advA;
  const Eigen::ArrayXd cl = ratio.min(1.0 + clip).max(1.0 - clip) * advA;
  Eigen::VectorXd coeff(m), ecoeff(m);
  for (int j = 0; j < m; ++j) {
    coeff(j) = (unc(j) <= cl(j)) ? -advA(j) * ratio(j) / m : 0.0;
    ecoeff(j) = -ent_coef / m;
  }
  const Eigen::MatrixXd dY = pol.head_gradient(Y, R, coeff, ecoeff);
  Mlp g = pol.net.zeros_like();
  pol.net.backward(trace, dY, g);
  return g.flatten();
}

}  // namespace

TEST_CASE("swish activation") {
  CHECK(swish(0.0) == 0.0);
  CHECK(swish_prime(0.0) == 0.5);
  CHECK(swish(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-14));
  for (double x : {-3.0, -0.7, 0.3, 2.5}) {
    const double h = 1e-6;
    const double fd = (swish(x + h) - swish(x - h)) / (2.0 * h);
    CHECK(swish_prime(x) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("clamp projection") {
  CHECK(clamp01(1.3) == 1.0);
  CHECK(clamp01(-0.2) == 0.0);
  CHECK(clamp01(0.4) == 0.4);
  CHECK(clamp01(clamp01(7.0)) == clamp01(7.0));
}

TEST_CASE("gaussian log density and entropy") {
  Eigen::VectorXd mu(1), ls(1);
  mu << 0.3;
  ls << 0.0;
  const auto pol = constant_policy(1, mu, ls);
  const Eigen::Vector3d obs(0.1, 0.2, 0.3);
  const Eigen::MatrixXd Y = pol.net.forward(obs);
  Eigen::MatrixXd raw(1, 1);
  raw << 0.3;
  CHECK(pol.log_prob(Y, raw)(0) ==
        doctest::Approx(-kHalfLn2Pi).epsilon(1e-14));
  CHECK(pol.entropy(Y)(0) ==
        doctest::Approx(0.5 + kHalfLn2Pi).epsilon(1e-14));

  Eigen::VectorXd mu2(2), ls2(2);
  mu2 << 0.3, 0.8;
  ls2 << 0.0, 0.0;
  const auto pol2 = constant_policy(2, mu2, ls2);
  const Eigen::MatrixXd Y2 = pol2.net.forward(obs);
  Eigen::MatrixXd raw2(2, 1);
  raw2 << 0.3, 0.8;
  CHECK(pol2.log_prob(Y2, raw2)(0) ==
        doctest::Approx(-2.0 * kHalfLn2Pi).epsilon(1e-14));
}

TEST_CASE("ln sigma clamp and initialization") {
  Rng rng(3);
  GaussianPolicy p(3, 1, rng);
  const Eigen::Vector3d obs(0.2, 0.6, 0.1);
  CHECK(p.mean_action(obs)(0) == doctest::Approx(0.5).epsilon(0.3));
  Eigen::MatrixXd mu, ls;
  p.heads(p.net.forward(obs), mu, ls);
  CHECK(ls(0, 0) == doctest::Approx(-0.5).epsilon(0.3));

  Eigen::VectorXd m1(1), s1(1);
  m1 << 1.2;
  s1 << -9.0;  // clamped up to -5
  const auto tight = constant_policy(1, m1, s1);
  Eigen::MatrixXd mu2, ls2;
  tight.heads(tight.net.forward(obs), mu2, ls2);
  CHECK(ls2(0, 0) == -5.0);
  Rng draw(11);
  const int n = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = tight.sample(obs, draw).clamped(0);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(std::max(0.0, sumsq / n - mean * mean));
  CHECK(sd <= std::exp(-5.0));
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("density carries unit mass") {
  Eigen::VectorXd mu(1), ls(1);
  mu << 0.4;
  ls << -0.5;
  const auto pol = constant_policy(1, mu, ls);
  const Eigen::Vector3d obs(0.0, 0.0, 0.0);
  const Eigen::MatrixXd Y1 = pol.net.forward(obs);
  const double sigma = std::exp(-0.5);
  const double lo = 0.4 - 8.0 * sigma, hi = 0.4 + 8.0 * sigma;
  Rng rng(17);
  const int n = 100000;
  Eigen::MatrixXd raw(1, n);
  for (int i = 0; i < n; ++i) raw(0, i) = rng.uniform(lo, hi);
  const Eigen::MatrixXd Y = Y1.replicate(1, n);
  const double mass =
      pol.log_prob(Y, raw).array().exp().mean() * (hi - lo);
  CHECK(mass == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("clip arithmetic picks the pessimistic branch") {
  const double clip = 0.2;
  const double ratio = 1.5, adv = 2.0;
  const double unc = ratio * adv;
  const double cl = std::min(std::max(ratio, 1.0 - clip), 1.0 + clip) * adv;
  CHECK(cl == doctest::Approx(2.4));
  CHECK(std::min(unc, cl) == doctest::Approx(2.4));
  CHECK_FALSE(unc <= cl);  // gradient flows only through the clipped branch
}

TEST_CASE("analytic ppo gradient matches central differences") {
  Rng rng(5);
  GaussianPolicy pol(3, 2, rng);
  pol.net = Mlp::make({3, 8, 7, 4}, rng, 0.5);
  pol.net.layers.back().b.head(2).setConstant(0.5);
  pol.net.layers.back().b.tail(2).setConstant(-0.5);

  const int m = 7;
  Eigen::MatrixXd X(3, m), R(2, m);
  Eigen::VectorXd oldlp(m), adv(m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < 3; ++i) X(i, j) = rng.uniform();
    for (int d = 0; d < 2; ++d) R(d, j) = rng.uniform(-0.5, 1.5);
    adv(j) = rng.normal();
  }
  {
    const Eigen::MatrixXd Y = pol.net.forward(X);
    const Eigen::VectorXd lp = pol.log_prob(Y, R);
    for (int j = 0; j < m; ++j) oldlp(j) = lp(j) + 0.3 * rng.normal();
  }
  const double clip = 0.2, ent_coef = 0.01;
  const Eigen::VectorXd theta = pol.net.flatten();
  const Eigen::VectorXd ga =
      ppo_grad(pol, theta, X, R, oldlp, adv, clip, ent_coef);
  const double h = 1e-5;
  for (long long i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    const double lplus = ppo_loss(pol, tp, X, R, oldlp, adv, clip, ent_coef);
    const double lminus = ppo_loss(pol, tm, X, R, oldlp, adv, clip, ent_coef);
    const double fd = (lplus - lminus) / (2.0 * h);
    const double denom = std::max(1e-4, std::abs(fd) + std::abs(ga(i)));
    CHECK(std::abs(ga(i) - fd) / denom <= 1e-4);
  }
  pol.net.unflatten(theta);

  Mlp value = Mlp::make({3, 6, 5, 1}, rng);
  Eigen::VectorXd vt(m);
  for (int j = 0; j < m; ++j) vt(j) = rng.normal();
  const double vf = 0.5;
  const Eigen::VectorXd tv = value.flatten();
  Mlp::Trace tr;
  const Eigen::MatrixXd V = value.forward(X, tr);
  Eigen::MatrixXd dV(1, m);
  dV.row(0) =
      (vf * 2.0 / m * (V.row(0).transpose().array() - vt.array()))
          .matrix()
          .transpose();
  Mlp gv = value.zeros_like();
  value.backward(tr, dV, gv);
  const Eigen::VectorXd gva = gv.flatten();
  auto vloss = [&](const Eigen::VectorXd& t) {
    value.unflatten(t);
    const Eigen::MatrixXd Vx = value.forward(X);
    return vf * (Vx.row(0).transpose().array() - vt.array()).square().mean();
  };
  for (long long i = 0; i < tv.size(); ++i) {
    Eigen::VectorXd tp = tv, tm = tv;
    tp(i) += h;
    tm(i) -= h;
    const double fd = (vloss(tp) - vloss(tm)) / (2.0 * h);
    const double denom = std::max(1e-4, std::abs(fd) + std::abs(gva(i)));
    CHECK(std::abs(gva(i) - fd) / denom <= 1e-4);
  }
}

TEST_CASE("zero advantages give a zero surrogate gradient") {
  Rng rng(6);
  GaussianPolicy pol(3, 1, rng);
  const int m = 5;
  Eigen::MatrixXd X(3, m), R(1, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < 3; ++i) X(i, j) = rng.uniform();
    R(0, j) = rng.uniform();
  }
  Eigen::VectorXd oldlp = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd adv = Eigen::VectorXd::Zero(m);
  const Eigen::VectorXd g =
      ppo_grad(pol, pol.net.flatten(), X, R, oldlp, adv, 0.2, 0.0);
  CHECK(g.norm() == 0.0);
}

TEST_CASE("ratio is exactly one at the behavior parameters") {
  Rng rng(8);
  GaussianPolicy pol(3, 2, rng);
  const int B = 24;
  Eigen::MatrixXd OBS(3, B), RAW(2, B);
  Rng arng(21);
  for (int t = 0; t < B; ++t) {
    const Eigen::Vector3d o(rng.uniform(), rng.uniform(), rng.uniform());
    OBS.col(t) = o;
    RAW.col(t) = pol.sample(o, arng).raw;
  }
  const Eigen::VectorXd oldlp = pol.log_prob(pol.net.forward(OBS), RAW);
  std::vector<int> pick = {17, 3, 9, 0, 23, 11, 5, 14};
  Eigen::MatrixXd X(3, 8), R(2, 8);
  Eigen::VectorXd ol(8);
  for (int j = 0; j < 8; ++j) {
    X.col(j) = OBS.col(pick[j]);
    R.col(j) = RAW.col(pick[j]);
    ol(j) = oldlp(pick[j]);
  }
  const Eigen::VectorXd lp = pol.log_prob(pol.net.forward(X), R);
  for (int j = 0; j < 8; ++j) CHECK(std::exp(lp(j) - ol(j)) == 1.0);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  Rng rng(12);
  Checkpoint ck;
  ck.policy = GaussianPolicy(3, 2, rng);
  ck.value = Mlp::make({3, 128, 128, 1}, rng);
  ck.trainer.batches = 37;
  ck.trainer.lr = 1.0 / 3.0;
  ck.trainer.seed = 123456789012345ull;
  const std::string path = "ck_roundtrip.txt";
  write_checkpoint(path, ck);
  const Checkpoint rd = read_checkpoint(path);
  CHECK(rd.policy.adim == 2);
  CHECK(rd.policy.net.flatten() == ck.policy.net.flatten());
  CHECK(rd.value.flatten() == ck.value.flatten());
  CHECK(rd.trainer.batches == 37);
  CHECK(rd.trainer.lr == ck.trainer.lr);
  CHECK(rd.trainer.seed == ck.trainer.seed);
  const std::string path2 = "ck_roundtrip2.txt";
  write_checkpoint(path2, rd);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("adam minimizes a quadratic") {
  Adam opt;
  opt.lr = 0.05;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd c(4);
  c << 1.0, -2.0, 0.5, 3.0;
  for (int i = 0; i < 2000; ++i) {
    const Eigen::VectorXd g = 2.0 * (x - c);
    opt.step(x, g);
  }
  CHECK((x - c).norm() < 1e-3);
}

TEST_CASE("training is deterministic for a fixed seed") {
  TrainerConfig cfg;
  cfg.batches = 3;
  const EnvFactory factory = [](int, std::uint64_t) {
    return std::make_unique<BanditEnv>(0.7);
  };
  const TrainResult r1 = train_ppo(factory, 1, cfg);
  const TrainResult r2 = train_ppo(factory, 1, cfg);
  std::ostringstream l1, l2;
  training_log_table(r1.log).write(l1);
  training_log_table(r2.log).write(l2);
  CHECK(l1.str() == l2.str());
  CHECK(r1.policy.net.flatten() == r2.policy.net.flatten());
  CHECK(r1.log.size() == 3);
  CHECK(r1.log[0].episodes == 500);  // one-step episodes fill the batch
}

TEST_CASE("bandit policy mean converges to the optimum") {
  TrainerConfig cfg;
  cfg.batches = 200;
  const EnvFactory factory = [](int, std::uint64_t) {
    return std::make_unique<BanditEnv>(0.7);
  };
  const TrainResult r = train_ppo(factory, 1, cfg);
  const Eigen::Vector3d obs(0.5, 0.5, 0.5);
  CHECK(r.policy.mean_action(obs)(0) == doctest::Approx(0.7).epsilon(0.075));
  const int n = static_cast<int>(r.log.size());
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 20; ++i) early += r.log[i].mean_return;
  for (int i = n - 20; i < n; ++i) late += r.log[i].mean_return;
  CHECK(late > early);
}

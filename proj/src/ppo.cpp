#include "am2r/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace am2r {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct Worker {
  std::unique_ptr<RolloutEnv> env;
  Rng rng;
  Eigen::Vector3d obs = Eigen::Vector3d::Zero();
  bool live = false;
};

void write_mlp(std::ostream& os, const Mlp& net) {
  const auto sz = net.sizes();
  os << sz.size();
  for (int s : sz) os << ' ' << s;
  os << '\n';
  const Eigen::VectorXd v = net.flatten();
  for (long long i = 0; i < v.size(); ++i) os << format_double(v(i)) << '\n';
}

Mlp read_mlp(std::istream& is) {
  std::size_t ns = 0;
  is >> ns;
  if (!is || ns < 2 || ns > 64)
    throw std::runtime_error("checkpoint: bad layer count");
  std::vector<int> sizes(ns);
  for (auto& s : sizes) {
    is >> s;
    if (!is || s < 1) throw std::runtime_error("checkpoint: bad layer size");
  }
  Rng dummy(0);
  Mlp net = Mlp::make(sizes, dummy);
  Eigen::VectorXd v(net.n_params());
  std::string tok;
  for (long long i = 0; i < v.size(); ++i) {
    if (!(is >> tok)) throw std::runtime_error("checkpoint: truncated values");
    v(i) = parse_double(tok);
  }
  net.unflatten(v);
  return net;
}

void expect_token(std::istream& is, const std::string& want) {
  std::string tok;
  if (!(is >> tok) || tok != want)
    throw std::runtime_error("checkpoint: expected '" + want + "'");
}

}  // namespace

void TrainerConfig::validate() const {
  if (batches < 1 || batch_size < 1 || fragment < 1 || workers < 1 ||
      minibatch < 1 || epochs < 1)
    throw std::invalid_argument("trainer: counts must be positive");
  if (batch_size != fragment * workers)
    throw std::invalid_argument("trainer: batch_size != workers * fragment");
  if (batch_size % minibatch != 0)
    throw std::invalid_argument("trainer: minibatch must divide batch_size");
  if (!(lr > 0.0) || !(value_lr > 0.0) || !(clip > 0.0))
    throw std::invalid_argument("trainer: bad learning rate or clip range");
  if (!(gamma >= 0.0 && gamma <= 1.0) ||
      !(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw std::invalid_argument("trainer: gamma/lambda outside [0,1]");
}

TrainResult train_ppo(const EnvFactory& factory, int action_dim,
                      const TrainerConfig& cfg, std::ostream* warn) {
  cfg.validate();
  if (action_dim < 1) throw std::invalid_argument("trainer: action_dim < 1");
  const int W = cfg.workers, F = cfg.fragment, B = cfg.batch_size;
  const int a = action_dim;

  Rng master(cfg.seed);
  GaussianPolicy policy(3, a, master);
  Mlp value = Mlp::make({3, 128, 128, 1}, master);

  std::vector<Worker> workers(W);
  {
    std::uint64_t x = cfg.seed;
    Rng::splitmix64(x);
    for (int w = 0; w < W; ++w) {
      workers[w].env = factory(w, Rng::splitmix64(x));
      workers[w].rng = master.split(static_cast<std::uint64_t>(w));
    }
  }

  Adam opt_policy, opt_value;
  opt_policy.lr = cfg.lr;
  opt_value.lr = cfg.value_lr;
  Eigen::VectorXd theta_p = policy.net.flatten();
  Eigen::VectorXd theta_v = value.flatten();

  TrainResult result;

  Eigen::MatrixXd OBS(3, B), RAW(a, B), CLAMPED(a, B);
  Eigen::VectorXd REW(B), OLDLP(B), ADV(B), VTARG(B);
  std::vector<char> DONE(B);

  for (int batch = 0; batch < cfg.batches; ++batch) {
    int episodes = 0, guarded = 0;
    double sum_return = 0.0, sum_cost = 0.0;
    for (int w = 0; w < W; ++w) {
      auto& wk = workers[w];
      for (int i = 0; i < F; ++i) {
        const int t = w * F + i;
        if (!wk.live) {
          int tries = 0;
          do {
            if (++tries > 100)
              throw std::runtime_error(
                  "trainer: environment keeps finishing at reset");
            wk.obs = wk.env->reset();
          } while (wk.env->done());
          wk.live = true;
        }
        const ActionSample as = policy.sample(wk.obs, wk.rng);
        OBS.col(t) = wk.obs;
        RAW.col(t) = as.raw;
        CLAMPED.col(t) = as.clamped;
        const RolloutStep rs = wk.env->step(as.clamped);
        REW(t) = rs.reward;
        DONE[t] = rs.done ? 1 : 0;
        wk.obs = rs.obs;
        if (rs.done) {
          wk.live = false;
          ++episodes;
          sum_return += wk.env->episode_return();
          sum_cost += wk.env->episode_cost();
          if (wk.env->episode_guarded()) ++guarded;
        }
      }
    }

    // Behavior quantities recomputed batched so update-time ratios are
    // exact at the behavior parameters.
    const Eigen::MatrixXd Yb = policy.net.forward(OBS);
    OLDLP = policy.log_prob(Yb, RAW);
    Eigen::MatrixXd mu_b, ls_b;
    policy.heads(Yb, mu_b, ls_b);
    const double mean_sigma = ls_b.array().exp().mean();
    const double mean_action = CLAMPED.array().mean();

    const Eigen::MatrixXd Vrow = value.forward(OBS);
    Eigen::MatrixXd BOOT(3, W);
    for (int w = 0; w < W; ++w) BOOT.col(w) = workers[w].obs;
    const Eigen::MatrixXd Vboot = value.forward(BOOT);

    for (int w = 0; w < W; ++w) {
      double lastA = 0.0;
      double vnext = Vboot(0, w);
      for (int i = F - 1; i >= 0; --i) {
        const int t = w * F + i;
        const double nonterm = DONE[t] ? 0.0 : 1.0;
        const double delta =
            REW(t) + cfg.gamma * vnext * nonterm - Vrow(0, t);
        lastA = delta + cfg.gamma * cfg.gae_lambda * nonterm * lastA;
        ADV(t) = lastA;
        VTARG(t) = lastA + Vrow(0, t);
        vnext = Vrow(0, t);
      }
    }
    if (cfg.normalize_adv) {
      const double m = ADV.mean();
      const double sd =
          std::sqrt(std::max(0.0, ADV.squaredNorm() / B - m * m));
      ADV = (ADV.array() - m) / (sd + 1e-8);
    }

    std::vector<int> idx(B);
    std::iota(idx.begin(), idx.end(), 0);
    const int n_mb = B / cfg.minibatch;
    const int m = cfg.minibatch;
    double acc_ploss = 0.0, acc_vloss = 0.0, acc_ent = 0.0;
    int n_upd = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (int i = B - 1; i > 0; --i) {
        const int j = static_cast<int>(
            master.uniform_index(static_cast<std::uint64_t>(i) + 1));
        std::swap(idx[i], idx[j]);
      }
      for (int mb = 0; mb < n_mb; ++mb) {
        Eigen::MatrixXd X(3, m), R(a, m);
        Eigen::VectorXd oldlp(m), adv(m), vt(m);
        for (int j = 0; j < m; ++j) {
          const int t = idx[mb * m + j];
          X.col(j) = OBS.col(t);
          R.col(j) = RAW.col(t);
          oldlp(j) = OLDLP(t);
          adv(j) = ADV(t);
          vt(j) = VTARG(t);
        }

        Mlp::Trace trace;
        const Eigen::MatrixXd Y = policy.net.forward(X, trace);
        const Eigen::VectorXd lp = policy.log_prob(Y, R);
        const Eigen::ArrayXd ratio = (lp - oldlp).array().exp();
        const Eigen::ArrayXd advA = adv.array();
        const Eigen::ArrayXd unclipped = ratio * advA;
        const Eigen::ArrayXd clipped =
            ratio.min(1.0 + cfg.clip).max(1.0 - cfg.clip) * advA;
        const double surrogate = unclipped.min(clipped).mean();
        const Eigen::VectorXd ent = policy.entropy(Y);
        Eigen::VectorXd coeff(m), ecoeff(m);
        for (int j = 0; j < m; ++j) {
          const bool active = unclipped(j) <= clipped(j);
          coeff(j) = active ? -advA(j) * ratio(j) / m : 0.0;
          ecoeff(j) = -cfg.ent_coef / m;
        }
        const Eigen::MatrixXd dY = policy.head_gradient(Y, R, coeff, ecoeff);
        Mlp gp = policy.net.zeros_like();
        policy.net.backward(trace, dY, gp);
        const Eigen::VectorXd gpv = gp.flatten();
        if (!gpv.allFinite()) {
          std::ostringstream msg;
          msg << "trainer: non-finite policy gradient at batch " << batch
              << " epoch " << epoch << " minibatch " << mb;
          throw std::runtime_error(msg.str());
        }
        opt_policy.step(theta_p, gpv);
        policy.net.unflatten(theta_p);

        Mlp::Trace vtrace;
        const Eigen::MatrixXd V = value.forward(X, vtrace);
        const Eigen::ArrayXd diff = V.row(0).transpose().array() - vt.array();
        const double vloss = diff.square().mean();
        Eigen::MatrixXd dV(1, m);
        dV.row(0) = (cfg.vf_coef * 2.0 / m * diff).matrix().transpose();
        Mlp gv = value.zeros_like();
        value.backward(vtrace, dV, gv);
        const Eigen::VectorXd gvv = gv.flatten();
        if (!gvv.allFinite()) {
          std::ostringstream msg;
          msg << "trainer: non-finite value gradient at batch " << batch
              << " epoch " << epoch << " minibatch " << mb;
          throw std::runtime_error(msg.str());
        }
        opt_value.step(theta_v, gvv);
        value.unflatten(theta_v);

        acc_ploss += -surrogate - cfg.ent_coef * ent.mean();
        acc_vloss += vloss;
        acc_ent += ent.mean();
        ++n_upd;
      }
    }

    if (warn && episodes > 0 && guarded == episodes)
      *warn << "warning: batch " << batch << ": all " << episodes
            << " finished episodes hit a guard\n";

    TrainLogRow row;
    row.batch = batch;
    row.episodes = episodes;
    row.guarded = guarded;
    row.mean_return = episodes ? sum_return / episodes : kNan;
    row.mean_cost = episodes ? sum_cost / episodes : kNan;
    row.policy_loss = acc_ploss / n_upd;
    row.value_loss = acc_vloss / n_upd;
    row.entropy = acc_ent / n_upd;
    row.mean_sigma = mean_sigma;
    row.mean_action = mean_action;
    result.log.push_back(row);
  }

  result.policy = std::move(policy);
  result.value = std::move(value);
  return result;
}

Table training_log_table(const std::vector<TrainLogRow>& log) {
  Table t({"batch", "episodes", "guarded", "mean_return", "mean_cost",
           "policy_loss", "value_loss", "entropy", "mean_sigma",
           "mean_action"});
  for (const auto& r : log) {
    t.add_row({format_int(r.batch), format_int(r.episodes),
               format_int(r.guarded), format_double(r.mean_return),
               format_double(r.mean_cost), format_double(r.policy_loss),
               format_double(r.value_loss), format_double(r.entropy),
               format_double(r.mean_sigma), format_double(r.mean_action)});
  }
  return t;
}

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
  const auto& tc = ck.trainer;
  os << "am2r-checkpoint 1\n";
  os << "trainer " << tc.batches << ' ' << tc.batch_size << ' ' << tc.fragment
     << ' ' << tc.workers << ' ' << tc.minibatch << ' ' << tc.epochs << ' '
     << format_double(tc.lr) << ' ' << format_double(tc.value_lr) << ' '
     << format_double(tc.clip) << ' ' << format_double(tc.vf_coef) << ' '
     << format_double(tc.ent_coef) << ' ' << format_double(tc.gamma) << ' '
     << format_double(tc.gae_lambda) << ' ' << (tc.normalize_adv ? 1 : 0)
     << ' ' << tc.seed << '\n';
  os << "policy " << ck.policy.adim << '\n';
  write_mlp(os, ck.policy.net);
  os << "value\n";
  write_mlp(os, ck.value);
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  expect_token(is, "am2r-checkpoint");
  int version = 0;
  is >> version;
  if (version != 1) throw std::runtime_error("checkpoint: unknown version");
  Checkpoint ck;
  expect_token(is, "trainer");
  auto& tc = ck.trainer;
  std::string tok;
  int norm = 0;
  is >> tc.batches >> tc.batch_size >> tc.fragment >> tc.workers >>
      tc.minibatch >> tc.epochs;
  is >> tok;
  tc.lr = parse_double(tok);
  is >> tok;
  tc.value_lr = parse_double(tok);
  is >> tok;
  tc.clip = parse_double(tok);
  is >> tok;
  tc.vf_coef = parse_double(tok);
  is >> tok;
  tc.ent_coef = parse_double(tok);
  is >> tok;
  tc.gamma = parse_double(tok);
  is >> tok;
  tc.gae_lambda = parse_double(tok);
  is >> norm >> tc.seed;
  tc.normalize_adv = norm != 0;
  if (!is) throw std::runtime_error("checkpoint: bad trainer block");
  expect_token(is, "policy");
  int adim = 0;
  is >> adim;
  if (!is || adim < 1) throw std::runtime_error("checkpoint: bad action dim");
  ck.policy.adim = adim;
  ck.policy.net = read_mlp(is);
  expect_token(is, "value");
  ck.value = read_mlp(is);
  return ck;
}

std::vector<StepRecord> deploy_policy(const GaussianPolicy& policy,
                                      const EpisodeConfig& cfg,
                                      std::uint64_t seed, bool deterministic,
                                      TriMesh* final_mesh) {
  std::uint64_t x = seed;
  const std::uint64_t env_seed = Rng::splitmix64(x);
  Rng arng(Rng::splitmix64(x));
  AmrEnv env(cfg, env_seed);
  if ((cfg.hp() ? 2 : 1) != policy.action_dim())
    throw std::invalid_argument("deploy: action dimension mismatch");
  Eigen::VectorXd obs = env.reset();
  while (!env.done()) {
    Eigen::VectorXd act = deterministic ? policy.mean_action(obs)
                                        : policy.sample(obs, arng).clamped;
    const RolloutStep rs = env.step(act);
    obs = rs.obs;
  }
  if (final_mesh) *final_mesh = env.mesh();
  return env.transcript();
}

}  // namespace am2r

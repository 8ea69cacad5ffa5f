#include "am2r/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace am2r {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double safe_log2(double v) { return std::log2(std::max(v, 1e-300)); }

}  // namespace

ProblemDistribution ProblemDistribution::of(ProblemSpec spec) {
  ProblemDistribution d;
  d.fixed = std::move(spec);
  return d;
}

ProblemDistribution ProblemDistribution::pacman_uniform(double omega_min,
                                                        double omega_max) {
  if (!(omega_min > 0.0 && omega_min <= omega_max &&
        omega_max < 2.0 * 3.14159265358979323846))
    throw std::invalid_argument("pacman_uniform: bad omega range");
  ProblemDistribution d;
  d.pacman_family = true;
  d.omega_min = omega_min;
  d.omega_max = omega_max;
  return d;
}

ProblemSpec ProblemDistribution::draw(Rng& rng) const {
  if (fixed) return *fixed;
  if (!pacman_family)
    throw std::logic_error("ProblemDistribution: nothing to draw from");
  return make_pacman_corner(rng.uniform(omega_min, omega_max));
}

void EpisodeConfig::validate() const {
  if (!problem.fixed && !problem.pacman_family)
    throw std::invalid_argument("episode: no problem configured");
  if (accuracy()) {
    if (!(dof_budget > 0.0) || eta_target != 0.0)
      throw std::invalid_argument(
          "episode: accuracy mode needs dof_budget > 0 and no eta_target");
  } else {
    if (!(eta_target > 0.0) || dof_budget != 0.0)
      throw std::invalid_argument(
          "episode: efficiency mode needs eta_target > 0 and no dof_budget");
  }
  if (max_steps < 1) throw std::invalid_argument("episode: max_steps < 1");
  if (!(dof_cap > 0.0)) throw std::invalid_argument("episode: dof_cap <= 0");
  if (resolution < 1 || order < 1 || order > kMaxOrder)
    throw std::invalid_argument("episode: bad resolution/order");
}

AmrEnv::AmrEnv(EpisodeConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), rng_(seed) {
  cfg_.validate();
}

void AmrEnv::solve_and_estimate() {
  sol_ = solve(mesh_, problem_, cfg_.solver);
  field_ = estimate(sol_, mesh_);
  eta_ = field_.eta_global;
}

Observation AmrEnv::make_observation() const {
  Observation o;
  if (cfg_.accuracy())
    o.b = J_ / cfg_.dof_budget;
  else
    o.b = cfg_.eta_target / std::max(eta_, 1e-300);
  if (cfg_.hp()) {
    const auto zs = zeta_stats(field_);
    o.s1 = zs.mean;
    o.s2 = zs.sd;
  } else {
    const auto ns = normalized_stats_h(field_);
    o.s1 = std::log2(1.0 + ns.rms);
    o.s2 = std::log2(1.0 + ns.sd);
  }
  return o;
}

void AmrEnv::append_record(double theta, double rho, double reward) {
  StepRecord r;
  r.k = k_;
  r.theta = theta;
  r.rho = rho;
  r.n_elems = mesh_.n_elems();
  r.ndofs = sol_.ndofs;
  r.J = J_;
  r.eta = eta_;
  r.b = obs_.b;
  r.s1 = obs_.s1;
  r.s2 = obs_.s2;
  r.reward = reward;
  r.done_reason = done_reason_;
  transcript_.push_back(std::move(r));
}

Eigen::Vector3d AmrEnv::reset() {
  problem_ = cfg_.problem.draw(rng_);
  mesh_ = build_initial_mesh(problem_, cfg_.resolution, cfg_.order);
  solve_and_estimate();
  k_ = 0;
  J_ = static_cast<double>(sol_.ndofs);
  if (J_ >= cfg_.dof_cap)
    throw std::invalid_argument("episode: initial mesh already above dof_cap");
  done_ = false;
  done_reason_.clear();
  if (cfg_.accuracy()) {
    if (J_ >= cfg_.dof_budget) {
      done_ = true;
      done_reason_ = "budget";
    }
  } else if (eta_ <= cfg_.eta_target) {
    done_ = true;
    done_reason_ = "target";
  }
  obs_ = make_observation();
  transcript_.clear();
  append_record(kNan, kNan, kNan);
  return obs_.vec();
}

RolloutStep AmrEnv::step(const Action& action) {
  if (done_) throw std::logic_error("step: episode already finished");
  const double theta = std::clamp(action.theta, 0.0, 1.0);
  const double rho =
      cfg_.hp() ? std::clamp(action.rho, 0.0, 1.0) : kNan;

  MarkResult marks;
  if (cfg_.hp()) {
    marks = mark_hp(field_, theta, rho);
  } else if (cfg_.marking == MarkingRule::Dorfler) {
    marks = mark_dorfler(field_, theta);
  } else {
    marks = mark_greedy(field_, theta);
  }

  TriMesh next = cfg_.hp() ? refine_h(refine_p(mesh_, marks.p_set), marks.h_set)
                           : refine_h(mesh_, marks.h_set);
  if (count_dofs(next) > cfg_.dof_cap) {
    done_ = true;
    done_reason_ = "dof_cap";
    ++k_;
    const double reward = cfg_.guard_penalty;
    append_record(theta, rho, reward);
    return {obs_.vec(), reward, true};
  }

  const double prev_J = J_;
  const double prev_eta = eta_;
  mesh_ = std::move(next);
  solve_and_estimate();
  ++k_;
  J_ += static_cast<double>(sol_.ndofs);

  double reward = cfg_.accuracy() ? safe_log2(prev_eta) - safe_log2(eta_)
                                  : safe_log2(prev_J) - safe_log2(J_);
  if (cfg_.accuracy()) {
    if (J_ >= cfg_.dof_budget) {
      done_ = true;
      done_reason_ = "budget";
    }
  } else if (eta_ <= cfg_.eta_target) {
    done_ = true;
    done_reason_ = "target";
  }
  if (!done_ && k_ >= cfg_.max_steps) {
    done_ = true;
    done_reason_ = "max_steps";
    reward += cfg_.guard_penalty;
  }
  obs_ = make_observation();
  append_record(theta, rho, reward);
  return {obs_.vec(), reward, done_};
}

RolloutStep AmrEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != action_dim())
    throw std::invalid_argument("step: wrong action dimension");
  Action a;
  a.theta = action(0);
  if (cfg_.hp()) {
    a.rho = action(1);
    a.has_rho = true;
  }
  return step(a);
}

double AmrEnv::episode_return() const {
  double acc = 0.0;
  for (const auto& r : transcript_)
    if (r.k > 0) acc += r.reward;
  return acc;
}

bool AmrEnv::episode_guarded() const {
  return done_reason_ == "max_steps" || done_reason_ == "dof_cap";
}

double AmrEnv::episode_cost() const {
  return cfg_.accuracy() ? safe_log2(eta_) : safe_log2(J_);
}

std::vector<StepRecord> run_fixed(const EpisodeConfig& cfg, std::uint64_t seed,
                                  double theta, std::optional<double> rho) {
  if (cfg.hp() && !rho)
    throw std::invalid_argument("run_fixed: hp mode needs rho");
  AmrEnv env(cfg, seed);
  env.reset();
  Action a;
  a.theta = theta;
  a.rho = rho.value_or(0.0);
  a.has_rho = rho.has_value();
  while (!env.done()) env.step(a);
  return env.transcript();
}

std::pair<double, double> improvement_metrics(double eta_baseline,
                                              double eta_policy) {
  if (!(eta_baseline > 0.0) || !(eta_policy > 0.0))
    throw std::invalid_argument("improvement_metrics: inputs must be positive");
  const double factor = eta_baseline / eta_policy;
  return {factor, std::log2(factor)};
}

Table transcript_table(const std::vector<StepRecord>& transcript) {
  Table t({"k", "theta", "rho", "n_elems", "ndofs", "J_k", "eta_k", "b_k", "s1",
           "s2", "reward", "done_reason"});
  for (const auto& r : transcript) {
    t.add_row({format_int(r.k), format_double(r.theta), format_double(r.rho),
               format_int(r.n_elems), format_int(r.ndofs), format_double(r.J),
               format_double(r.eta), format_double(r.b), format_double(r.s1),
               format_double(r.s2), format_double(r.reward), r.done_reason});
  }
  return t;
}

}  // namespace am2r

#include "doctest.h"

#include "am2r/env.hpp"

#include <cmath>
#include <sstream>

using namespace am2r;

namespace {

EpisodeConfig lshape_eff(int order, double eta_target) {
  EpisodeConfig cfg;
  cfg.mode = EnvMode::HEfficiency;
  cfg.problem = ProblemDistribution::of(make_lshape_corner());
  cfg.resolution = 1;
  cfg.order = order;
  cfg.eta_target = eta_target;
  return cfg;
}

EpisodeConfig square_acc(double dof_budget) {
  EpisodeConfig cfg;
  cfg.mode = EnvMode::HAccuracy;
  cfg.problem = ProblemDistribution::of(make_square_sine());
  cfg.resolution = 4;
  cfg.order = 1;
  cfg.dof_budget = dof_budget;
  return cfg;
}

bool finite_row(const StepRecord& r) {
  return std::isfinite(r.b) && std::isfinite(r.s1) && std::isfinite(r.s2) &&
         std::isfinite(r.eta) && std::isfinite(r.J);
}

}  // namespace

TEST_CASE("initial observation ratios") {
  AmrEnv env(lshape_eff(2, 1e-3), 1);
  const auto o = env.reset();
  CHECK(o(0) > 0.0);
  CHECK(o(0) < 1.0);  // initial error above target
  CHECK(o(1) >= 0.0);
  CHECK(o(2) >= 0.0);

  EpisodeConfig hp;
  hp.mode = EnvMode::HpAccuracy;
  hp.problem = ProblemDistribution::of(make_pacman_corner(0.5 * M_PI));
  hp.order = 2;
  hp.dof_budget = 1e4;
  AmrEnv henv(hp, 1);
  const auto ho = henv.reset();
  const double n0 = static_cast<double>(count_dofs(henv.mesh()));
  CHECK(ho(0) == doctest::Approx(n0 / 1e4).epsilon(1e-14));
}

TEST_CASE("same seed reproduces drawn problems and observations") {
  EpisodeConfig cfg;
  cfg.mode = EnvMode::HpAccuracy;
  cfg.problem = ProblemDistribution::pacman_uniform(0.1 * M_PI, 0.9 * M_PI);
  cfg.order = 2;
  cfg.dof_budget = 5e3;

  AmrEnv a(cfg, 42), b(cfg, 42), c(cfg, 43);
  const auto oa = a.reset();
  const auto ob = b.reset();
  c.reset();
  CHECK(a.problem().id == b.problem().id);
  CHECK(a.mesh().n_elems() == b.mesh().n_elems());
  CHECK(oa == ob);
  CHECK(a.problem().id != c.problem().id);

  a.reset();
  CHECK(a.problem().id != b.problem().id);  // second draw advances the stream
}

TEST_CASE("efficiency episode telescopes dof growth") {
  const auto tr = run_fixed(lshape_eff(1, 1.07e-3), 0, 0.5);
  REQUIRE(tr.size() >= 2);
  const auto& last = tr.back();
  CHECK(last.done_reason == "target");
  CHECK(last.eta <= 1.07e-3);
  double ret = 0.0;
  double J = 0.0;
  for (const auto& r : tr) {
    CHECK(finite_row(r));
    if (r.k > 0) ret += r.reward;
    J += static_cast<double>(r.ndofs);
    CHECK(r.J == J);  // cumulative dof count matches the column exactly
  }
  const double expect = std::log2(tr.front().J) - std::log2(last.J);
  CHECK(ret == doctest::Approx(expect).epsilon(1e-12));
  CHECK(ret < 0.0);
}

TEST_CASE("accuracy episode telescopes error decrease") {
  const auto tr = run_fixed(square_acc(3000.0), 0, 0.5);
  REQUIRE(tr.size() >= 2);
  const auto& last = tr.back();
  CHECK(last.done_reason == "budget");
  CHECK(last.J >= 3000.0);
  for (std::size_t i = 0; i + 1 < tr.size(); ++i)
    CHECK(tr[i].J < 3000.0);  // never refines once the budget is hit
  for (const auto& r : tr) {
    CHECK(r.b > 0.0);
    if (r.done_reason.empty()) CHECK(r.b <= 1.0);
  }
  double ret = 0.0;
  for (const auto& r : tr)
    if (r.k > 0) ret += r.reward;
  const double expect = std::log2(tr.front().eta) - std::log2(last.eta);
  CHECK(ret == doctest::Approx(expect).epsilon(1e-12));
  CHECK(ret > 0.0);
}

TEST_CASE("theta zero refines everything") {
  EpisodeConfig cfg = square_acc(1e9);
  cfg.dof_budget = 0.0;
  cfg.mode = EnvMode::HEfficiency;
  cfg.eta_target = 1e-9;
  AmrEnv env(cfg, 0);
  env.reset();
  const int n0 = env.mesh().n_elems();
  const double eta0 = env.transcript().back().eta;
  Action a;
  a.theta = 0.0;
  env.step(a);
  CHECK(env.mesh().n_elems() >= 2 * n0);
  CHECK(env.transcript().back().eta < eta0);
}

TEST_CASE("action components are clamped") {
  EpisodeConfig cfg = lshape_eff(1, 1e-9);
  AmrEnv a(cfg, 0), b(cfg, 0);
  a.reset();
  b.reset();
  Action wild;
  wild.theta = -0.7;
  Action zero;
  zero.theta = 0.0;
  a.step(wild);
  b.step(zero);
  CHECK(a.mesh().n_elems() == b.mesh().n_elems());
  CHECK(a.transcript().back().theta == 0.0);
}

TEST_CASE("exhausted budget ends the episode at reset") {
  EpisodeConfig cfg = square_acc(0.0);
  AmrEnv probe(square_acc(1e6), 0);
  probe.reset();
  cfg.dof_budget = static_cast<double>(probe.transcript().front().ndofs);
  AmrEnv env(cfg, 0);
  const auto o = env.reset();
  CHECK(env.done());
  CHECK(env.transcript().size() == 1);
  CHECK(env.transcript().front().done_reason == "budget");
  CHECK(o(0) == 1.0);
  CHECK(env.episode_return() == 0.0);
  Action a;
  a.theta = 0.5;
  CHECK_THROWS_AS(env.step(a), std::logic_error);
}

TEST_CASE("max_steps guard fires distinctly with penalty") {
  EpisodeConfig cfg = lshape_eff(1, 1e-12);
  cfg.max_steps = 3;
  const auto tr = run_fixed(cfg, 0, 0.5);
  REQUIRE(tr.size() == 4);
  CHECK(tr.back().done_reason == "max_steps");
  CHECK(tr.back().k == 3);
  CHECK(tr.back().reward < cfg.guard_penalty + 1.0);

  AmrEnv env(cfg, 0);
  env.reset();
  Action a;
  a.theta = 0.5;
  while (!env.done()) env.step(a);
  CHECK(env.episode_guarded());
}

TEST_CASE("dof_cap guard reverts the refinement") {
  EpisodeConfig cfg;
  cfg.mode = EnvMode::HEfficiency;
  cfg.problem = ProblemDistribution::of(make_square_sine());
  cfg.resolution = 4;
  cfg.order = 1;
  cfg.eta_target = 1e-12;
  cfg.dof_cap = 60.0;
  const auto tr = run_fixed(cfg, 0, 0.0);
  REQUIRE(tr.size() >= 2);
  const auto& last = tr.back();
  const auto& prev = tr[tr.size() - 2];
  CHECK(last.done_reason == "dof_cap");
  CHECK(last.reward == cfg.guard_penalty);
  CHECK(last.n_elems == prev.n_elems);
  CHECK(last.ndofs == prev.ndofs);
  CHECK(last.J == prev.J);
  CHECK(last.k == prev.k + 1);
}

TEST_CASE("hp episode raises orders under a fixed rule") {
  EpisodeConfig cfg;
  cfg.mode = EnvMode::HpAccuracy;
  cfg.problem = ProblemDistribution::of(make_pacman_corner(0.5 * M_PI));
  cfg.order = 2;
  cfg.dof_budget = 4000.0;
  const auto tr = run_fixed(cfg, 0, 0.6, 0.3);
  REQUIRE(tr.size() >= 2);
  CHECK(tr.back().done_reason == "budget");
  CHECK(tr.back().J >= 4000.0);
  for (const auto& r : tr) {
    CHECK(finite_row(r));
    if (r.k > 0) CHECK(r.rho == 0.3);
  }
  AmrEnv env(cfg, 0);
  env.reset();
  Action a;
  a.theta = 0.6;
  a.rho = 0.3;
  a.has_rho = true;
  while (!env.done()) env.step(a);
  CHECK(env.mesh().max_order() > 2);
  double ret = 0.0;
  for (const auto& r : env.transcript())
    if (r.k > 0) ret += r.reward;
  const double expect = std::log2(env.transcript().front().eta) -
                        std::log2(env.transcript().back().eta);
  CHECK(ret == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS(run_fixed(cfg, 0, 0.6), std::invalid_argument);
}

TEST_CASE("rollout interface matches action dimension") {
  AmrEnv env(lshape_eff(1, 1e-3), 0);
  CHECK(env.action_dim() == 1);
  env.reset();
  Eigen::VectorXd bad(2);
  bad << 0.5, 0.5;
  CHECK_THROWS_AS(env.step(bad), std::invalid_argument);
  Eigen::VectorXd good(1);
  good << 0.5;
  const auto s = env.step(good);
  CHECK(std::isfinite(s.reward));
}

TEST_CASE("improvement metrics") {
  auto [f1, e1] = improvement_metrics(0.002613, 0.001665);
  CHECK(f1 == doctest::Approx(1.57).epsilon(0.005));
  CHECK(e1 == doctest::Approx(0.65).epsilon(0.01));
  auto [f2, e2] = improvement_metrics(0.000338, 0.000280);
  CHECK(f2 == doctest::Approx(1.21).epsilon(0.005));
  CHECK(e2 == doctest::Approx(0.27).epsilon(0.02));
  auto [f3, e3] = improvement_metrics(0.5, 0.5);
  CHECK(f3 == 1.0);
  CHECK(e3 == 0.0);
  CHECK_THROWS_AS(improvement_metrics(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("transcript csv round-trips exactly") {
  EpisodeConfig cfg = lshape_eff(1, 1e-12);
  cfg.max_steps = 2;
  const auto tr = run_fixed(cfg, 0, 0.5);
  const Table t = transcript_table(tr);
  CHECK(t.columns() == std::vector<std::string>{"k", "theta", "rho", "n_elems",
                                                "ndofs", "J_k", "eta_k", "b_k",
                                                "s1", "s2", "reward",
                                                "done_reason"});
  CHECK(t.cell(0, "theta") == "nan");
  CHECK(t.cell(0, "rho") == "nan");
  std::ostringstream os;
  t.write(os);
  std::istringstream is(os.str());
  const Table back = Table::read(is);
  CHECK(back == t);
  CHECK(back.num(1, "eta_k") == tr[1].eta);
  CHECK(back.num(t.n_rows() - 1, "J_k") == tr.back().J);
}

TEST_CASE("config validation rejects mismatched targets") {
  EpisodeConfig cfg = lshape_eff(1, 1e-3);
  cfg.dof_budget = 100.0;
  CHECK_THROWS_AS(AmrEnv(cfg, 0), std::invalid_argument);
  cfg.dof_budget = 0.0;
  cfg.eta_target = 0.0;
  CHECK_THROWS_AS(AmrEnv(cfg, 0), std::invalid_argument);
  cfg.eta_target = 1e-3;
  cfg.max_steps = 0;
  CHECK_THROWS_AS(AmrEnv(cfg, 0), std::invalid_argument);
}

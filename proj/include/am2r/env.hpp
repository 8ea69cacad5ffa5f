#pragma once

#include "am2r/csv.hpp"
#include "am2r/estimator.hpp"
#include "am2r/marking.hpp"
#include "am2r/problem.hpp"
#include "am2r/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace am2r {

enum class EnvMode { HEfficiency, HAccuracy, HpAccuracy };
enum class MarkingRule { Greedy, Dorfler };

// A fixed problem, or a family of pacman problems with the opening angle
// drawn uniformly at every reset (the drawn angle is not observed).
struct ProblemDistribution {
  std::optional<ProblemSpec> fixed;
  bool pacman_family = false;
  double omega_min = 0.0;
  double omega_max = 0.0;

  static ProblemDistribution of(ProblemSpec spec);
  static ProblemDistribution pacman_uniform(double omega_min, double omega_max);
  ProblemSpec draw(Rng& rng) const;
};

struct EpisodeConfig {
  EnvMode mode = EnvMode::HEfficiency;
  ProblemDistribution problem;
  int resolution = 1;
  int order = 1;
  double eta_target = 0.0;  // efficiency stop: eta_k <= eta_target
  double dof_budget = 0.0;  // accuracy stop: J_k >= dof_budget
  MarkingRule marking = MarkingRule::Greedy;
  int max_steps = 50;
  double dof_cap = 1e6;
  double guard_penalty = -10.0;
  SolverOptions solver;

  bool hp() const { return mode == EnvMode::HpAccuracy; }
  bool accuracy() const { return mode != EnvMode::HEfficiency; }
  void validate() const;
};

struct Observation {
  double b = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  Eigen::Vector3d vec() const { return {b, s1, s2}; }
};

struct Action {
  double theta = 0.0;
  double rho = 0.0;
  bool has_rho = false;
};

struct StepRecord {
  int k = 0;
  double theta = 0.0;
  double rho = 0.0;
  int n_elems = 0;
  int ndofs = 0;
  double J = 0.0;
  double eta = 0.0;
  double b = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double reward = 0.0;
  std::string done_reason;  // "", "target", "budget", "max_steps", "dof_cap"
};

struct RolloutStep {
  Eigen::Vector3d obs = Eigen::Vector3d::Zero();
  double reward = 0.0;
  bool done = false;
};

// What the trainer needs from an environment; the adaptive-mesh episode and
// the toy test environments both implement it.
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual int action_dim() const = 0;
  virtual Eigen::Vector3d reset() = 0;
  virtual RolloutStep step(const Eigen::VectorXd& action) = 0;
  virtual bool done() const = 0;
  virtual double episode_return() const = 0;
  virtual bool episode_guarded() const = 0;
  virtual double episode_cost() const { return -episode_return(); }
};

// One solve-estimate-mark-refine episode. Rewards telescope so that the
// undiscounted return is log2(J_0) - log2(J_K) in efficiency mode and
// log2(eta_0) - log2(eta_K) in accuracy mode, plus the guard penalty when a
// guard fires.
class AmrEnv : public RolloutEnv {
 public:
  AmrEnv(EpisodeConfig cfg, std::uint64_t seed);

  int action_dim() const override { return cfg_.hp() ? 2 : 1; }
  Eigen::Vector3d reset() override;
  RolloutStep step(const Eigen::VectorXd& action) override;
  bool done() const override { return done_; }
  double episode_return() const override;
  bool episode_guarded() const override;
  // log2 of the quantity being minimized: cumulative dofs in efficiency
  // mode, final error estimate in accuracy mode.
  double episode_cost() const override;

  RolloutStep step(const Action& action);
  Observation observe() const { return obs_; }
  const std::vector<StepRecord>& transcript() const { return transcript_; }
  const TriMesh& mesh() const { return mesh_; }
  const LocalErrorField& field() const { return field_; }
  const ProblemSpec& problem() const { return problem_; }
  const EpisodeConfig& config() const { return cfg_; }

 private:
  void solve_and_estimate();
  Observation make_observation() const;
  void append_record(double theta, double rho, double reward);

  EpisodeConfig cfg_;
  Rng rng_;
  ProblemSpec problem_;
  TriMesh mesh_;
  DiscreteSolution sol_;
  LocalErrorField field_;
  Observation obs_;
  int k_ = 0;
  double J_ = 0.0;
  double eta_ = 0.0;
  bool done_ = true;
  std::string done_reason_;
  std::vector<StepRecord> transcript_;
};

// Whole episode under a constant action.
std::vector<StepRecord> run_fixed(const EpisodeConfig& cfg, std::uint64_t seed,
                                  double theta,
                                  std::optional<double> rho = std::nullopt);

// (baseline/policy error ratio, its log2).
std::pair<double, double> improvement_metrics(double eta_baseline,
                                              double eta_policy);

Table transcript_table(const std::vector<StepRecord>& transcript);

}  // namespace am2r

#pragma once

#include "am2r/env.hpp"
#include "am2r/policy.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace am2r {

struct TrainerConfig {
  int batches = 200;
  int batch_size = 500;
  int fragment = 50;
  int workers = 10;
  int minibatch = 100;
  int epochs = 10;
  double lr = 1e-4;
  double value_lr = 1e-3;
  double clip = 0.2;
  double vf_coef = 0.5;
  double ent_coef = 0.0;
  double gamma = 1.0;
  double gae_lambda = 1.0;
  bool normalize_adv = true;
  std::uint64_t seed = 4000;

  void validate() const;
};

struct TrainLogRow {
  int batch = 0;
  int episodes = 0;  // episodes that finished during this batch
  int guarded = 0;
  double mean_return = 0.0;
  double mean_cost = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_sigma = 0.0;
  double mean_action = 0.0;
};

struct TrainResult {
  GaussianPolicy policy;
  Mlp value;
  std::vector<TrainLogRow> log;
};

using EnvFactory =
    std::function<std::unique_ptr<RolloutEnv>(int worker, std::uint64_t seed)>;

// Clipped-surrogate policy-gradient training over a pool of environment
// instances, each rolled out in fixed-length fragments. Fully deterministic
// for a given config; batches where every finished episode hit a guard are
// reported on `warn`.
TrainResult train_ppo(const EnvFactory& factory, int action_dim,
                      const TrainerConfig& cfg, std::ostream* warn = nullptr);

Table training_log_table(const std::vector<TrainLogRow>& log);

struct Checkpoint {
  GaussianPolicy policy;
  Mlp value;
  TrainerConfig trainer;
};

// Text serialization; numeric values round-trip bit-exactly.
void write_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::string& path);

std::vector<StepRecord> deploy_policy(const GaussianPolicy& policy,
                                      const EpisodeConfig& cfg,
                                      std::uint64_t seed, bool deterministic,
                                      TriMesh* final_mesh = nullptr);

}  // namespace am2r

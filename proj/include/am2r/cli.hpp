#pragma once

#include "am2r/config.hpp"
#include "am2r/env.hpp"
#include "am2r/ppo.hpp"

namespace am2r {

EpisodeConfig episode_from_config(const Config& cfg);
TrainerConfig trainer_from_config(const Config& cfg);
std::vector<double> parse_list(const std::string& csv);

int cmd_sweep(Config cfg, const std::string& out_dir);
int cmd_train(Config cfg, const std::string& out_dir);
int cmd_deploy(Config cfg, const std::string& out_dir);
int cmd_compare(Config cfg, const std::string& out_dir);
int cmd_plot(Config cfg, const std::string& out_dir);

int run_cli(int argc, const char* const* argv);

}  // namespace am2r

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sadq/agent/agent.hpp"
#include "sadq/env/registry.hpp"
#include "sadq/train/replay_buffer.hpp"

namespace sadq {

enum class TargetUpdateUnit { kEnvSteps, kGradSteps };

/// Everything a training run needs. Field names match the keys of the
/// plain-text run file (sections [env], [env.ocloud], [q], [model], [agent],
/// [schedule]).
struct TrainConfig {
  EnvConfig env;

  // [q]
  double gamma = 0.99;
  std::vector<std::size_t> q_hidden{128, 128, 64};
  std::size_t q_batch = 64;
  double q_lr = 1e-3;
  std::size_t q_updates_per_collect = 1;
  std::uint64_t target_update_interval = 8000;
  TargetUpdateUnit target_update_unit = TargetUpdateUnit::kEnvSteps;
  QLoss q_loss = QLoss::kMse;
  bool dueling_mean_subtract = true;

  // [model]
  std::vector<std::size_t> model_hidden{256, 256};
  std::size_t model_batch = 128;
  double model_lr = 4e-5;
  std::size_t model_updates_per_collect = 1;  // k
  double state_norm = 1.0;
  ModelLoss model_loss = ModelLoss::kSampleMse;
  double logvar_min = -10.0;
  double logvar_max = 4.0;
  // Ignore the model while its running mean loss is at or above this; 0 disables.
  double gate_loss = 0.0;

  // [agent]
  AgentVariant variant = AgentVariant::kSadq;
  double alpha = 0.7;
  double beta = 0.5;
  std::size_t atoms = 32;
  double kappa = 1.0;
  DistTargetMode dist_target = DistTargetMode::kBlend;

  // [schedule]
  std::uint64_t total_steps = 160000;
  std::size_t buffer_size = 100000;
  std::size_t replay_frequency = 80;
  double eps_start = 0.95;
  double eps_end = 0.1;
  std::uint64_t eps_decay = 10000;
  std::uint64_t eval_interval = 2000;
  std::size_t eval_episodes = 20;
  std::size_t learning_starts = 0;  // 0: max(q batch, model batch)
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t checkpoint_interval = 0;  // env steps; 0 disables periodic checkpoints
  bool log_wall_clock = false;
  bool log_model_loss = true;

  /// ConfigInvalid naming the first offending field.
  void validate() const;
  std::size_t effective_learning_starts() const;
  EpsilonSchedule epsilon() const { return {eps_start, eps_end, eps_decay}; }
  AgentConfig agent_config(const EnvSpec& spec) const;
};

/// Parses run-file text. Unknown sections or keys and malformed values raise
/// ConfigInvalid naming "section.key". Missing keys keep their defaults.
TrainConfig parse_config(const std::string& text, const TrainConfig& base = {});
TrainConfig load_config(const std::string& path, const TrainConfig& base = {});
/// Applies one "section.key=value" override (section may itself contain a
/// dot, e.g. env.ocloud.w1=0.2).
void apply_override(TrainConfig& config, const std::string& assignment);
/// Canonical run-file text; parse_config(to_ini(c)) reproduces c exactly.
std::string to_ini(const TrainConfig& config);

/// Hyperparameter rows for the bundled tasks: "cartpole", "acrobot",
/// "bitflip", "ocloud". ConfigInvalid for other names.
TrainConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace sadq

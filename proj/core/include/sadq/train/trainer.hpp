#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "sadq/agent/agent.hpp"
#include "sadq/common/rng.hpp"
#include "sadq/diag/metrics.hpp"
#include "sadq/env/environment.hpp"
#include "sadq/train/config.hpp"
#include "sadq/train/replay_buffer.hpp"

namespace sadq {

/// Independent random streams derived from one run seed.
enum class Stream : std::uint64_t {
  kEnv = 1,
  kExplore = 2,
  kQSample = 3,
  kModelSample = 4,
  kModelNoise = 5,
  kEval = 6,
  kInitQ = 7,
  kInitModel = 8,
  kSuccessor = 9,
};

std::uint64_t stream_seed(std::uint64_t seed, Stream s);

struct EvalResult {
  double return_mean = 0.0;
  double return_std = 0.0;
  double success_rate = 0.0;
  double q_discrepancy = 0.0;  // mean of max_a Q - min_a Q over visited states
  std::size_t episodes = 0;
};

/// Greedy episodes (epsilon = 0, beta active) on a fresh environment. Never
/// touches a replay buffer.
EvalResult evaluate(const Agent& agent, const EnvConfig& env, std::size_t episodes, std::uint64_t seed);

/// Collect / train loop: blocks of replay_frequency environment steps, each
/// followed by k model updates and updates_per_collect Q updates once the
/// buffer holds learning_starts transitions.
class Trainer {
 public:
  /// out_dir receives config.ini, metrics.csv, model_loss.csv and
  /// checkpoint.bin. An empty out_dir disables all file output.
  Trainer(TrainConfig config, std::uint64_t seed, std::string out_dir);

  /// Restores a run saved by checkpoint(); continues writing into out_dir.
  static std::unique_ptr<Trainer> resume(const std::string& checkpoint_path, std::string out_dir);

  /// Runs until total_steps environment steps, or until stop_at env steps
  /// (then writes a checkpoint and returns). Returns true when training is
  /// complete.
  bool run(std::optional<std::uint64_t> stop_at = std::nullopt);

  std::string checkpoint_bytes() const;
  void checkpoint(const std::string& path) const;

  const TrainConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const Agent& agent() const { return *agent_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::uint64_t env_steps() const { return env_steps_; }
  std::uint64_t grad_steps() const { return grad_steps_; }
  std::uint64_t model_steps() const { return model_steps_; }
  std::uint64_t target_syncs() const { return target_syncs_; }
  const std::vector<MetricsRow>& rows() const { return rows_; }
  const std::vector<double>& model_losses() const { return model_losses_; }

  /// Called after every Q gradient step.
  std::function<void(const Trainer&)> on_grad_step;

 private:
  struct Restore {};
  Trainer(Restore, TrainConfig config, std::uint64_t seed, std::string out_dir);

  void collect_step();
  void train_block();
  void maybe_sync(TargetUpdateUnit unit, std::uint64_t count);
  void evaluate_and_log();
  void log_model_loss(double loss);
  void apply_model_gate();
  void dump_failure(const std::string& what) const;
  void open_logs(bool append);
  std::string path(const char* name) const;

  TrainConfig config_;
  std::uint64_t seed_;
  std::string out_dir_;
  std::unique_ptr<Environment> env_;
  std::unique_ptr<Agent> agent_;
  ReplayBuffer buffer_;

  Rng explore_rng_;
  Rng q_sample_rng_;
  Rng model_sample_rng_;
  Rng model_noise_rng_;
  Rng successor_rng_;

  std::uint64_t env_steps_ = 0;
  std::uint64_t grad_steps_ = 0;
  std::uint64_t model_steps_ = 0;
  std::uint64_t episodes_ = 0;
  std::uint64_t target_syncs_ = 0;
  Observation obs_;

  // Accumulated since the last metrics row.
  double q_loss_sum_ = 0.0;
  double target_var_sum_ = 0.0;
  std::uint64_t q_updates_ = 0;
  double model_loss_sum_ = 0.0;
  std::uint64_t model_updates_ = 0;

  // Exponential mean of the model loss (weight 0.01 on each new value).
  double model_loss_ema_ = 0.0;

  std::vector<MetricsRow> rows_;
  std::vector<double> model_losses_;
  std::unique_ptr<MetricsWriter> metrics_;
  std::unique_ptr<std::ofstream> model_log_;
  double start_time_ = 0.0;
};

}  // namespace sadq

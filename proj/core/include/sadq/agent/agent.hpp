#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sadq/agent/targets.hpp"
#include "sadq/common/bytes.hpp"
#include "sadq/common/rng.hpp"
#include "sadq/model/dynamics_model.hpp"
#include "sadq/nn/adam.hpp"
#include "sadq/nn/networks.hpp"

namespace sadq {

enum class AgentVariant { kDqn, kDueling, kSadq, kSadqDist, kQrDqn };

std::string to_string(AgentVariant v);
/// "dqn", "dueling", "sadq", "sadq-dist", "qr-dqn"; ConfigInvalid otherwise.
AgentVariant parse_variant(const std::string& name);

enum class DistTargetMode { kBlend, kMixture };
enum class QLoss { kMse, kHuber };

struct AgentConfig {
  AgentVariant variant = AgentVariant::kSadq;
  std::size_t obs_dim = 1;
  std::size_t action_count = 2;
  std::vector<std::size_t> q_hidden{128, 128, 64};
  nn::AdamConfig q_adam{};
  bool dueling_mean_subtract = true;
  std::size_t atoms = 32;
  double kappa = 1.0;
  QLoss q_loss = QLoss::kMse;
  TargetMix mix{};
  DistTargetMode dist_mode = DistTargetMode::kBlend;
  DynModelConfig model{};
  nn::AdamConfig model_adam{};

  bool uses_model() const { return variant == AgentVariant::kSadq || variant == AgentVariant::kSadqDist; }
  bool distributional() const { return variant == AgentVariant::kSadqDist || variant == AgentVariant::kQrDqn; }
  void validate() const;
};

/// Column-stacked minibatch of transitions.
struct Batch {
  nn::Matrix s;
  std::vector<std::size_t> a;
  std::vector<double> r;
  nn::Matrix s_next;
  std::vector<std::uint8_t> done;

  std::size_t size() const { return a.size(); }
};

struct QUpdateStats {
  double loss = 0.0;
  double target_mean = 0.0;
  double target_variance = 0.0;  // population variance of the batch targets
};

/// Online and target Q networks plus, for the model-based variants, the
/// successor model, each with its own Adam state.
class Agent {
 public:
  /// q_init seeds the Q network (the target starts as a copy); model_init
  /// seeds the successor model. Keeping the streams apart makes a model-based
  /// agent's Q parameters independent of whether a model exists.
  Agent(AgentConfig config, Rng& q_init, Rng& model_init);

  const AgentConfig& config() const { return config_; }
  const nn::QNetwork& q_net() const { return *net_; }
  const nn::ParamSet& online_params() const { return online_; }
  const nn::ParamSet& target_params() const { return target_; }
  nn::ParamSet& online_params() { return online_; }
  nn::ParamSet& target_params() { return target_; }
  /// nullptr for variants without a model.
  const DynModel* model() const { return model_.get(); }
  DynModel* model() { return model_.get(); }

  /// Expected action values of the online network.
  std::vector<double> q_values(const Observation& s) const;
  /// Online state value of the model's sampled successor for every action.
  std::vector<double> successor_values(const Observation& s, Rng& successor_rng) const;
  /// Greedy action; model-based variants add beta times the successor value.
  ActionId greedy_action(const Observation& s, Rng& successor_rng) const;

  /// Scalar bootstrap targets for a batch (non-distributional variants).
  std::vector<double> scalar_targets(const Batch& batch, Rng& successor_rng) const;
  /// Target atoms, batch x N (distributional variants).
  nn::Matrix dist_targets(const Batch& batch, Rng& successor_rng) const;

  /// Differentiable Q loss of the online network against fixed targets.
  nn::Var q_loss(nn::Tape& tape, const Batch& batch, const nn::Matrix& targets) const;

  QUpdateStats update_q(const Batch& batch, Rng& successor_rng);
  /// One model gradient step; returns the loss before the step.
  double update_model(const Batch& batch, Rng& noise_rng);
  void sync_target();

  /// An untrusted model is ignored: targets use alpha = 1 and acting uses
  /// beta = 0. Always trusted unless the trainer's loss gate says otherwise.
  void set_model_trusted(bool trusted) { model_trusted_ = trusted; }
  bool model_trusted() const { return model_trusted_; }

  void save(ByteWriter& out) const;
  void load(ByteReader& in);

 private:
  AgentConfig config_;
  nn::ParamSet online_;
  nn::ParamSet target_;
  std::unique_ptr<nn::QNetwork> net_;
  nn::AdamState q_opt_;
  std::unique_ptr<DynModel> model_;
  std::optional<nn::AdamState> model_opt_;
  bool model_trusted_ = true;
};

nn::Matrix observation_row(const Observation& s);

}  // namespace sadq

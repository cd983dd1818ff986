#pragma once

#include <span>
#include <vector>

#include "sadq/common/rng.hpp"
#include "sadq/env/environment.hpp"
#include "sadq/nn/mlp.hpp"

namespace sadq {

enum class ModelLoss {
  kSampleMse,      // MSE between the reparameterised sample and the true successor
  kGaussianNll,    // diagonal Gaussian negative log-likelihood (study option)
};

struct DynModelConfig {
  std::size_t obs_dim = 1;
  std::size_t action_count = 2;
  std::vector<std::size_t> hidden{256, 256};
  double state_norm = 1.0;
  double logvar_min = -10.0;
  double logvar_max = 4.0;
  ModelLoss loss = ModelLoss::kSampleMse;
};

/// Gaussian one-step successor model. Two MLPs read the normalised state
/// concatenated with a one-hot action: one emits the mean, the other the
/// log-variance (clamped to [logvar_min, logvar_max]) of the normalised next
/// state.
class DynModel {
 public:
  struct Distribution {
    nn::Matrix mean;  // B x obs_dim, normalised units
    nn::Matrix var;   // B x obs_dim, strictly positive
  };

  DynModel(DynModelConfig config, Rng& init_rng);

  const DynModelConfig& config() const { return config_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }
  const nn::Mlp& mean_net() const { return mu_; }
  const nn::Mlp& logvar_net() const { return sigma_; }

  /// Network input rows: [s / state_norm, onehot(a)].
  nn::Matrix encode(const nn::Matrix& states, std::span<const std::size_t> actions) const;

  Distribution predict_distribution(const nn::Matrix& states, std::span<const std::size_t> actions) const;
  Distribution predict_distribution(const Observation& s, ActionId a) const;

  /// mean + sqrt(var) * noise, elementwise (normalised units).
  static nn::Matrix sample_successor(const Distribution& dist, const nn::Matrix& noise);
  nn::Matrix sample_successor(const Observation& s, ActionId a, Rng& rng) const;

  /// One sampled successor per action for every state, in observation units.
  /// Row b * A + a holds the successor of (states.row(b), a). Noise is drawn
  /// from rng unless zero_noise is set.
  nn::Matrix predict_all_successors(const nn::Matrix& states, Rng& rng, bool zero_noise = false) const;
  /// Single-state convenience: A x obs_dim.
  nn::Matrix predict_all_successors(const Observation& s, Rng& rng, bool zero_noise = false) const;

  /// Training loss on the tape for a batch with explicit noise (B x obs_dim).
  /// Sample-MSE: mean over batch and components of
  /// (mean + sqrt(var) * noise - next / state_norm)^2.
  nn::Var loss(nn::Tape& tape, const nn::Matrix& states, std::span<const std::size_t> actions,
               const nn::Matrix& next_states, const nn::Matrix& noise) const;

  /// Loss value with one fresh standard-normal draw per transition component.
  double loss_value(const nn::Matrix& states, std::span<const std::size_t> actions, const nn::Matrix& next_states,
                    Rng& rng) const;

 private:
  DynModelConfig config_;
  nn::ParamSet params_;
  nn::Mlp mu_;
  nn::Mlp sigma_;
};

nn::Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace sadq

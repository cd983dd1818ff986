#pragma once

#include <cstdint>

#include "sadq/common/bytes.hpp"
#include "sadq/nn/param_set.hpp"

namespace sadq::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam moments for one ParamSet.
class AdamState {
 public:
  AdamState(const ParamSet& params, AdamConfig config);

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return steps_; }
  const Gradients& first_moment() const { return m_; }
  const Gradients& second_moment() const { return v_; }

  void save(ByteWriter& out) const;
  void load(ByteReader& in);

 private:
  friend void adam_step(ParamSet&, const Gradients&, AdamState&);

  AdamConfig config_;
  Gradients m_;
  Gradients v_;
  std::uint64_t steps_ = 0;
};

/// Bias-corrected Adam update of params in place.
void adam_step(ParamSet& params, const Gradients& grads, AdamState& state);

}  // namespace sadq::nn

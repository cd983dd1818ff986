#include "sadq/env/cartpole.hpp"

#include <cmath>

namespace sadq {

EnvSpec CartPole::spec() const {
  return {.obs_dim = 4, .action_count = 2, .max_steps = max_steps_, .reward_min = 0.0, .reward_max = 1.0};
}

Observation CartPole::do_reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  for (auto& v : state_) v = rng_.uniform(-0.05, 0.05);
  return {state_.begin(), state_.end()};
}

StepResult CartPole::do_step(ActionId action) {
  auto [x, x_dot, theta, theta_dot] = state_;
  const double force = action.index == 1 ? kForce : -kForce;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);

  const double temp = (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  x += kTau * x_dot;
  x_dot += kTau * x_acc;
  theta += kTau * theta_dot;
  theta_dot += kTau * theta_acc;
  state_ = {x, x_dot, theta, theta_dot};

  StepResult r;
  r.next_obs.assign(state_.begin(), state_.end());
  r.done = x < -kXLimit || x > kXLimit || theta < -kThetaLimit || theta > kThetaLimit;
  r.reward = 1.0;
  return r;
}

void CartPole::save_dynamic(ByteWriter& out) const {
  out.put_doubles(state_.data(), state_.size());
  out.put_string(rng_.state());
}

void CartPole::load_dynamic(ByteReader& in) {
  const auto v = in.get_doubles();
  if (v.size() != state_.size()) fail(ErrorKind::kCorruptChecksum, "cartpole state size");
  std::copy(v.begin(), v.end(), state_.begin());
  rng_.set_state(in.get_string());
}

}  // namespace sadq

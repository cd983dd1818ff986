#pragma once

#include <array>

#include "sadq/common/rng.hpp"
#include "sadq/env/environment.hpp"

namespace sadq {

/// Classic cart-pole balancing (Barto, Sutton & Anderson constants, explicit
/// Euler with tau = 0.02 s). Action 0 pushes left, action 1 pushes right.
/// Observation: (x, x_dot, theta, theta_dot).
class CartPole final : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kTotalMass = kCartMass + kPoleMass;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kPoleMassLength = kPoleMass * kHalfLength;
  static constexpr double kForce = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kThetaLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  static constexpr double kXLimit = 2.4;

  explicit CartPole(std::size_t max_steps = 200) : max_steps_(max_steps) {}

  std::string id() const override { return "cartpole"; }
  EnvSpec spec() const override;
  /// Survived to the horizon without the pole falling.
  bool episode_succeeded() const override { return episode_over() && !terminal_reached(); }

  /// Overrides the physical state of a running episode (tests only).
  void set_state(const std::array<double, 4>& state) { state_ = state; }
  const std::array<double, 4>& state() const { return state_; }

 protected:
  Observation do_reset(std::uint64_t seed) override;
  StepResult do_step(ActionId action) override;
  void save_dynamic(ByteWriter& out) const override;
  void load_dynamic(ByteReader& in) override;

 private:
  std::size_t max_steps_;
  std::array<double, 4> state_{};
  Rng rng_;
};

}  // namespace sadq

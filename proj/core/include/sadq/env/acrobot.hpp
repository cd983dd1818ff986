#pragma once

#include <array>

#include "sadq/common/rng.hpp"
#include "sadq/env/environment.hpp"

namespace sadq {

/// Two-link underactuated arm ("book" dynamics), RK4 with dt = 0.2 s.
/// Actions map to torques {-1, 0, +1} on the second joint. Observation:
/// (cos t1, sin t1, cos t2, sin t2, t1_dot, t2_dot). Reward -1 per step until
/// the tip rises one link length above the pivot.
class Acrobot final : public Environment {
 public:
  static constexpr double kDt = 0.2;
  static constexpr double kLink1Length = 1.0;
  static constexpr double kLink1Mass = 1.0;
  static constexpr double kLink2Mass = 1.0;
  static constexpr double kLink1Com = 0.5;
  static constexpr double kLink2Com = 0.5;
  static constexpr double kLinkInertia = 1.0;
  static constexpr double kGravity = 9.8;
  static constexpr double kMaxVel1 = 4.0 * 3.14159265358979323846;
  static constexpr double kMaxVel2 = 9.0 * 3.14159265358979323846;

  /// Raw state (theta1, theta2, dtheta1, dtheta2).
  using State = std::array<double, 4>;

  explicit Acrobot(std::size_t max_steps = 500) : max_steps_(max_steps) {}

  std::string id() const override { return "acrobot"; }
  EnvSpec spec() const override;

  const State& state() const { return state_; }
  void set_state(const State& s) { state_ = s; }

  /// Total mechanical energy of a raw state.
  static double energy(const State& s);
  /// One RK4 step of the continuous dynamics under constant torque.
  static State integrate(const State& s, double torque, double dt);

 protected:
  Observation do_reset(std::uint64_t seed) override;
  StepResult do_step(ActionId action) override;
  void save_dynamic(ByteWriter& out) const override;
  void load_dynamic(ByteReader& in) override;

 private:
  Observation observe() const;
  bool terminal() const;

  std::size_t max_steps_;
  State state_{};
  Rng rng_;
};

}  // namespace sadq

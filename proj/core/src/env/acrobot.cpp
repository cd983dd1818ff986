#include "sadq/env/acrobot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sadq {
namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double x) {
  const double period = 2.0 * kPi;
  while (x > kPi) x -= period;
  while (x < -kPi) x += period;
  return x;
}

// Time derivative of (t1, t2, dt1, dt2) under torque on the second joint.
Acrobot::State derivative(const Acrobot::State& s, double torque) {
  constexpr double m1 = Acrobot::kLink1Mass, m2 = Acrobot::kLink2Mass;
  constexpr double l1 = Acrobot::kLink1Length;
  constexpr double lc1 = Acrobot::kLink1Com, lc2 = Acrobot::kLink2Com;
  constexpr double i1 = Acrobot::kLinkInertia, i2 = Acrobot::kLinkInertia;
  constexpr double g = Acrobot::kGravity;
  const auto [t1, t2, dt1, dt2] = s;

  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(t2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(t1 + t2 - kPi / 2.0);
  const double phi1 = -m2 * l1 * lc2 * dt2 * dt2 * std::sin(t2) -
                      2.0 * m2 * l1 * lc2 * dt2 * dt1 * std::sin(t2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(t1 - kPi / 2.0) + phi2;
  const double ddt2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dt1 * dt1 * std::sin(t2) - phi2) /
                      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddt1 = -(d2 * ddt2 + phi1) / d1;
  return {dt1, dt2, ddt1, ddt2};
}

Acrobot::State axpy(const Acrobot::State& s, const Acrobot::State& k, double h) {
  return {s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3]};
}

}  // namespace

EnvSpec Acrobot::spec() const {
  return {.obs_dim = 6, .action_count = 3, .max_steps = max_steps_, .reward_min = -1.0, .reward_max = 0.0};
}

double Acrobot::energy(const State& s) {
  const auto [t1, t2, dt1, dt2] = s;
  const double d1 = kLink1Mass * kLink1Com * kLink1Com +
                    kLink2Mass * (kLink1Length * kLink1Length + kLink2Com * kLink2Com +
                                  2.0 * kLink1Length * kLink2Com * std::cos(t2)) +
                    2.0 * kLinkInertia;
  const double d2 = kLink2Mass * (kLink2Com * kLink2Com + kLink1Length * kLink2Com * std::cos(t2)) + kLinkInertia;
  const double d3 = kLink2Mass * kLink2Com * kLink2Com + kLinkInertia;
  const double kinetic = 0.5 * (d1 * dt1 * dt1 + 2.0 * d2 * dt1 * dt2 + d3 * dt2 * dt2);
  const double potential = -(kLink1Mass * kLink1Com + kLink2Mass * kLink1Length) * kGravity * std::cos(t1) -
                           kLink2Mass * kLink2Com * kGravity * std::cos(t1 + t2);
  return kinetic + potential;
}

Acrobot::State Acrobot::integrate(const State& s, double torque, double dt) {
  const State k1 = derivative(s, torque);
  const State k2 = derivative(axpy(s, k1, dt / 2.0), torque);
  const State k3 = derivative(axpy(s, k2, dt / 2.0), torque);
  const State k4 = derivative(axpy(s, k3, dt), torque);
  State out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

Observation Acrobot::observe() const {
  const auto [t1, t2, dt1, dt2] = state_;
  return {std::cos(t1), std::sin(t1), std::cos(t2), std::sin(t2), dt1, dt2};
}

bool Acrobot::terminal() const {
  return -std::cos(state_[0]) - std::cos(state_[1] + state_[0]) > 1.0;
}

Observation Acrobot::do_reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  for (auto& v : state_) v = rng_.uniform(-0.1, 0.1);
  return observe();
}

StepResult Acrobot::do_step(ActionId action) {
  const double torque = static_cast<double>(action.index) - 1.0;
  State next = integrate(state_, torque, kDt);
  next[0] = wrap(next[0]);
  next[1] = wrap(next[1]);
  next[2] = std::clamp(next[2], -kMaxVel1, kMaxVel1);
  next[3] = std::clamp(next[3], -kMaxVel2, kMaxVel2);
  state_ = next;

  StepResult r;
  r.done = terminal();
  r.reward = r.done ? 0.0 : -1.0;
  r.next_obs = observe();
  return r;
}

void Acrobot::save_dynamic(ByteWriter& out) const {
  out.put_doubles(state_.data(), state_.size());
  out.put_string(rng_.state());
}

void Acrobot::load_dynamic(ByteReader& in) {
  const auto v = in.get_doubles();
  if (v.size() != state_.size()) fail(ErrorKind::kCorruptChecksum, "acrobot state size");
  std::copy(v.begin(), v.end(), state_.begin());
  rng_.set_state(in.get_string());
}

}  // namespace sadq

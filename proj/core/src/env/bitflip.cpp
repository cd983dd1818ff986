#include "sadq/env/bitflip.hpp"

namespace sadq {

BitFlip::BitFlip(std::size_t n_bits) : n_bits_(n_bits), bits_(n_bits, 0), goal_(n_bits, 0) {
  if (n_bits < 2) fail(ErrorKind::kConfigInvalid, "bitflip: n_bits must be >= 2");
}

EnvSpec BitFlip::spec() const {
  return {.obs_dim = 2 * n_bits_, .action_count = n_bits_, .max_steps = n_bits_, .reward_min = -1.0, .reward_max = 0.0};
}

std::size_t BitFlip::hamming_distance() const {
  std::size_t d = 0;
  for (std::size_t i = 0; i < n_bits_; ++i) d += bits_[i] != goal_[i];
  return d;
}

Observation BitFlip::observe() const {
  Observation obs;
  obs.reserve(2 * n_bits_);
  for (int b : bits_) obs.push_back(b);
  for (int b : goal_) obs.push_back(b);
  return obs;
}

Observation BitFlip::do_reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  for (auto& b : bits_) b = static_cast<int>(rng_.index(2));
  do {
    for (auto& b : goal_) b = static_cast<int>(rng_.index(2));
  } while (goal_ == bits_);
  return observe();
}

StepResult BitFlip::do_step(ActionId action) {
  bits_[action.index] ^= 1;
  StepResult r;
  r.done = bits_ == goal_;
  r.reward = r.done ? 0.0 : -1.0;
  r.next_obs = observe();
  return r;
}

void BitFlip::save_dynamic(ByteWriter& out) const {
  std::vector<double> v;
  for (int b : bits_) v.push_back(b);
  for (int b : goal_) v.push_back(b);
  out.put_doubles(v);
  out.put_string(rng_.state());
}

void BitFlip::load_dynamic(ByteReader& in) {
  const auto v = in.get_doubles();
  if (v.size() != 2 * n_bits_) fail(ErrorKind::kCorruptChecksum, "bitflip state size");
  for (std::size_t i = 0; i < n_bits_; ++i) {
    bits_[i] = static_cast<int>(v[i]);
    goal_[i] = static_cast<int>(v[n_bits_ + i]);
  }
  rng_.set_state(in.get_string());
}

}  // namespace sadq

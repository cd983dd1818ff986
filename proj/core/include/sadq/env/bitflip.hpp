#pragma once

#include <vector>

#include "sadq/common/rng.hpp"
#include "sadq/env/environment.hpp"

namespace sadq {

/// Goal-conditioned bit flipping: observation is current bits followed by goal
/// bits, action i flips bit i. Reward -1 per step, 0 and terminal on reaching
/// the goal; horizon n steps.
class BitFlip final : public Environment {
 public:
  explicit BitFlip(std::size_t n_bits = 8);

  std::string id() const override { return "bitflip"; }
  EnvSpec spec() const override;

  const std::vector<int>& bits() const { return bits_; }
  const std::vector<int>& goal() const { return goal_; }
  std::size_t hamming_distance() const;

 protected:
  Observation do_reset(std::uint64_t seed) override;
  StepResult do_step(ActionId action) override;
  void save_dynamic(ByteWriter& out) const override;
  void load_dynamic(ByteReader& in) override;

 private:
  Observation observe() const;

  std::size_t n_bits_;
  std::vector<int> bits_;
  std::vector<int> goal_;
  Rng rng_;
};

}  // namespace sadq

#pragma once

#include <cstdint>
#include <vector>

#include "sadq/agent/agent.hpp"
#include "sadq/common/bytes.hpp"
#include "sadq/common/rng.hpp"
#include "sadq/env/environment.hpp"

namespace sadq {

struct Transition {
  Observation s;
  ActionId a;
  double r = 0.0;
  Observation s_next;
  bool done = false;
  bool truncated = false;
};

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t obs_dim);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return size_; }
  std::size_t obs_dim() const { return obs_dim_; }

  /// ShapeMismatch on wrong observation width; ConfigInvalid on non-finite data.
  void push(const Transition& t);
  /// Stored entry in insertion order (0 = oldest).
  Transition at(std::size_t i) const;

  /// n uniform draws with replacement. EmptyBuffer when nothing is stored.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;
  Batch sample(std::size_t n, Rng& rng) const;
  Batch gather(const std::vector<std::size_t>& indices) const;

  void save(ByteWriter& out) const;
  void load(ByteReader& in);

 private:
  std::size_t slot(std::size_t i) const { return (cursor_ + capacity_ - size_ + i) % capacity_; }

  std::size_t capacity_;
  std::size_t obs_dim_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;  // next write slot
  std::vector<double> s_;
  std::vector<double> s_next_;
  std::vector<std::size_t> a_;
  std::vector<double> r_;
  std::vector<std::uint8_t> done_;
  std::vector<std::uint8_t> truncated_;
};

/// Linear interpolation from start to end over decay_steps, then constant.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::uint64_t decay_steps = 1;

  double at(std::uint64_t step) const;
  void validate() const;
};

}  // namespace sadq

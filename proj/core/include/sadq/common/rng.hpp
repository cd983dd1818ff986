#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace sadq {

/// splitmix64 finalizer; used to derive independent stream seeds from one
/// run seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded random stream. Only the raw mt19937_64 engine (whose output is fixed
/// by the standard) is used; all derived draws are computed here so results do
/// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased (rejection sampling). n must be > 0.
  std::uint64_t index(std::uint64_t n);

  /// Standard normal (Box-Muller, one draw per call, no cached state).
  double normal();

  /// Exponential with the given mean.
  double exponential(double mean);

  std::string state() const;
  void set_state(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sadq

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace sadq::testing {

/// Plays a synthetic episode of `steps` tasks with a random placement policy
/// against an independent replay of the placement rules and compares clock,
/// per-server occupancy, queues, penalties, latency, reward and task
/// conservation after every step. Returns an empty string on agreement, else
/// the first mismatch.
std::string ocloud_replay_mismatch(std::size_t server_count, std::uint64_t seed, std::size_t steps = 1000);

}  // namespace sadq::testing

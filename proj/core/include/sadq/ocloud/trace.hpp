#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace sadq {

/// One user request. Demands are fractions of a single server's capacity and
/// are kept on a 1e-6 grid so per-server accounting is exact.
struct TaskRequest {
  double c_req = 0.0;
  double r_req = 0.0;
  std::int64_t t_occ = 1;
  std::int64_t t_arr = 0;
};

inline constexpr std::int64_t kDemandScale = 1'000'000;

/// Demand expressed in millionths of a server (the exact accounting unit).
std::int64_t demand_units(double fraction);

/// Reads a comma-separated task table with header row and columns
/// arrival_time, duration, cpu_demand, ram_demand. Rows are returned stably
/// sorted by arrival time; demands above 1 are clamped to 1, non-positive
/// demands or durations are rejected with the offending line number.
std::vector<TaskRequest> trace_load(const std::filesystem::path& path);

/// Deterministic synthetic workload: exponential inter-arrival times with the
/// given mean (floored to integer steps), demands in (0.05, 0.5], occupation
/// times uniform in 1..20.
std::vector<TaskRequest> trace_synthesize(std::uint64_t seed, std::size_t count,
                                          double mean_interarrival = 0.4);

}  // namespace sadq

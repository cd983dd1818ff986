#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "sadq/common/rng.hpp"
#include "sadq/env/environment.hpp"
#include "sadq/ocloud/trace.hpp"

namespace sadq {

struct OCloudConfig {
  std::size_t server_count = 10;
  double w1 = 0.1;
  double w2 = 0.005;
  double p0 = 100.0;  // idle power, watts
  double p1 = 200.0;  // peak power, watts
  std::size_t warmup_tasks = 1000;
  std::size_t episode_tasks = 200;
  double state_norm = 50.0;
  double mean_interarrival = 0.4;
  std::string trace_path;  // empty: synthetic workload

  void validate() const;
};

struct RunningTask {
  TaskRequest task;
  std::int64_t remaining = 0;
};

/// Per-server load. The integer unit counters are authoritative; the double
/// fields are views of them.
struct ServerState {
  double u_cpu = 0.0;
  double u_ram = 0.0;
  std::size_t l_queue = 0;
  double p_queue = 0.0;
  std::vector<RunningTask> running;
  std::deque<TaskRequest> queue;

  std::int64_t cpu_units = 0;
  std::int64_t ram_units = 0;
  std::int64_t penalty_units = 0;  // sum over queue of (c + r) * t_occ in demand units

  bool fits(const TaskRequest& t) const;
  /// Queue penalty recomputed from the queue contents.
  double recompute_p_queue() const;
};

/// Sum over servers of p0 + (p1 - p0) * (2u - u^1.4) / p1.
double ocloud_power(std::span<const ServerState> servers, double p0, double p1);
double ocloud_power(std::span<const double> u_cpu, double p0, double p1);

/// -(w1 * power + w2 * latency_delta).
double ocloud_reward(double power, double latency_delta, double w1, double w2);

/// Task placement over a cluster of servers. Each step places the pending
/// request on the chosen server, then advances the clock to the next arrival
/// (releasing finished tasks and starting queued ones FIFO per server).
class OCloud final : public Environment {
 public:
  explicit OCloud(OCloudConfig config);

  std::string id() const override { return "ocloud"; }
  EnvSpec spec() const override;
  bool episode_succeeded() const override { return false; }

  const OCloudConfig& config() const { return config_; }
  std::span<const ServerState> servers() const { return servers_; }
  std::int64_t now() const { return now_; }
  /// Cumulative latency measure at the current time: waits of started tasks
  /// plus elapsed waiting time of tasks still queued.
  double latency_measure() const;
  /// Latency measure delta over the most recent step.
  double last_latency_reward() const { return last_latency_delta_; }
  double last_power() const { return last_power_; }
  /// The request awaiting placement, if any.
  const TaskRequest* pending() const;

  /// Scaled observation of the current simulator state.
  Observation observe() const;

  /// Replaces the workload used by subsequent resets (tests and replays).
  void set_workload(std::vector<TaskRequest> tasks);

 protected:
  Observation do_reset(std::uint64_t seed) override;
  StepResult do_step(ActionId action) override;
  void save_dynamic(ByteWriter& out) const override;
  void load_dynamic(ByteReader& in) override;

 private:
  void assign(std::size_t server, const TaskRequest& task);
  void advance_to(std::int64_t time);
  void tick();
  void refresh(ServerState& s) const;
  std::size_t least_loaded() const;

  OCloudConfig config_;
  std::vector<TaskRequest> trace_;      // loaded file trace, if any
  std::vector<TaskRequest> fixed_;      // workload set by set_workload
  std::vector<TaskRequest> workload_;   // current episode's tasks (warm-up first)
  std::size_t cursor_ = 0;              // index of the pending request
  std::vector<ServerState> servers_;
  std::int64_t now_ = 0;
  std::int64_t started_wait_sum_ = 0;
  double last_latency_delta_ = 0.0;
  double last_power_ = 0.0;
};

}  // namespace sadq

#include "ocloud_oracle.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <vector>

#include "sadq/common/rng.hpp"
#include "sadq/ocloud/ocloud.hpp"

namespace sadq::testing {
namespace {

// Independent replay of the placement rules: a task starts when its server's
// queue is empty and it fits, else it joins the FIFO queue; each clock tick
// releases finished tasks, then starts queued tasks in order while they fit.
class ReplayOracle {
 public:
  explicit ReplayOracle(std::size_t servers) : servers_(servers) {}

  void place(std::size_t m, const TaskRequest& t) {
    auto& s = servers_[m];
    ++placed_;
    if (s.queue.empty() && fits(s, t)) {
      start(s, t);
    } else {
      s.queue.push_back(t);
    }
  }

  void advance_to(std::int64_t time) {
    while (now_ < time) tick();
  }

  void tick() {
    ++now_;
    for (auto& s : servers_) {
      std::vector<Job> still;
      for (auto job : s.running) {
        if (--job.left > 0) {
          still.push_back(job);
        } else {
          ++completed_;
        }
      }
      s.running = still;
      while (!s.queue.empty() && fits(s, s.queue.front())) {
        start(s, s.queue.front());
        s.queue.pop_front();
      }
    }
  }

  double latency() const {
    std::int64_t total = waited_;
    for (const auto& s : servers_) {
      for (const auto& t : s.queue) total += now_ - t.t_arr;
    }
    return static_cast<double>(total);
  }

  struct Job {
    TaskRequest t;
    std::int64_t left;
  };
  struct Server {
    std::vector<Job> running;
    std::deque<TaskRequest> queue;
  };

  static std::int64_t used_cpu(const Server& s) {
    std::int64_t u = 0;
    for (const auto& j : s.running) u += demand_units(j.t.c_req);
    return u;
  }
  static std::int64_t used_ram(const Server& s) {
    std::int64_t u = 0;
    for (const auto& j : s.running) u += demand_units(j.t.r_req);
    return u;
  }
  static double penalty(const Server& s) {
    double p = 0.0;
    for (const auto& t : s.queue) p += (t.c_req + t.r_req) * static_cast<double>(t.t_occ);
    return p;
  }

  const std::vector<Server>& servers() const { return servers_; }
  std::int64_t now() const { return now_; }
  std::size_t placed() const { return placed_; }
  std::size_t completed() const { return completed_; }

 private:
  static bool fits(const Server& s, const TaskRequest& t) {
    return used_cpu(s) + demand_units(t.c_req) <= kDemandScale && used_ram(s) + demand_units(t.r_req) <= kDemandScale;
  }
  void start(Server& s, const TaskRequest& t) {
    s.running.push_back({t, t.t_occ});
    waited_ += now_ - t.t_arr;
  }

  std::vector<Server> servers_;
  std::int64_t now_ = 0;
  std::int64_t waited_ = 0;
  std::size_t placed_ = 0;
  std::size_t completed_ = 0;
};

}  // namespace

std::string ocloud_replay_mismatch(std::size_t server_count, std::uint64_t seed, std::size_t steps) {
  OCloudConfig c;
  c.server_count = server_count;
  c.warmup_tasks = 0;
  c.episode_tasks = steps;
  c.state_norm = 1.0;
  OCloud env(c);
  auto workload = trace_synthesize(seed, steps, 0.4);
  env.set_workload(workload);
  env.reset(0);
  ReplayOracle oracle(server_count);
  Rng policy(seed + 100);
  std::ostringstream err;
  const auto mismatch = [&](std::size_t i, const char* what) {
    err << "step " << i << ": " << what;
    return err.str();
  };
  for (std::size_t i = 0; i < steps; ++i) {
    const auto m = policy.index(server_count);
    const double before = oracle.latency();
    oracle.place(m, workload[i]);
    if (i + 1 < steps) {
      oracle.advance_to(workload[i + 1].t_arr);
    } else {
      oracle.tick();
    }
    const auto r = env.step(ActionId(m));
    if (env.now() != oracle.now()) return mismatch(i, "clock");
    if (env.last_latency_reward() != oracle.latency() - before) return mismatch(i, "latency");
    std::size_t live = 0;
    std::vector<double> u;
    for (std::size_t k = 0; k < server_count; ++k) {
      const auto& s = env.servers()[k];
      const auto& o = oracle.servers()[k];
      if (s.running.size() != o.running.size()) return mismatch(i, "running count");
      if (s.l_queue != o.queue.size()) return mismatch(i, "queue length");
      if (s.cpu_units != ReplayOracle::used_cpu(o) || s.ram_units != ReplayOracle::used_ram(o)) {
        return mismatch(i, "resource units");
      }
      if (s.cpu_units > kDemandScale || s.ram_units > kDemandScale) return mismatch(i, "capacity exceeded");
      if (std::abs(s.u_cpu - static_cast<double>(ReplayOracle::used_cpu(o)) / kDemandScale) > 1e-12) {
        return mismatch(i, "u_cpu");
      }
      if (std::abs(s.p_queue - ReplayOracle::penalty(o)) > 1e-9) return mismatch(i, "queue penalty");
      live += s.running.size() + s.queue.size();
      u.push_back(s.u_cpu);
    }
    // Every placed task is running, queued or finished.
    if (live + oracle.completed() != oracle.placed()) return mismatch(i, "task conservation");
    const double expect = ocloud_reward(ocloud_power(u, c.p0, c.p1), oracle.latency() - before, c.w1, c.w2);
    if (std::abs(r.reward - expect) > 1e-9) return mismatch(i, "reward");
  }
  return "";
}

}  // namespace sadq::testing

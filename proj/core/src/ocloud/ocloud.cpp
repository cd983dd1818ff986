#include "sadq/ocloud/ocloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sadq/common/error.hpp"

namespace sadq {
namespace {

void put_task(ByteWriter& out, const TaskRequest& t) {
  out.put(t.c_req);
  out.put(t.r_req);
  out.put(t.t_occ);
  out.put(t.t_arr);
}

TaskRequest get_task(ByteReader& in) {
  TaskRequest t;
  t.c_req = in.get<double>();
  t.r_req = in.get<double>();
  t.t_occ = in.get<std::int64_t>();
  t.t_arr = in.get<std::int64_t>();
  return t;
}

std::int64_t penalty_of(const TaskRequest& t) {
  return (demand_units(t.c_req) + demand_units(t.r_req)) * t.t_occ;
}

}  // namespace

void OCloudConfig::validate() const {
  if (server_count < 1) fail(ErrorKind::kConfigInvalid, "env.ocloud.server_count must be >= 1");
  if (!(p0 > 0.0) || !(p1 > p0)) fail(ErrorKind::kConfigInvalid, "env.ocloud requires p1 > p0 > 0");
  if (w1 < 0.0 || w2 < 0.0) fail(ErrorKind::kConfigInvalid, "env.ocloud weights must be >= 0");
  if (episode_tasks < 1) fail(ErrorKind::kConfigInvalid, "env.ocloud.episode_tasks must be >= 1");
  if (!(state_norm > 0.0)) fail(ErrorKind::kConfigInvalid, "env.ocloud.state_norm must be > 0");
  if (!(mean_interarrival > 0.0)) fail(ErrorKind::kConfigInvalid, "env.ocloud.mean_interarrival must be > 0");
}

bool ServerState::fits(const TaskRequest& t) const {
  return cpu_units + demand_units(t.c_req) <= kDemandScale && ram_units + demand_units(t.r_req) <= kDemandScale;
}

double ServerState::recompute_p_queue() const {
  std::int64_t units = 0;
  for (const auto& t : queue) units += penalty_of(t);
  return static_cast<double>(units) / kDemandScale;
}

double ocloud_power(std::span<const double> u_cpu, double p0, double p1) {
  double total = 0.0;
  for (double u : u_cpu) total += p0 + (p1 - p0) * (2.0 * u - std::pow(u, 1.4)) / p1;
  return total;
}

double ocloud_power(std::span<const ServerState> servers, double p0, double p1) {
  std::vector<double> u;
  u.reserve(servers.size());
  for (const auto& s : servers) u.push_back(s.u_cpu);
  return ocloud_power(std::span<const double>(u), p0, p1);
}

double ocloud_reward(double power, double latency_delta, double w1, double w2) {
  return -(w1 * power + w2 * latency_delta);
}

OCloud::OCloud(OCloudConfig config) : config_(std::move(config)) {
  config_.validate();
  if (!config_.trace_path.empty()) {
    trace_ = trace_load(config_.trace_path);
    if (trace_.size() < config_.warmup_tasks + config_.episode_tasks) {
      fail(ErrorKind::kEmptyTrace, "trace shorter than warm-up plus episode length");
    }
  }
  servers_.resize(config_.server_count);
}

EnvSpec OCloud::spec() const {
  const double m = static_cast<double>(config_.server_count);
  // Power lies in [m * p0, m * (p0 + (p1 - p0) / p1)]; latency deltas are
  // unbounded above, so the lower bound is nominal.
  return {.obs_dim = 3 + 4 * config_.server_count,
          .action_count = config_.server_count,
          .max_steps = config_.episode_tasks,
          .reward_min = -std::numeric_limits<double>::infinity(),
          .reward_max = -config_.w1 * m * config_.p0};
}

void OCloud::set_workload(std::vector<TaskRequest> tasks) {
  if (tasks.size() < config_.warmup_tasks + 1) fail(ErrorKind::kEmptyTrace, "workload shorter than warm-up");
  fixed_ = std::move(tasks);
}

const TaskRequest* OCloud::pending() const {
  return cursor_ < workload_.size() ? &workload_[cursor_] : nullptr;
}

double OCloud::latency_measure() const {
  std::int64_t total = started_wait_sum_;
  for (const auto& s : servers_) {
    for (const auto& t : s.queue) total += now_ - t.t_arr;
  }
  return static_cast<double>(total);
}

void OCloud::refresh(ServerState& s) const {
  s.u_cpu = static_cast<double>(s.cpu_units) / kDemandScale;
  s.u_ram = static_cast<double>(s.ram_units) / kDemandScale;
  s.l_queue = s.queue.size();
  s.p_queue = static_cast<double>(s.penalty_units) / kDemandScale;
}

void OCloud::assign(std::size_t server, const TaskRequest& task) {
  auto& s = servers_[server];
  if (s.queue.empty() && s.fits(task)) {
    s.running.push_back({task, task.t_occ});
    s.cpu_units += demand_units(task.c_req);
    s.ram_units += demand_units(task.r_req);
    started_wait_sum_ += now_ - task.t_arr;
  } else {
    s.queue.push_back(task);
    s.penalty_units += penalty_of(task);
  }
  refresh(s);
}

void OCloud::tick() {
  ++now_;
  for (auto& s : servers_) {
    for (auto& r : s.running) --r.remaining;
    auto done = std::remove_if(s.running.begin(), s.running.end(), [&s](const RunningTask& r) {
      if (r.remaining > 0) return false;
      s.cpu_units -= demand_units(r.task.c_req);
      s.ram_units -= demand_units(r.task.r_req);
      return true;
    });
    s.running.erase(done, s.running.end());
    while (!s.queue.empty() && s.fits(s.queue.front())) {
      const TaskRequest t = s.queue.front();
      s.queue.pop_front();
      s.penalty_units -= penalty_of(t);
      s.running.push_back({t, t.t_occ});
      s.cpu_units += demand_units(t.c_req);
      s.ram_units += demand_units(t.r_req);
      started_wait_sum_ += now_ - t.t_arr;
    }
    refresh(s);
  }
}

void OCloud::advance_to(std::int64_t time) {
  while (now_ < time) tick();
}

std::size_t OCloud::least_loaded() const {
  std::size_t best = 0;
  for (std::size_t m = 1; m < servers_.size(); ++m) {
    const auto& a = servers_[m];
    const auto& b = servers_[best];
    const auto load_a = a.cpu_units + a.ram_units + a.penalty_units;
    const auto load_b = b.cpu_units + b.ram_units + b.penalty_units;
    if (load_a < load_b) best = m;
  }
  return best;
}

Observation OCloud::observe() const {
  Observation obs;
  obs.reserve(spec().obs_dim);
  if (const auto* t = pending()) {
    obs.push_back(t->c_req);
    obs.push_back(t->r_req);
    obs.push_back(static_cast<double>(t->t_occ));
  } else {
    obs.insert(obs.end(), 3, 0.0);
  }
  for (const auto& s : servers_) obs.push_back(s.u_cpu);
  for (const auto& s : servers_) obs.push_back(s.u_ram);
  for (const auto& s : servers_) obs.push_back(static_cast<double>(s.l_queue));
  for (const auto& s : servers_) obs.push_back(s.p_queue);
  for (auto& v : obs) v /= config_.state_norm;
  return obs;
}

Observation OCloud::do_reset(std::uint64_t seed) {
  const std::size_t needed = config_.warmup_tasks + config_.episode_tasks;
  Rng rng(seed);
  if (!fixed_.empty()) {
    workload_ = fixed_;
  } else if (!trace_.empty()) {
    const auto start = rng.index(trace_.size() - needed + 1);
    workload_.assign(trace_.begin() + static_cast<std::ptrdiff_t>(start),
                     trace_.begin() + static_cast<std::ptrdiff_t>(start + needed));
  } else {
    workload_ = trace_synthesize(rng.next_u64(), needed, config_.mean_interarrival);
  }
  const std::int64_t origin = workload_.front().t_arr;
  for (auto& t : workload_) t.t_arr -= origin;

  servers_.assign(config_.server_count, ServerState{});
  now_ = 0;
  started_wait_sum_ = 0;
  last_latency_delta_ = 0.0;
  last_power_ = 0.0;

  const std::size_t warmup = std::min(config_.warmup_tasks, workload_.size() - 1);
  for (cursor_ = 0; cursor_ < warmup; ++cursor_) {
    advance_to(workload_[cursor_].t_arr);
    assign(least_loaded(), workload_[cursor_]);
  }
  advance_to(workload_[cursor_].t_arr);
  return observe();
}

StepResult OCloud::do_step(ActionId action) {
  if (cursor_ >= workload_.size()) fail(ErrorKind::kStepAfterDone, "ocloud: workload exhausted");
  const double before = latency_measure();
  assign(action.index, workload_[cursor_]);
  ++cursor_;
  if (cursor_ < workload_.size()) {
    advance_to(workload_[cursor_].t_arr);
  } else {
    tick();
  }
  last_latency_delta_ = latency_measure() - before;
  last_power_ = ocloud_power(std::span<const ServerState>(servers_), config_.p0, config_.p1);

  StepResult r;
  r.reward = ocloud_reward(last_power_, last_latency_delta_, config_.w1, config_.w2);
  r.done = false;
  r.next_obs = observe();
  return r;
}

void OCloud::save_dynamic(ByteWriter& out) const {
  out.put<std::uint64_t>(workload_.size());
  for (const auto& t : workload_) put_task(out, t);
  out.put<std::uint64_t>(cursor_);
  out.put(now_);
  out.put(started_wait_sum_);
  out.put(last_latency_delta_);
  out.put(last_power_);
  out.put<std::uint64_t>(servers_.size());
  for (const auto& s : servers_) {
    out.put<std::uint64_t>(s.running.size());
    for (const auto& r : s.running) {
      put_task(out, r.task);
      out.put(r.remaining);
    }
    out.put<std::uint64_t>(s.queue.size());
    for (const auto& t : s.queue) put_task(out, t);
    out.put(s.cpu_units);
    out.put(s.ram_units);
    out.put(s.penalty_units);
  }
}

void OCloud::load_dynamic(ByteReader& in) {
  workload_.resize(in.get<std::uint64_t>());
  for (auto& t : workload_) t = get_task(in);
  cursor_ = in.get<std::uint64_t>();
  now_ = in.get<std::int64_t>();
  started_wait_sum_ = in.get<std::int64_t>();
  last_latency_delta_ = in.get<double>();
  last_power_ = in.get<double>();
  const auto n = in.get<std::uint64_t>();
  if (n != config_.server_count) fail(ErrorKind::kCorruptChecksum, "ocloud server count mismatch");
  servers_.assign(n, ServerState{});
  for (auto& s : servers_) {
    s.running.resize(in.get<std::uint64_t>());
    for (auto& r : s.running) {
      r.task = get_task(in);
      r.remaining = in.get<std::int64_t>();
    }
    const auto q = in.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < q; ++i) s.queue.push_back(get_task(in));
    s.cpu_units = in.get<std::int64_t>();
    s.ram_units = in.get<std::int64_t>();
    s.penalty_units = in.get<std::int64_t>();
    refresh(s);
  }
}

}  // namespace sadq

#include <gtest/gtest.h>

#include <cmath>

#include "expect_error.hpp"
#include "ocloud_oracle.hpp"
#include "sadq/ocloud/ocloud.hpp"
#include "temp_dir.hpp"

namespace sadq {
namespace {

using sadq::testing::TempDir;

OCloudConfig small_config(std::size_t servers, std::size_t episode) {
  OCloudConfig c;
  c.server_count = servers;
  c.warmup_tasks = 0;
  c.episode_tasks = episode;
  c.state_norm = 1.0;
  return c;
}

TaskRequest task(double c, double r, std::int64_t occ, std::int64_t arr) { return {c, r, occ, arr}; }

TEST(OCloudPower, IdleClusterDrawsIdlePower) {
  const std::vector<double> u(10, 0.0);
  EXPECT_NEAR(ocloud_power(u, 100, 200), 1000.0, 1e-9);
}

TEST(OCloudPower, FullyLoadedServer) {
  const std::vector<double> u{1.0};
  EXPECT_NEAR(ocloud_power(u, 100, 200), 100.5, 1e-9);
}

TEST(OCloudPower, HalfLoadedServer) {
  const std::vector<double> u{0.5};
  // 0.5^1.4 = exp(1.4 ln 0.5) = 0.3789291416; (2u - u^1.4) = 0.6210708584.
  const double expected = 100.0 + 100.0 * (1.0 - std::exp(1.4 * std::log(0.5))) / 200.0;
  EXPECT_NEAR(ocloud_power(u, 100, 200), expected, 1e-9);
  EXPECT_NEAR(ocloud_power(u, 100, 200), 100.3105354292, 1e-9);
}

TEST(OCloudPower, ServerStateOverloadAgrees) {
  std::vector<ServerState> servers(3);
  servers[0].u_cpu = 0.25;
  servers[1].u_cpu = 0.75;
  const std::vector<double> u{0.25, 0.75, 0.0};
  EXPECT_EQ(ocloud_power(std::span<const ServerState>(servers), 100, 200), ocloud_power(u, 100, 200));
}

TEST(OCloudReward, HandValues) {
  EXPECT_NEAR(ocloud_reward(1000, 0, 0.1, 0.005), -100.0, 1e-9);
  EXPECT_NEAR(ocloud_reward(0, 200, 0.1, 0.005), -1.0, 1e-9);
  EXPECT_EQ(ocloud_reward(1234.5, 77, 0, 0), 0.0);
}

TEST(OCloud, ObservationAndActionShape) {
  OCloud env(small_config(10, 200));
  EXPECT_EQ(env.spec().obs_dim, 43u);
  EXPECT_EQ(env.spec().action_count, 10u);
  EXPECT_EQ(env.spec().max_steps, 200u);
}

TEST(OCloud, AssignToIdleServerStartsTask) {
  OCloud env(small_config(2, 2));
  env.set_workload({task(0.5, 0.2, 4, 0), task(0.1, 0.1, 1, 0)});
  env.reset(0);
  const double before = env.latency_measure();
  env.step(ActionId(1));
  const auto& s = env.servers()[1];
  EXPECT_DOUBLE_EQ(s.u_cpu, 0.5);
  EXPECT_DOUBLE_EQ(s.u_ram, 0.2);
  EXPECT_EQ(s.l_queue, 0u);
  EXPECT_EQ(s.p_queue, 0.0);
  EXPECT_EQ(env.latency_measure() - before, 0.0);
  EXPECT_EQ(env.last_latency_reward(), 0.0);
}

TEST(OCloud, OverloadedServerQueuesWithPenalty) {
  OCloud env(small_config(1, 3));
  env.set_workload({task(0.9, 0.1, 5, 0), task(0.5, 0.2, 3, 0), task(0.1, 0.1, 1, 1)});
  env.reset(0);
  env.step(ActionId(0));
  EXPECT_DOUBLE_EQ(env.servers()[0].u_cpu, 0.9);
  const double p_before = env.servers()[0].p_queue;
  env.step(ActionId(0));
  const auto& s = env.servers()[0];
  EXPECT_EQ(s.l_queue, 1u);
  EXPECT_NEAR(s.p_queue - p_before, (0.5 + 0.2) * 3, 1e-9);
  EXPECT_NEAR(s.recompute_p_queue(), s.p_queue, 1e-12);
  EXPECT_DOUBLE_EQ(s.u_cpu, 0.9);
  // One step of waiting in the queue.
  EXPECT_EQ(env.last_latency_reward(), 1.0);
}

TEST(OCloud, NoTasksNoLatency) {
  OCloud env(small_config(1, 2));
  env.set_workload({task(0.1, 0.1, 1, 0), task(0.1, 0.1, 1, 5)});
  env.reset(0);
  env.step(ActionId(0));
  // The only task started on arrival; the clock advanced five steps.
  EXPECT_EQ(env.last_latency_reward(), 0.0);
  EXPECT_EQ(env.now(), 5);
}

TEST(OCloud, StepRewardUsesPowerAndLatency) {
  auto c = small_config(2, 3);
  OCloud env(c);
  env.set_workload({task(0.9, 0.1, 5, 0), task(0.5, 0.2, 3, 0), task(0.1, 0.1, 1, 1)});
  env.reset(0);
  env.step(ActionId(0));
  const auto r = env.step(ActionId(0));
  const double power = ocloud_power(env.servers(), c.p0, c.p1);
  EXPECT_NEAR(env.last_power(), power, 1e-12);
  EXPECT_NEAR(r.reward, -(c.w1 * power + c.w2 * 1.0), 1e-9);
}

TEST(OCloud, ObservationScaledByStateNorm) {
  auto c = small_config(2, 2);
  c.state_norm = 50.0;
  OCloud env(c);
  env.set_workload({task(0.5, 0.25, 4, 0), task(0.2, 0.3, 7, 0)});
  const auto obs = env.reset(0);
  ASSERT_EQ(obs.size(), 3u + 4u * 2u);
  EXPECT_DOUBLE_EQ(obs[0], 0.5 / 50);
  EXPECT_DOUBLE_EQ(obs[1], 0.25 / 50);
  EXPECT_DOUBLE_EQ(obs[2], 4.0 / 50);
  const auto r = env.step(ActionId(0));
  EXPECT_DOUBLE_EQ(r.next_obs[0], 0.2 / 50);
  EXPECT_DOUBLE_EQ(r.next_obs[3], 0.5 / 50);   // u_cpu of server 0
  EXPECT_DOUBLE_EQ(r.next_obs[5], 0.25 / 50);  // u_ram of server 0
}

TEST(OCloud, EpisodeTruncatesAtTaskCount) {
  OCloud env(small_config(3, 4));
  env.reset(0);
  StepResult r;
  for (int i = 0; i < 4; ++i) {
    r = env.step(ActionId(i % 3));
    EXPECT_FALSE(r.done);
  }
  EXPECT_TRUE(r.truncated);
  EXPECT_FALSE(env.episode_succeeded());
}

TEST(OCloud, WarmupPlacesTasksBeforeFirstDecision) {
  auto c = small_config(4, 10);
  c.warmup_tasks = 50;
  OCloud env(c);
  env.reset(3);
  std::size_t busy = 0;
  for (const auto& s : env.servers()) busy += s.running.size() + s.queue.size();
  EXPECT_GT(busy, 0u);
  EXPECT_NE(env.pending(), nullptr);
}

TEST(OCloud, ResetDeterministic) {
  auto c = small_config(4, 20);
  c.warmup_tasks = 30;
  OCloud a(c);
  OCloud b(c);
  EXPECT_EQ(a.reset(9), b.reset(9));
  for (int i = 0; i < 20; ++i) {
    const auto ra = a.step(ActionId(i % 4));
    const auto rb = b.step(ActionId(i % 4));
    EXPECT_EQ(ra.next_obs, rb.next_obs);
    EXPECT_EQ(ra.reward, rb.reward);
  }
}

TEST(OCloud, SaveLoadMidEpisode) {
  auto c = small_config(3, 50);
  c.warmup_tasks = 20;
  OCloud a(c);
  a.reset(2);
  for (int i = 0; i < 10; ++i) a.step(ActionId(i % 3));
  ByteWriter w;
  a.save_state(w);
  OCloud b(c);
  ByteReader r(w.bytes());
  b.load_state(r);
  for (int i = 0; i < 30; ++i) {
    const auto ra = a.step(ActionId((i * 7) % 3));
    const auto rb = b.step(ActionId((i * 7) % 3));
    EXPECT_EQ(ra.next_obs, rb.next_obs);
    EXPECT_EQ(ra.reward, rb.reward);
  }
}

TEST(OCloud, InvalidConfigRejected) {
  auto c = small_config(0, 10);
  EXPECT_SADQ_ERROR(OCloud{c}, ErrorKind::kConfigInvalid);
  c = small_config(2, 10);
  c.p1 = c.p0;
  EXPECT_SADQ_ERROR(OCloud{c}, ErrorKind::kConfigInvalid);
}

TEST(OCloudReplay, TenServersRandomPolicy) { EXPECT_EQ(sadq::testing::ocloud_replay_mismatch(10, 1), ""); }
TEST(OCloudReplay, ThreeServersHeavyQueueing) { EXPECT_EQ(sadq::testing::ocloud_replay_mismatch(3, 2), ""); }

TEST(Trace, LoadsWellFormedRows) {
  TempDir dir;
  const auto path = dir.write("t.csv",
                              "arrival_time,duration,cpu_demand,ram_demand\n"
                              "0,3,0.5,0.25\n"
                              "1,2,0.1,0.2\n"
                              "4,1,0.3,0.3\n");
  const auto tasks = trace_load(path);
  ASSERT_EQ(tasks.size(), 3u);
  EXPECT_EQ(tasks[0].t_arr, 0);
  EXPECT_EQ(tasks[0].t_occ, 3);
  EXPECT_DOUBLE_EQ(tasks[0].c_req, 0.5);
  EXPECT_DOUBLE_EQ(tasks[0].r_req, 0.25);
  EXPECT_EQ(tasks[2].t_arr, 4);
}

TEST(Trace, ZeroCpuDemandNamesRow) {
  TempDir dir;
  const auto path = dir.write("t.csv",
                              "arrival_time,duration,cpu_demand,ram_demand\n"
                              "0,3,0.5,0.25\n"
                              "1,2,0,0.2\n");
  try {
    trace_load(path);
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Trace, UnsortedRowsSortedStably) {
  TempDir dir;
  const auto path = dir.write("t.csv",
                              "arrival_time,duration,cpu_demand,ram_demand\n"
                              "5,1,0.1,0.1\n"
                              "2,1,0.2,0.1\n"
                              "5,1,0.3,0.1\n"
                              "2,1,0.4,0.1\n"
                              "0,1,0.5,0.1\n");
  const auto tasks = trace_load(path);
  const std::vector<double> cpu_order{0.5, 0.2, 0.4, 0.1, 0.3};
  ASSERT_EQ(tasks.size(), cpu_order.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) EXPECT_DOUBLE_EQ(tasks[i].c_req, cpu_order[i]);
}

TEST(Trace, MalformedInputs) {
  TempDir dir;
  EXPECT_SADQ_ERROR(trace_load(dir.file("missing.csv")), ErrorKind::kIoError);
  EXPECT_SADQ_ERROR(trace_load(dir.write("a.csv", "arrival_time,duration,cpu_demand,ram_demand\n")),
                    ErrorKind::kEmptyTrace);
  EXPECT_SADQ_ERROR(trace_load(dir.write("b.csv", "h\n1,2,0.3\n")), ErrorKind::kParseError);
  EXPECT_SADQ_ERROR(trace_load(dir.write("c.csv", "h\n1,2,abc,0.3\n")), ErrorKind::kParseError);
  EXPECT_SADQ_ERROR(trace_load(dir.write("d.csv", "h\n1,0,0.3,0.3\n")), ErrorKind::kParseError);
}

TEST(Trace, DemandAboveOneClamped) {
  TempDir dir;
  const auto tasks = trace_load(dir.write("t.csv", "h\n0,1,1.7,0.5\n"));
  EXPECT_EQ(tasks[0].c_req, 1.0);
}

TEST(Trace, SynthesizeReproducible) {
  const auto a = trace_synthesize(0, 5);
  const auto b = trace_synthesize(0, 5);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a[i].c_req, b[i].c_req);
    EXPECT_EQ(a[i].r_req, b[i].r_req);
    EXPECT_EQ(a[i].t_occ, b[i].t_occ);
    EXPECT_EQ(a[i].t_arr, b[i].t_arr);
  }
}

TEST(Trace, SynthesizeArrivalsNondecreasingAndDemandsInRange) {
  const auto tasks = trace_synthesize(4, 1000);
  ASSERT_EQ(tasks.size(), 1000u);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (i > 0) {
      EXPECT_GE(tasks[i].t_arr, tasks[i - 1].t_arr);
    }
    EXPECT_GT(tasks[i].c_req, 0.05);
    EXPECT_LE(tasks[i].c_req, 0.5);
    EXPECT_GE(tasks[i].t_occ, 1);
    EXPECT_LE(tasks[i].t_occ, 20);
  }
}

TEST(OCloud, TraceFileDrivesEpisodes) {
  TempDir dir;
  std::string text = "arrival_time,duration,cpu_demand,ram_demand\n";
  for (int i = 0; i < 40; ++i) text += std::to_string(i) + ",2,0.2,0.1\n";
  auto c = small_config(2, 10);
  c.warmup_tasks = 5;
  c.trace_path = dir.write("trace.csv", text);
  OCloud env(c);
  const auto obs = env.reset(1);
  EXPECT_DOUBLE_EQ(obs[0], 0.2);
  c.episode_tasks = 100;
  EXPECT_SADQ_ERROR(OCloud{c}, ErrorKind::kEmptyTrace);
}

}  // namespace
}  // namespace sadq

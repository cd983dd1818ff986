#include <benchmark/benchmark.h>

#include "sadq/agent/agent.hpp"
#include "sadq/common/alloc.hpp"
#include "sadq/env/registry.hpp"
#include "sadq/nn/tape.hpp"
#include "sadq/train/config.hpp"
#include "sadq/train/replay_buffer.hpp"

namespace {

using sadq::nn::Matrix;

sadq::AgentConfig cartpole_agent(sadq::AgentVariant v) {
  sadq::TrainConfig c = sadq::preset("cartpole");
  c.variant = v;
  return c.agent_config(sadq::make_environment(c.env)->spec());
}

sadq::Batch random_batch(std::size_t n, std::size_t obs, std::size_t actions, sadq::Rng& rng) {
  sadq::Batch b;
  b.s = Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(obs));
  b.s_next = Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(obs));
  for (Eigen::Index i = 0; i < b.s.size(); ++i) {
    b.s.data()[i] = rng.uniform(-1, 1);
    b.s_next.data()[i] = rng.uniform(-1, 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    b.a.push_back(rng.index(actions));
    b.r.push_back(1.0);
    b.done.push_back(0);
  }
  return b;
}

void BM_QForward(benchmark::State& state) {
  const auto c = cartpole_agent(sadq::AgentVariant::kDueling);
  sadq::Rng q(0), m(1), rng(2);
  const sadq::Agent agent(c, q, m);
  const auto b = random_batch(static_cast<std::size_t>(state.range(0)), c.obs_dim, c.action_count, rng);
  for (auto _ : state) benchmark::DoNotOptimize(agent.q_net().q_values(agent.online_params(), b.s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QForward)->Arg(1)->Arg(64);

void BM_QLossBackward(benchmark::State& state) {
  const auto c = cartpole_agent(sadq::AgentVariant::kDueling);
  sadq::Rng q(0), m(1), rng(2);
  const sadq::Agent agent(c, q, m);
  const auto b = random_batch(64, c.obs_dim, c.action_count, rng);
  const Matrix targets = Matrix::Ones(64, 1);
  for (auto _ : state) {
    sadq::nn::Tape tape;
    const auto loss = agent.q_loss(tape, b, targets);
    benchmark::DoNotOptimize(tape.gradients(loss, agent.online_params()));
  }
}
BENCHMARK(BM_QLossBackward);

void BM_EnvStep(benchmark::State& state, const char* id) {
  sadq::EnvConfig ec;
  ec.id = id;
  auto env = sadq::make_environment(ec);
  const auto actions = env->spec().action_count;
  sadq::Rng rng(3);
  std::uint64_t episode = 0;
  env->reset(episode);
  for (auto _ : state) {
    const auto r = env->step(sadq::ActionId(rng.index(actions)));
    if (r.finished()) env->reset(++episode);
  }
}
BENCHMARK_CAPTURE(BM_EnvStep, cartpole, "cartpole");
BENCHMARK_CAPTURE(BM_EnvStep, acrobot, "acrobot");
BENCHMARK_CAPTURE(BM_EnvStep, bitflip, "bitflip");
BENCHMARK_CAPTURE(BM_EnvStep, ocloud, "ocloud");

void BM_UpdateQ(benchmark::State& state) {
  const auto variant = static_cast<sadq::AgentVariant>(state.range(0));
  const auto c = cartpole_agent(variant);
  sadq::Rng q(0), m(1), rng(2);
  sadq::Agent agent(c, q, m);
  const auto b = random_batch(64, c.obs_dim, c.action_count, rng);
  for (auto _ : state) benchmark::DoNotOptimize(agent.update_q(b, rng));
  state.SetLabel(sadq::to_string(variant));
}
BENCHMARK(BM_UpdateQ)
    ->Arg(static_cast<int>(sadq::AgentVariant::kDueling))
    ->Arg(static_cast<int>(sadq::AgentVariant::kSadq))
    ->Arg(static_cast<int>(sadq::AgentVariant::kSadqDist));

void BM_UpdateModel(benchmark::State& state) {
  const auto c = cartpole_agent(sadq::AgentVariant::kSadq);
  sadq::Rng q(0), m(1), rng(2);
  sadq::Agent agent(c, q, m);
  const auto b = random_batch(128, c.obs_dim, c.action_count, rng);
  for (auto _ : state) benchmark::DoNotOptimize(agent.update_model(b, rng));
}
BENCHMARK(BM_UpdateModel);

void BM_ReplaySample(benchmark::State& state) {
  sadq::ReplayBuffer buf(100000, 4);
  sadq::Rng rng(4);
  for (int i = 0; i < 100000; ++i) {
    buf.push({{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()},
              sadq::ActionId(rng.index(2)),
              1.0,
              {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()},
              false,
              false});
  }
  for (auto _ : state) benchmark::DoNotOptimize(buf.sample(64, rng));
}
BENCHMARK(BM_ReplaySample);

}  // namespace

int main(int argc, char** argv) {
  sadq::tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}

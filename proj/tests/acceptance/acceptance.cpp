// Acceptance suite: one PASS/FAIL line per criterion. Exit status 0 only if
// every selected criterion passes. Pass criterion ids (AC1 ... AC10) as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "dist_oracle.hpp"
#include "gradcheck.hpp"
#include "ocloud_oracle.hpp"
#include "sadq/agent/agent.hpp"
#include "sadq/common/alloc.hpp"
#include "sadq/diag/tabular.hpp"
#include "sadq/model/dynamics_model.hpp"
#include "sadq/ocloud/ocloud.hpp"
#include "sadq/train/trainer.hpp"

namespace {

using sadq::TrainConfig;
using sadq::Trainer;
using sadq::nn::Matrix;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Trains in chunks of `chunk` env steps until `reached` holds for a logged row
// or the configured budget is spent. Returns the env step of the first row
// that satisfied it, or 0.
std::uint64_t train_until(const TrainConfig& c, std::uint64_t seed, std::uint64_t chunk,
                          const std::function<bool(const sadq::MetricsRow&)>& reached) {
  Trainer t(c, seed, "");
  std::size_t seen = 0;
  for (std::uint64_t stop = chunk;; stop += chunk) {
    const bool done = t.run(std::min(stop, c.total_steps));
    for (; seen < t.rows().size(); ++seen) {
      if (reached(t.rows()[seen])) return t.rows()[seen].env_steps;
    }
    if (done) return 0;
  }
}

Outcome ac_theory(bool variance) {
  const sadq::TheoryCheckConfig cfg;  // 10 MDPs, 20 states, 4 actions, gamma 0.9, n = 1e4
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = sadq::run_theory_checks(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream d;
  if (variance) {
    d << res.variance_holds << "/" << res.variance_pairs << " pairs satisfy the bound ("
      << fmt("%.2f", 100.0 * res.variance_fraction()) << "%, need 95%), max |Cov|/Var "
      << fmt("%.3f", res.max_mean_covariance_ratio);
  } else {
    d << res.bias_within << "/" << res.bias_tested << " on-policy pairs within 3 SE at every alpha, max |diff| "
      << fmt("%.3g", res.max_abs_bias_difference);
  }
  d << ", " << fmt("%.1f", secs) << " s";
  const bool ok = (variance ? res.variance_ok(cfg) : res.bias_ok()) && secs < 60.0;
  return {ok, d.str()};
}

Outcome ac3_reduction() {
  TrainConfig c = sadq::preset("cartpole");
  c.alpha = 1.0;
  c.beta = 0.0;
  c.total_steps = 1000;
  c.replay_frequency = 8;
  c.q_updates_per_collect = 8;
  c.model_updates_per_collect = 1;
  c.target_update_interval = 200;
  c.eval_interval = 500;
  c.eval_episodes = 5;
  const auto trajectory = [](const TrainConfig& cfg, std::vector<std::uint64_t>& prints) {
    Trainer t(cfg, 11, "");
    t.on_grad_step = [&prints](const Trainer& tr) {
      prints.push_back(tr.agent().online_params().fingerprint());
      prints.push_back(tr.agent().target_params().fingerprint());
    };
    t.run();
    return t.rows();
  };
  std::vector<std::uint64_t> a, b;
  const auto rows_a = trajectory(c, a);
  c.variant = sadq::AgentVariant::kDueling;
  const auto rows_b = trajectory(c, b);
  std::size_t first_diff = 0;
  while (first_diff < std::min(a.size(), b.size()) && a[first_diff] == b[first_diff]) ++first_diff;
  bool same_evals = rows_a.size() == rows_b.size();
  for (std::size_t i = 0; same_evals && i < rows_a.size(); ++i) {
    same_evals = rows_a[i].eval_return_mean == rows_b[i].eval_return_mean;
  }
  std::ostringstream d;
  d << a.size() / 2 << " grad steps, fingerprints identical for " << first_diff / 2 << "; eval returns "
    << (same_evals ? "identical" : "differ");
  return {!a.empty() && a == b && same_evals, d.str()};
}

Outcome ac4_cartpole() {
  TrainConfig c = sadq::preset("cartpole");
  c.model_updates_per_collect = 20;
  c.eval_episodes = 20;
  std::size_t passed = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto at = train_until(c, seed, 8000, [](const sadq::MetricsRow& r) { return r.eval_return_mean >= 195.0; });
    passed += at > 0 ? 1 : 0;
    d << (seed ? ", " : "") << "seed " << seed << ": " << (at > 0 ? std::to_string(at) : std::string("not reached"));
    std::fprintf(stderr, "  AC4 seed %llu -> %s\n", static_cast<unsigned long long>(seed),
                 at > 0 ? std::to_string(at).c_str() : "not reached");
  }
  return {passed >= 3, std::to_string(passed) + "/5 seeds reach 195 within " + std::to_string(c.total_steps) +
                           " steps (" + d.str() + ")"};
}

Outcome ac5_bitflip() {
  TrainConfig c = sadq::preset("bitflip");
  std::size_t passed = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto at = train_until(c, seed, 9600, [](const sadq::MetricsRow& r) { return r.eval_success_rate >= 0.9; });
    passed += at > 0 ? 1 : 0;
    d << (seed ? ", " : "") << "seed " << seed << ": " << (at > 0 ? std::to_string(at) : std::string("not reached"));
    std::fprintf(stderr, "  AC5 seed %llu -> %s\n", static_cast<unsigned long long>(seed),
                 at > 0 ? std::to_string(at).c_str() : "not reached");
  }
  return {passed >= 3, std::to_string(passed) + "/5 seeds reach 90% success over " + std::to_string(c.eval_episodes) +
                           " episodes within " + std::to_string(c.total_steps) + " steps (" + d.str() + ")"};
}

// Mean of the trailing window-100 average over the first and last 10% of
// model updates.
std::pair<double, double> smoothed_ends(const std::vector<double>& loss) {
  std::vector<double> smooth(loss.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < loss.size(); ++i) {
    sum += loss[i];
    if (i >= 100) sum -= loss[i - 100];
    smooth[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, 100));
  }
  const std::size_t tenth = std::max<std::size_t>(1, loss.size() / 10);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < tenth; ++i) {
    first += smooth[i];
    last += smooth[loss.size() - tenth + i];
  }
  return {first / static_cast<double>(tenth), last / static_cast<double>(tenth)};
}

Outcome ac6_model_trend() {
  TrainConfig c = sadq::preset("cartpole");
  c.total_steps = 40000;
  c.eval_interval = 40000;
  c.eval_episodes = 5;
  bool decreasing = true;
  double final_k1 = 0.0;
  bool larger_k_lower = true;
  std::ostringstream d;
  for (std::size_t k : {1, 5, 10, 20}) {
    c.model_updates_per_collect = k;
    Trainer t(c, 0, "");
    t.run();
    const auto [first, last] = smoothed_ends(t.model_losses());
    decreasing = decreasing && last < first;
    if (k == 1) {
      final_k1 = last;
    } else {
      larger_k_lower = larger_k_lower && last < final_k1;
    }
    d << (k == 1 ? "" : "; ") << "k=" << k << " " << fmt("%.4g", first) << " -> " << fmt("%.4g", last);
  }
  d << " (" << c.total_steps << " steps)";
  return {decreasing && larger_k_lower, d.str()};
}

Outcome ac7_gradients() {
  using sadq::testing::check_gradients;
  using sadq::testing::random_matrix;
  double worst_q = 0.0, worst_model = 0.0, worst_quantile = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t n = 0; n < 20; ++n) {
    sadq::Rng rng(sadq::mix_seed(2024, n));
    const std::size_t obs = 2 + rng.index(3);
    const std::size_t actions = 2 + rng.index(2);
    std::vector<std::size_t> hidden;
    for (std::size_t l = 0, layers = 1 + rng.index(2); l < layers; ++l) hidden.push_back(3 + rng.index(6));
    const std::size_t batch = 3 + rng.index(4);

    sadq::Batch b;
    b.s = random_matrix(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(obs), rng);
    b.s_next = random_matrix(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(obs), rng);
    for (std::size_t i = 0; i < batch; ++i) {
      b.a.push_back(rng.index(actions));
      b.r.push_back(rng.uniform(-1, 1));
      b.done.push_back(0);
    }

    for (auto variant : {sadq::AgentVariant::kDqn, sadq::AgentVariant::kSadq, sadq::AgentVariant::kQrDqn}) {
      sadq::AgentConfig ac;
      ac.variant = variant;
      ac.obs_dim = obs;
      ac.action_count = actions;
      ac.q_hidden = hidden;
      ac.atoms = 4;
      ac.q_loss = n % 2 ? sadq::QLoss::kHuber : sadq::QLoss::kMse;
      ac.model.hidden = hidden;
      sadq::Rng qi(n), mi(n + 100);
      sadq::Agent agent(ac, qi, mi);
      sadq::testing::randomize(agent.online_params(), rng, 0.5);
      const Matrix targets = random_matrix(static_cast<Eigen::Index>(batch),
                                           ac.distributional() ? 4 : 1, rng, 2.0);
      const auto r = check_gradients(agent.online_params(), [&](sadq::nn::Tape& t, const sadq::nn::ParamSet&) {
        return agent.q_loss(t, b, targets);
      });
      checked += r.checked;
      (variant == sadq::AgentVariant::kQrDqn ? worst_quantile : worst_q) =
          std::max(variant == sadq::AgentVariant::kQrDqn ? worst_quantile : worst_q, r.max_relative_error);
    }

    sadq::DynModelConfig mc;
    mc.obs_dim = obs;
    mc.action_count = actions;
    mc.hidden = hidden;
    mc.state_norm = 1.0 + rng.uniform();
    sadq::DynModel model(mc, rng);
    sadq::testing::randomize(model.params(), rng, 0.5);
    const Matrix eps = sadq::standard_normal(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(obs), rng);
    const auto r = check_gradients(model.params(), [&](sadq::nn::Tape& t, const sadq::nn::ParamSet&) {
      return model.loss(t, b.s, b.a, b.s_next, eps);
    });
    checked += r.checked;
    worst_model = std::max(worst_model, r.max_relative_error);
  }
  const double worst = std::max({worst_q, worst_model, worst_quantile});
  std::ostringstream d;
  d << "20 nets, " << checked << " coordinates; max rel err Q " << fmt("%.2e", worst_q) << ", model MSE "
    << fmt("%.2e", worst_model) << ", quantile Huber " << fmt("%.2e", worst_quantile);
  return {worst < 1e-4, d.str()};
}

Outcome ac8_distributional() {
  sadq::Rng rng(8);
  double worst_ratio = 0.0;
  bool within = true;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = 1 + rng.index(64);
    std::vector<double> z_hat(n), z_next(n);
    for (auto& x : z_hat) x = rng.uniform(-100, 100);
    for (auto& x : z_next) x = rng.uniform(-100, 100);
    const double r = rng.uniform(-10, 10);
    const sadq::TargetMix mix{.alpha = rng.uniform(), .beta = 0, .gamma = rng.uniform(0, 0.999)};
    const bool done = rng.index(10) == 0;
    const double lhs = sadq::dist_expectation({sadq::sadq_dist_target(r, mix, z_hat, z_next, done), {}});
    const double rhs = sadq::sadq_target(r, mix, sadq::dist_expectation({z_hat, {}}),
                                         sadq::dist_expectation({z_next, {}}), done);
    const double mag = std::abs(r) + mix.gamma * ((1 - mix.alpha) * sadq::testing::mean_abs(z_hat) +
                                                  mix.alpha * sadq::testing::mean_abs(z_next));
    const double bound = sadq::testing::accumulation_bound(n, mag);
    within = within && std::abs(lhs - rhs) <= bound;
    worst_ratio = std::max(worst_ratio, std::abs(lhs - rhs) / bound);
  }

  // alpha = 1 against the quantile-regression target r + gamma * z_next.
  bool exact = true;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = 1 + rng.index(64);
    std::vector<double> z_hat(n), z_next(n);
    for (auto& x : z_hat) x = rng.uniform(-100, 100);
    for (auto& x : z_next) x = rng.uniform(-100, 100);
    const double r = rng.uniform(-10, 10);
    const sadq::TargetMix mix{.alpha = 1.0, .beta = 0, .gamma = rng.uniform(0, 0.999)};
    const bool done = rng.index(10) == 0;
    const auto t = sadq::sadq_dist_target(r, mix, z_hat, z_next, done);
    for (std::size_t j = 0; j < n; ++j) exact = exact && t[j] == (done ? r : r + mix.gamma * z_next[j]);
  }

  // Same reduction through the agents on a shared target network.
  sadq::AgentConfig ac;
  ac.variant = sadq::AgentVariant::kSadqDist;
  ac.obs_dim = 4;
  ac.action_count = 3;
  ac.q_hidden = {16, 16};
  ac.atoms = 8;
  ac.mix = {.alpha = 1.0, .beta = 0.5, .gamma = 0.9};
  ac.model.hidden = {16};
  sadq::Rng q1(1), m1(2), q2(1), m2(2);
  sadq::Agent sd(ac, q1, m1);
  ac.variant = sadq::AgentVariant::kQrDqn;
  sadq::Agent qr(ac, q2, m2);
  sadq::testing::randomize(sd.target_params(), rng, 0.5);
  qr.target_params().copy_from(sd.target_params());
  sadq::Batch b;
  b.s = sadq::testing::random_matrix(32, 4, rng);
  b.s_next = sadq::testing::random_matrix(32, 4, rng);
  for (int i = 0; i < 32; ++i) {
    b.a.push_back(rng.index(3));
    b.r.push_back(rng.uniform(-1, 1));
    b.done.push_back(rng.index(5) == 0 ? 1 : 0);
  }
  sadq::Rng s1(3), s2(3);
  const bool agents_equal = sd.dist_targets(b, s1) == qr.dist_targets(b, s2);

  std::ostringstream d;
  d << "10^4 inputs within the accumulation bound (worst " << fmt("%.3f", worst_ratio)
    << " of bound); alpha=1 atomwise " << (exact ? "exact" : "MISMATCH") << ", agent targets "
    << (agents_equal ? "identical" : "differ");
  return {within && exact && agents_equal, d.str()};
}

Outcome ac9_ocloud() {
  std::vector<std::string> fails;
  const auto near = [&](double got, double want, const char* what) {
    if (std::abs(got - want) > 1e-9) fails.push_back(what);
  };
  near(sadq::ocloud_power(std::vector<double>(10, 0.0), 100, 200), 1000.0, "idle power");
  near(sadq::ocloud_power(std::vector<double>{1.0}, 100, 200), 100.5, "full power");
  near(sadq::ocloud_power(std::vector<double>{0.5}, 100, 200),
       100.0 + 100.0 * (1.0 - std::exp(1.4 * std::log(0.5))) / 200.0, "half power");
  near(sadq::ocloud_reward(1000, 0, 0.1, 0.005), -100.0, "power reward");
  near(sadq::ocloud_reward(0, 200, 0.1, 0.005), -1.0, "latency reward");

  // A task that does not fit queues with penalty (c + r) * t_occ.
  sadq::OCloudConfig c;
  c.server_count = 1;
  c.warmup_tasks = 0;
  c.episode_tasks = 3;
  c.state_norm = 1.0;
  sadq::OCloud env(c);
  env.set_workload({{0.8, 0.5, 10, 0}, {0.5, 0.3, 3, 0}, {0.1, 0.1, 1, 0}});
  env.reset(0);
  env.step(sadq::ActionId(0));
  const double p_before = env.servers()[0].p_queue;
  env.step(sadq::ActionId(0));
  if (env.servers()[0].l_queue != 1) fails.push_back("queue length");
  near(env.servers()[0].p_queue - p_before, (0.5 + 0.3) * 3.0, "queue penalty");

  for (auto [servers, seed] : {std::pair<std::size_t, std::uint64_t>{10, 1}, {3, 2}, {5, 7}}) {
    const auto m = sadq::testing::ocloud_replay_mismatch(servers, seed, 1000);
    if (!m.empty()) fails.push_back(std::to_string(servers) + " servers: " + m);
  }
  std::string d = "hand values to 1e-9 and 3 replayed 1000-step episodes";
  for (const auto& f : fails) d += "; FAIL " + f;
  return {fails.empty(), d};
}

Outcome ac10_reproducible() {
  const fs::path root = fs::temp_directory_path() / ("sadq_ac10_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<std::string> failed;
  std::size_t compared = 0;
  struct Case {
    const char* preset;
    sadq::AgentVariant variant;
  };
  for (const Case& k : {Case{"cartpole", sadq::AgentVariant::kSadq}, Case{"cartpole", sadq::AgentVariant::kSadqDist},
                        Case{"acrobot", sadq::AgentVariant::kSadq}, Case{"bitflip", sadq::AgentVariant::kSadq},
                        Case{"ocloud", sadq::AgentVariant::kSadq}}) {
    TrainConfig c = sadq::preset(k.preset);
    c.variant = k.variant;
    c.total_steps = 3000;
    c.eval_interval = 1000;
    c.eval_episodes = 3;
    c.model_updates_per_collect = std::min<std::size_t>(c.model_updates_per_collect, 2);
    c.q_updates_per_collect = std::min<std::size_t>(c.q_updates_per_collect, 2);
    const std::string name = std::string(k.preset) + "_" + sadq::to_string(k.variant);
    for (const char* run : {"a", "b"}) Trainer(c, 5, (root / name / run).string()).run();
    for (const char* file : {"metrics.csv", "model_loss.csv", "checkpoint.bin"}) {
      const auto a = read_bytes(root / name / "a" / file);
      const auto b = read_bytes(root / name / "b" / file);
      ++compared;
      if (a.empty() || a != b) failed.push_back(name + "/" + file);
    }
  }
  fs::remove_all(root);
  std::string d = std::to_string(compared - failed.size()) + "/" + std::to_string(compared) +
                  " files byte-identical across repeated runs (metrics, model loss, checkpoint; 5 configs)";
  for (const auto& f : failed) d += "; differs: " + f;
  return {failed.empty(), d};
}

}  // namespace

int main(int argc, char** argv) {
  sadq::tune_allocator();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", [] { return ac_theory(true); }},
      {"AC2", [] { return ac_theory(false); }},
      {"AC3", ac3_reduction},
      {"AC4", ac4_cartpole},
      {"AC5", ac5_bitflip},
      {"AC6", ac6_model_trend},
      {"AC7", ac7_gradients},
      {"AC8", ac8_distributional},
      {"AC9", ac9_ocloud},
      {"AC10", ac10_reproducible},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-4s %s  %s [%.1fs]\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}

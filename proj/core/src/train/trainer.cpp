#include "sadq/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "sadq/common/error.hpp"
#include "sadq/train/checkpoint.hpp"

namespace sadq {

namespace {

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::uint64_t episode_seed(std::uint64_t base, std::uint64_t episode) { return mix_seed(base, episode); }

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, Stream s) { return mix_seed(seed, static_cast<std::uint64_t>(s)); }

EvalResult evaluate(const Agent& agent, const EnvConfig& env_config, std::size_t episodes, std::uint64_t seed) {
  auto env = make_environment(env_config);
  Rng successor_rng(mix_seed(seed, 1));
  EvalResult res;
  res.episodes = episodes;
  double sum = 0.0;
  double sum_sq = 0.0;
  double disc_sum = 0.0;
  std::uint64_t visited = 0;
  std::size_t successes = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    Observation obs = env->reset(episode_seed(seed, e));
    double ret = 0.0;
    while (!env->episode_over()) {
      const auto q = agent.q_values(obs);
      disc_sum += q_discrepancy(q);
      ++visited;
      const ActionId a = agent.model() == nullptr ? sadq_action(q, std::vector<double>(q.size(), 0.0), 0.0)
                                                  : sadq_action(q, agent.successor_values(obs, successor_rng),
                                                                agent.config().mix.beta);
      auto step = env->step(a);
      ret += step.reward;
      obs = std::move(step.next_obs);
    }
    if (env->episode_succeeded()) ++successes;
    sum += ret;
    sum_sq += ret * ret;
  }
  const double n = static_cast<double>(episodes);
  res.return_mean = sum / n;
  res.return_std = std::sqrt(std::max(0.0, sum_sq / n - res.return_mean * res.return_mean));
  res.success_rate = static_cast<double>(successes) / n;
  res.q_discrepancy = visited > 0 ? disc_sum / static_cast<double>(visited) : MetricsRow::kNaN;
  return res;
}

Trainer::Trainer(Restore, TrainConfig config, std::uint64_t seed, std::string out_dir)
    : config_(std::move(config)),
      seed_(seed),
      out_dir_(std::move(out_dir)),
      env_(make_environment(config_.env)),
      buffer_(config_.buffer_size, env_->spec().obs_dim),
      explore_rng_(stream_seed(seed, Stream::kExplore)),
      q_sample_rng_(stream_seed(seed, Stream::kQSample)),
      model_sample_rng_(stream_seed(seed, Stream::kModelSample)),
      model_noise_rng_(stream_seed(seed, Stream::kModelNoise)),
      successor_rng_(stream_seed(seed, Stream::kSuccessor)) {
  config_.validate();
  Rng q_init(stream_seed(seed, Stream::kInitQ));
  Rng model_init(stream_seed(seed, Stream::kInitModel));
  agent_ = std::make_unique<Agent>(config_.agent_config(env_->spec()), q_init, model_init);
  apply_model_gate();
  start_time_ = now_seconds();
}

Trainer::Trainer(TrainConfig config, std::uint64_t seed, std::string out_dir)
    : Trainer(Restore{}, std::move(config), seed, std::move(out_dir)) {
  obs_ = env_->reset(episode_seed(stream_seed(seed_, Stream::kEnv), episodes_));
  if (!out_dir_.empty()) {
    std::filesystem::create_directories(out_dir_);
    std::ofstream(path("config.ini")) << to_ini(config_);
    open_logs(false);
  }
}

std::string Trainer::path(const char* name) const { return (std::filesystem::path(out_dir_) / name).string(); }

void Trainer::open_logs(bool append) {
  metrics_ = std::make_unique<MetricsWriter>(path("metrics.csv"), append);
  if (config_.log_model_loss && agent_->model() != nullptr) {
    const std::string p = path("model_loss.csv");
    const bool has_content = append && std::filesystem::exists(p) && std::filesystem::file_size(p) > 0;
    model_log_ = std::make_unique<std::ofstream>(p, append ? std::ios::app : std::ios::trunc);
    if (!*model_log_) fail(ErrorKind::kIoError, "cannot open " + p);
    if (!has_content) *model_log_ << "model_step,loss\n";
  }
}

void Trainer::maybe_sync(TargetUpdateUnit unit, std::uint64_t count) {
  if (unit == config_.target_update_unit && count % config_.target_update_interval == 0) {
    agent_->sync_target();
    ++target_syncs_;
  }
}

void Trainer::collect_step() {
  const double eps = config_.epsilon().at(env_steps_);
  ActionId a;
  const auto actions = env_->spec().action_count;
  if (buffer_.size() < config_.effective_learning_starts()) {
    a = ActionId{explore_rng_.index(actions)};
  } else {
    a = epsilon_greedy(agent_->greedy_action(obs_, successor_rng_), actions, eps, explore_rng_);
  }
  StepResult step = env_->step(a);
  buffer_.push({obs_, a, step.reward, step.next_obs, step.done, step.truncated});
  ++env_steps_;
  if (step.finished()) {
    ++episodes_;
    obs_ = env_->reset(episode_seed(stream_seed(seed_, Stream::kEnv), episodes_));
  } else {
    obs_ = std::move(step.next_obs);
  }
  maybe_sync(TargetUpdateUnit::kEnvSteps, env_steps_);
  if (env_steps_ % config_.eval_interval == 0 || env_steps_ == config_.total_steps) evaluate_and_log();
}

void Trainer::log_model_loss(double loss) {
  model_losses_.push_back(loss);
  if (model_log_) *model_log_ << model_steps_ << ',' << format_value(loss) << '\n';
}

void Trainer::apply_model_gate() {
  if (config_.gate_loss > 0.0 && agent_->model() != nullptr) {
    agent_->set_model_trusted(model_steps_ > 0 && model_loss_ema_ < config_.gate_loss);
  }
}

void Trainer::train_block() {
  if (buffer_.size() < config_.effective_learning_starts()) return;
  if (agent_->model() != nullptr) {
    for (std::size_t k = 0; k < config_.model_updates_per_collect; ++k) {
      const Batch batch = buffer_.sample(config_.model_batch, model_sample_rng_);
      const double loss = agent_->update_model(batch, model_noise_rng_);
      ++model_steps_;
      model_loss_sum_ += loss;
      ++model_updates_;
      log_model_loss(loss);
      model_loss_ema_ = model_steps_ == 1 ? loss : 0.99 * model_loss_ema_ + 0.01 * loss;
    }
    apply_model_gate();
    if (model_log_) model_log_->flush();
  }
  for (std::size_t u = 0; u < config_.q_updates_per_collect; ++u) {
    const Batch batch = buffer_.sample(config_.q_batch, q_sample_rng_);
    const QUpdateStats stats = agent_->update_q(batch, successor_rng_);
    ++grad_steps_;
    q_loss_sum_ += stats.loss;
    target_var_sum_ += stats.target_variance;
    ++q_updates_;
    maybe_sync(TargetUpdateUnit::kGradSteps, grad_steps_);
    if (on_grad_step) on_grad_step(*this);
  }
}

void Trainer::evaluate_and_log() {
  const EvalResult ev = evaluate(*agent_, config_.env, config_.eval_episodes, stream_seed(seed_, Stream::kEval));
  MetricsRow row;
  row.wall_clock = config_.log_wall_clock ? now_seconds() - start_time_ : MetricsRow::kNaN;
  row.env_steps = env_steps_;
  row.grad_steps = grad_steps_;
  row.model_steps = model_steps_;
  row.eval_return_mean = ev.return_mean;
  row.eval_return_std = ev.return_std;
  row.eval_success_rate = ev.success_rate;
  row.q_discrepancy = ev.q_discrepancy;
  row.epsilon = config_.epsilon().at(env_steps_);
  if (q_updates_ > 0) {
    row.q_loss = q_loss_sum_ / static_cast<double>(q_updates_);
    row.target_variance_estimate = target_var_sum_ / static_cast<double>(q_updates_);
  }
  if (model_updates_ > 0) row.model_loss = model_loss_sum_ / static_cast<double>(model_updates_);
  q_loss_sum_ = target_var_sum_ = model_loss_sum_ = 0.0;
  q_updates_ = model_updates_ = 0;
  rows_.push_back(row);
  if (metrics_) metrics_->write(row);
}

void Trainer::dump_failure(const std::string& what) const {
  if (out_dir_.empty()) return;
  std::ofstream out(path("failure.txt"));
  out << "error: " << what << "\n"
      << "seed: " << seed_ << "\nenv_steps: " << env_steps_ << "\ngrad_steps: " << grad_steps_
      << "\nmodel_steps: " << model_steps_ << "\nepisodes: " << episodes_ << "\n"
      << "online_fingerprint: " << agent_->online_params().fingerprint() << "\n";
  try {
    checkpoint(path("failure.bin"));
  } catch (const Error&) {
    // The text dump above is still useful on its own.
  }
}

bool Trainer::run(std::optional<std::uint64_t> stop_at) {
  try {
    while (env_steps_ < config_.total_steps) {
      if (stop_at && env_steps_ >= *stop_at) {
        if (!out_dir_.empty()) checkpoint(path("checkpoint.bin"));
        return false;
      }
      const std::uint64_t block_start = env_steps_;
      for (std::size_t i = 0; i < config_.replay_frequency && env_steps_ < config_.total_steps; ++i) collect_step();
      train_block();
      if (config_.checkpoint_interval > 0 && !out_dir_.empty() &&
          env_steps_ / config_.checkpoint_interval != block_start / config_.checkpoint_interval) {
        checkpoint(path("checkpoint.bin"));
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kNonFiniteLoss) dump_failure(e.what());
    throw;
  }
  if (!out_dir_.empty()) checkpoint(path("checkpoint.bin"));
  return true;
}

std::string Trainer::checkpoint_bytes() const {
  ByteWriter out;
  out.put_string(to_ini(config_));
  out.put<std::uint64_t>(seed_);
  out.put<std::uint64_t>(env_steps_);
  out.put<std::uint64_t>(grad_steps_);
  out.put<std::uint64_t>(model_steps_);
  out.put<std::uint64_t>(episodes_);
  out.put<std::uint64_t>(target_syncs_);
  out.put_doubles(obs_);
  out.put<double>(q_loss_sum_);
  out.put<double>(target_var_sum_);
  out.put<std::uint64_t>(q_updates_);
  out.put<double>(model_loss_sum_);
  out.put<std::uint64_t>(model_updates_);
  out.put<double>(model_loss_ema_);
  for (const Rng* r : {&explore_rng_, &q_sample_rng_, &model_sample_rng_, &model_noise_rng_, &successor_rng_}) {
    out.put_string(r->state());
  }
  env_->save_state(out);
  agent_->save(out);
  buffer_.save(out);
  return out.take();
}

void Trainer::checkpoint(const std::string& file) const { write_checkpoint_file(file, checkpoint_bytes()); }

std::unique_ptr<Trainer> Trainer::resume(const std::string& checkpoint_path, std::string out_dir) {
  const std::string payload = read_checkpoint_file(checkpoint_path);
  ByteReader in(payload);
  TrainConfig config = parse_config(in.get_string());
  const auto seed = in.get<std::uint64_t>();
  std::unique_ptr<Trainer> t(new Trainer(Restore{}, std::move(config), seed, std::move(out_dir)));
  t->env_steps_ = in.get<std::uint64_t>();
  t->grad_steps_ = in.get<std::uint64_t>();
  t->model_steps_ = in.get<std::uint64_t>();
  t->episodes_ = in.get<std::uint64_t>();
  t->target_syncs_ = in.get<std::uint64_t>();
  t->obs_ = in.get_doubles();
  t->q_loss_sum_ = in.get<double>();
  t->target_var_sum_ = in.get<double>();
  t->q_updates_ = in.get<std::uint64_t>();
  t->model_loss_sum_ = in.get<double>();
  t->model_updates_ = in.get<std::uint64_t>();
  t->model_loss_ema_ = in.get<double>();
  for (Rng* r : {&t->explore_rng_, &t->q_sample_rng_, &t->model_sample_rng_, &t->model_noise_rng_,
                 &t->successor_rng_}) {
    r->set_state(in.get_string());
  }
  t->env_->load_state(in);
  t->agent_->load(in);
  t->buffer_.load(in);
  t->apply_model_gate();
  if (!in.at_end()) fail(ErrorKind::kCorruptChecksum, checkpoint_path + ": trailing bytes in checkpoint");

  if (!t->out_dir_.empty()) {
    std::filesystem::create_directories(t->out_dir_);
    std::ofstream(t->path("config.ini")) << to_ini(t->config_);
    // Drop anything an interrupted run logged after this checkpoint.
    truncate_csv_after(t->path("metrics.csv"), "env_steps", static_cast<double>(t->env_steps_));
    truncate_csv_after(t->path("model_loss.csv"), "model_step", static_cast<double>(t->model_steps_));
    t->open_logs(true);
  }
  return t;
}

}  // namespace sadq

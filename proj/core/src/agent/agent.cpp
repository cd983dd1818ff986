#include "sadq/agent/agent.hpp"

#include <cmath>

#include "sadq/common/error.hpp"

namespace sadq {

using nn::Matrix;

std::string to_string(AgentVariant v) {
  switch (v) {
    case AgentVariant::kDqn: return "dqn";
    case AgentVariant::kDueling: return "dueling";
    case AgentVariant::kSadq: return "sadq";
    case AgentVariant::kSadqDist: return "sadq-dist";
    case AgentVariant::kQrDqn: return "qr-dqn";
  }
  return "?";
}

AgentVariant parse_variant(const std::string& name) {
  for (auto v : {AgentVariant::kDqn, AgentVariant::kDueling, AgentVariant::kSadq, AgentVariant::kSadqDist,
                 AgentVariant::kQrDqn}) {
    if (to_string(v) == name) return v;
  }
  fail(ErrorKind::kConfigInvalid, "agent.variant: unknown agent '" + name + "'");
}

void AgentConfig::validate() const {
  mix.validate();
  if (obs_dim == 0 || action_count == 0) fail(ErrorKind::kConfigInvalid, "environment has no observations or actions");
  if (q_hidden.empty()) fail(ErrorKind::kConfigInvalid, "q.hidden must list at least one layer");
  if (distributional() && atoms == 0) fail(ErrorKind::kConfigInvalid, "agent.atoms must be > 0");
  if (!(q_adam.lr > 0.0)) fail(ErrorKind::kConfigInvalid, "q.lr must be > 0");
  if (uses_model() && !(model_adam.lr > 0.0)) fail(ErrorKind::kConfigInvalid, "model.lr must be > 0");
  if (!(kappa > 0.0)) fail(ErrorKind::kConfigInvalid, "agent.kappa must be > 0");
}

Matrix observation_row(const Observation& s) {
  return Eigen::Map<const Matrix>(s.data(), 1, static_cast<Eigen::Index>(s.size()));
}

namespace {

std::unique_ptr<nn::QNetwork> build_net(const AgentConfig& c, nn::ParamSet& params, Rng& rng) {
  switch (c.variant) {
    case AgentVariant::kDqn:
      return std::make_unique<nn::PlainQNet>(c.obs_dim, c.q_hidden, c.action_count, params, rng);
    case AgentVariant::kDueling:
    case AgentVariant::kSadq:
      return std::make_unique<nn::DuelingNet>(c.obs_dim, c.q_hidden, c.action_count, c.dueling_mean_subtract, params,
                                              rng);
    case AgentVariant::kSadqDist:
    case AgentVariant::kQrDqn:
      return std::make_unique<nn::QuantileNet>(c.obs_dim, c.q_hidden, c.action_count, c.atoms, params, rng);
  }
  fail(ErrorKind::kConfigInvalid, "agent.variant");
}

AgentConfig checked(AgentConfig c) {
  c.validate();
  c.model.obs_dim = c.obs_dim;
  c.model.action_count = c.action_count;
  return c;
}

}  // namespace

Agent::Agent(AgentConfig config, Rng& q_init, Rng& model_init)
    : config_(checked(std::move(config))),
      net_(build_net(config_, online_, q_init)),
      q_opt_(online_, config_.q_adam) {
  target_ = online_;
  if (config_.uses_model()) {
    model_ = std::make_unique<DynModel>(config_.model, model_init);
    model_opt_.emplace(model_->params(), config_.model_adam);
  }
}

std::vector<double> Agent::q_values(const Observation& s) const {
  const Matrix q = net_->q_values(online_, observation_row(s));
  return {q.data(), q.data() + q.size()};
}

std::vector<double> Agent::successor_values(const Observation& s, Rng& successor_rng) const {
  if (!model_) fail(ErrorKind::kConfigInvalid, "agent variant " + to_string(config_.variant) + " has no model");
  const Matrix succ = model_->predict_all_successors(s, successor_rng);
  const Matrix v = net_->state_values(online_, succ);
  return {v.data(), v.data() + v.size()};
}

ActionId Agent::greedy_action(const Observation& s, Rng& successor_rng) const {
  const auto q = q_values(s);
  if (!model_ || !model_trusted_) {
    const std::vector<double> zeros(q.size(), 0.0);
    return sadq_action(q, zeros, 0.0);
  }
  return sadq_action(q, successor_values(s, successor_rng), config_.mix.beta);
}

std::vector<double> Agent::scalar_targets(const Batch& batch, Rng& successor_rng) const {
  if (config_.distributional()) fail(ErrorKind::kConfigInvalid, "scalar targets requested from a quantile agent");
  const auto b = static_cast<Eigen::Index>(batch.size());
  const auto na = static_cast<Eigen::Index>(config_.action_count);
  const Matrix max_next = net_->q_values(target_, batch.s_next).rowwise().maxCoeff();

  const bool use_model = model_ && model_trusted_;
  Matrix cand_values;
  if (use_model) {
    const Matrix cands = model_->predict_all_successors(batch.s, successor_rng);
    cand_values = net_->state_values(target_, cands);  // (B * A) x 1, batch-major
  }
  std::vector<double> y(batch.size());
  for (Eigen::Index i = 0; i < b; ++i) {
    const bool done = batch.done[i] != 0;
    if (use_model) {
      const auto best = select_promising_successor({cand_values.data() + i * na, static_cast<std::size_t>(na)});
      y[i] = sadq_target(batch.r[i], config_.mix, best.value, max_next(i, 0), done);
    } else {
      y[i] = dqn_target(batch.r[i], config_.mix.gamma, max_next(i, 0), done);
    }
  }
  return y;
}

Matrix Agent::dist_targets(const Batch& batch, Rng& successor_rng) const {
  if (!config_.distributional()) fail(ErrorKind::kConfigInvalid, "distributional targets requested from a scalar agent");
  const auto b = static_cast<Eigen::Index>(batch.size());
  const auto na = static_cast<Eigen::Index>(config_.action_count);
  const auto n = static_cast<Eigen::Index>(config_.atoms);

  const Matrix z_next_all = net_->raw_output(target_, batch.s_next);
  const Matrix q_next = net_->q_values(target_, batch.s_next);

  const bool use_model = model_ && model_trusted_;
  Matrix cand_atoms;
  Matrix cand_q;
  if (use_model) {
    const Matrix cands = model_->predict_all_successors(batch.s, successor_rng);
    cand_atoms = net_->raw_output(target_, cands);
    cand_q = net_->q_values(target_, cands);  // (B * A) x A
  }

  TargetMix mix = config_.mix;
  if (!use_model) mix.alpha = 1.0;
  Matrix out(b, n);
  std::vector<double> z_next(static_cast<std::size_t>(n));
  std::vector<double> z_hat(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto greedy = select_promising_successor({q_next.row(i).data(), static_cast<std::size_t>(na)}).index;
    for (Eigen::Index j = 0; j < n; ++j) z_next[j] = z_next_all(i, static_cast<Eigen::Index>(greedy) * n + j);
    if (use_model) {
      const auto pick = select_promising_successor_dist(
          {cand_q.row(i * na).data(), static_cast<std::size_t>(na * na)}, static_cast<std::size_t>(na));
      const Eigen::Index row = i * na + static_cast<Eigen::Index>(pick.candidate);
      for (Eigen::Index j = 0; j < n; ++j) z_hat[j] = cand_atoms(row, static_cast<Eigen::Index>(pick.action) * n + j);
    } else {
      z_hat = z_next;
    }
    const bool done = batch.done[i] != 0;
    const auto t = config_.dist_mode == DistTargetMode::kMixture
                       ? sadq_dist_target_mixture(batch.r[i], mix, z_hat, z_next, done)
                       : sadq_dist_target(batch.r[i], mix, z_hat, z_next, done);
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = t[j];
  }
  return out;
}

nn::Var Agent::q_loss(nn::Tape& tape, const Batch& batch, const Matrix& targets) const {
  if (batch.size() == 0) fail(ErrorKind::kEmptyBatch, "Q update on an empty batch");
  const nn::Var raw = net_->forward(tape, online_, tape.constant(batch.s));
  if (config_.distributional()) {
    const auto* qn = static_cast<const nn::QuantileNet*>(net_.get());
    const nn::Var pred = tape.gather_block(raw, batch.a, config_.atoms);
    return tape.quantile_huber(pred, targets, qn->fractions(), config_.kappa);
  }
  const nn::Var diff = tape.sub(tape.gather(raw, batch.a), tape.constant(targets));
  return config_.q_loss == QLoss::kHuber ? tape.mean(tape.huber(diff, 1.0)) : tape.mean(tape.square(diff));
}

QUpdateStats Agent::update_q(const Batch& batch, Rng& successor_rng) {
  if (batch.size() == 0) fail(ErrorKind::kEmptyBatch, "Q update on an empty batch");
  Matrix targets;
  if (config_.distributional()) {
    targets = dist_targets(batch, successor_rng);
  } else {
    const auto y = scalar_targets(batch, successor_rng);
    targets = Eigen::Map<const Matrix>(y.data(), static_cast<Eigen::Index>(y.size()), 1);
  }
  QUpdateStats stats;
  const Matrix per_sample = targets.rowwise().mean();
  stats.target_mean = per_sample.mean();
  stats.target_variance = (per_sample.array() - stats.target_mean).square().mean();

  nn::Tape tape;
  const nn::Var loss = q_loss(tape, batch, targets);
  stats.loss = tape.value(loss)(0, 0);
  if (!std::isfinite(stats.loss)) fail(ErrorKind::kNonFiniteLoss, "Q loss is " + std::to_string(stats.loss));
  nn::adam_step(online_, tape.gradients(loss, online_), q_opt_);
  return stats;
}

double Agent::update_model(const Batch& batch, Rng& noise_rng) {
  if (!model_) fail(ErrorKind::kConfigInvalid, "agent variant " + to_string(config_.variant) + " has no model");
  const Matrix noise = standard_normal(batch.s.rows(), batch.s.cols(), noise_rng);
  nn::Tape tape;
  const nn::Var loss = model_->loss(tape, batch.s, batch.a, batch.s_next, noise);
  const double value = tape.value(loss)(0, 0);
  if (!std::isfinite(value)) fail(ErrorKind::kNonFiniteLoss, "model loss is " + std::to_string(value));
  nn::adam_step(model_->params(), tape.gradients(loss, model_->params()), *model_opt_);
  return value;
}

void Agent::sync_target() { nn::sync_target(online_, target_); }

void Agent::save(ByteWriter& out) const {
  online_.save(out);
  target_.save(out);
  q_opt_.save(out);
  out.put_bool(model_ != nullptr);
  if (model_) {
    model_->params().save(out);
    model_opt_->save(out);
  }
}

void Agent::load(ByteReader& in) {
  online_.load(in);
  target_.load(in);
  q_opt_.load(in);
  if (in.get_bool() != (model_ != nullptr)) fail(ErrorKind::kShapeMismatch, "checkpoint model presence differs");
  if (model_) {
    model_->params().load(in);
    model_opt_->load(in);
  }
}

}  // namespace sadq

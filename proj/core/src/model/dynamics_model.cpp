#include "sadq/model/dynamics_model.hpp"

#include "sadq/common/error.hpp"

namespace sadq {

using nn::Matrix;
using nn::Tape;
using nn::Var;

namespace {

nn::MlpSpec head_spec(const DynModelConfig& c) {
  return {.input_dim = c.obs_dim + c.action_count, .hidden_sizes = c.hidden, .output_dim = c.obs_dim};
}

Matrix row_of(const Observation& s) {
  Matrix m(1, static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = s[i];
  return m;
}

}  // namespace

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

DynModel::DynModel(DynModelConfig config, Rng& init_rng)
    : config_(std::move(config)),
      mu_(head_spec(config_), params_, "model.mu", init_rng),
      sigma_(head_spec(config_), params_, "model.logvar", init_rng) {
  if (!(config_.state_norm > 0.0)) fail(ErrorKind::kConfigInvalid, "model.state_norm must be > 0");
  if (!(config_.logvar_min < config_.logvar_max)) fail(ErrorKind::kConfigInvalid, "model log-variance bounds");
}

Matrix DynModel::encode(const Matrix& states, std::span<const std::size_t> actions) const {
  const auto d = static_cast<Eigen::Index>(config_.obs_dim);
  const auto a = static_cast<Eigen::Index>(config_.action_count);
  if (states.cols() != d) {
    fail(ErrorKind::kShapeMismatch, "model input has " + std::to_string(states.cols()) + " state columns, expected " +
                                        std::to_string(d));
  }
  if (actions.size() != static_cast<std::size_t>(states.rows())) fail(ErrorKind::kShapeMismatch, "model action count");
  Matrix x = Matrix::Zero(states.rows(), d + a);
  x.leftCols(d) = states / config_.state_norm;
  for (Eigen::Index r = 0; r < states.rows(); ++r) {
    if (actions[r] >= config_.action_count) fail(ErrorKind::kInvalidAction, "model: action out of range");
    x(r, d + static_cast<Eigen::Index>(actions[r])) = 1.0;
  }
  return x;
}

DynModel::Distribution DynModel::predict_distribution(const Matrix& states, std::span<const std::size_t> actions) const {
  const Matrix x = encode(states, actions);
  Distribution out;
  out.mean = mu_.forward(params_, x);
  out.var = sigma_.forward(params_, x).cwiseMax(config_.logvar_min).cwiseMin(config_.logvar_max).array().exp().matrix();
  return out;
}

DynModel::Distribution DynModel::predict_distribution(const Observation& s, ActionId a) const {
  const std::size_t action = a.index;
  return predict_distribution(row_of(s), std::span<const std::size_t>(&action, 1));
}

Matrix DynModel::sample_successor(const Distribution& dist, const Matrix& noise) {
  if (noise.rows() != dist.mean.rows() || noise.cols() != dist.mean.cols()) {
    fail(ErrorKind::kShapeMismatch, "noise shape does not match the predicted mean");
  }
  return dist.mean + dist.var.cwiseSqrt().cwiseProduct(noise);
}

Matrix DynModel::sample_successor(const Observation& s, ActionId a, Rng& rng) const {
  const auto dist = predict_distribution(s, a);
  return sample_successor(dist, standard_normal(dist.mean.rows(), dist.mean.cols(), rng));
}

Matrix DynModel::predict_all_successors(const Matrix& states, Rng& rng, bool zero_noise) const {
  const auto a = static_cast<Eigen::Index>(config_.action_count);
  Matrix repeated(states.rows() * a, states.cols());
  std::vector<std::size_t> actions(static_cast<std::size_t>(repeated.rows()));
  for (Eigen::Index b = 0; b < states.rows(); ++b) {
    for (Eigen::Index k = 0; k < a; ++k) {
      repeated.row(b * a + k) = states.row(b);
      actions[static_cast<std::size_t>(b * a + k)] = static_cast<std::size_t>(k);
    }
  }
  const auto dist = predict_distribution(repeated, actions);
  const Matrix noise = zero_noise ? Matrix::Zero(dist.mean.rows(), dist.mean.cols())
                                  : standard_normal(dist.mean.rows(), dist.mean.cols(), rng);
  return sample_successor(dist, noise) * config_.state_norm;
}

Matrix DynModel::predict_all_successors(const Observation& s, Rng& rng, bool zero_noise) const {
  return predict_all_successors(row_of(s), rng, zero_noise);
}

Var DynModel::loss(Tape& tape, const Matrix& states, std::span<const std::size_t> actions, const Matrix& next_states,
                   const Matrix& noise) const {
  if (states.rows() == 0) fail(ErrorKind::kEmptyBatch, "model loss on an empty batch");
  if (next_states.rows() != states.rows() || next_states.cols() != states.cols()) {
    fail(ErrorKind::kShapeMismatch, "model loss: next-state shape");
  }
  Var x = tape.constant(encode(states, actions));
  Var mean = mu_.forward(tape, params_, x);
  Var logvar = tape.clamp(sigma_.forward(tape, params_, x), config_.logvar_min, config_.logvar_max);
  Var target = tape.constant(next_states / config_.state_norm);

  if (config_.loss == ModelLoss::kGaussianNll) {
    // 0.5 * (log var + (target - mean)^2 / var)
    Var err2 = tape.square(tape.sub(target, mean));
    Var inv_var = tape.exp(tape.scale(logvar, -1.0));
    return tape.scale(tape.mean(tape.add(logvar, tape.mul(err2, inv_var))), 0.5);
  }
  if (noise.rows() != states.rows() || noise.cols() != states.cols()) {
    fail(ErrorKind::kShapeMismatch, "model loss: noise shape");
  }
  Var stddev = tape.exp(tape.scale(logvar, 0.5));
  Var sample = tape.add(mean, tape.mul(stddev, tape.constant(noise)));
  return tape.mean(tape.square(tape.sub(sample, target)));
}

double DynModel::loss_value(const Matrix& states, std::span<const std::size_t> actions, const Matrix& next_states,
                            Rng& rng) const {
  Tape tape;
  const Matrix noise = standard_normal(states.rows(), states.cols(), rng);
  return tape.value(loss(tape, states, actions, next_states, noise))(0, 0);
}

}  // namespace sadq

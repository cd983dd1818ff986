#include "sadq/nn/adam.hpp"

#include <cmath>

#include "sadq/common/error.hpp"

namespace sadq::nn {

AdamState::AdamState(const ParamSet& params, AdamConfig config)
    : config_(config), m_(zero_gradients(params)), v_(zero_gradients(params)) {}

void adam_step(ParamSet& params, const Gradients& grads, AdamState& state) {
  if (grads.size() != params.size() || state.m_.size() != params.size()) {
    fail(ErrorKind::kShapeMismatch, "adam: gradient count does not match parameters");
  }
  const auto& c = state.config_;
  ++state.steps_;
  const double t = static_cast<double>(state.steps_);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = grads[i];
    auto p = params.mutable_value(i);
    if (g.rows() != p.rows() || g.cols() != p.cols()) fail(ErrorKind::kShapeMismatch, "adam: gradient shape for " + params.name(i));
    Matrix& m = state.m_[i];
    Matrix& v = state.v_[i];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    p.array() -= c.lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.eps);
  }
}

void AdamState::save(ByteWriter& out) const {
  out.put(steps_);
  out.put<std::uint64_t>(m_.size());
  for (std::size_t i = 0; i < m_.size(); ++i) {
    out.put_doubles(m_[i].data(), static_cast<std::size_t>(m_[i].size()));
    out.put_doubles(v_[i].data(), static_cast<std::size_t>(v_[i].size()));
  }
}

void AdamState::load(ByteReader& in) {
  steps_ = in.get<std::uint64_t>();
  if (in.get<std::uint64_t>() != m_.size()) fail(ErrorKind::kVersionMismatch, "adam state layout differs");
  for (std::size_t i = 0; i < m_.size(); ++i) {
    for (Matrix* target : {&m_[i], &v_[i]}) {
      const auto data = in.get_doubles();
      if (data.size() != static_cast<std::size_t>(target->size())) fail(ErrorKind::kVersionMismatch, "adam moment size");
      std::copy(data.begin(), data.end(), target->data());
    }
  }
}

}  // namespace sadq::nn

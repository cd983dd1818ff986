#include "sadq/nn/mlp.hpp"

#include <cmath>

#include "sadq/common/error.hpp"

namespace sadq::nn {
namespace {

Matrix uniform_init(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

Mlp::Mlp(MlpSpec spec, ParamSet& params, const std::string& prefix, Rng& init_rng) : spec_(std::move(spec)) {
  if (spec_.input_dim == 0 || spec_.output_dim == 0) fail(ErrorKind::kConfigInvalid, prefix + ": dims must be >= 1");
  std::vector<std::size_t> dims{spec_.input_dim};
  for (auto h : spec_.hidden_sizes) {
    if (h == 0) fail(ErrorKind::kConfigInvalid, prefix + ": hidden sizes must be >= 1");
    dims.push_back(h);
  }
  dims.push_back(spec_.output_dim);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(dims[i]);
    const auto out = static_cast<Eigen::Index>(dims[i + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    const std::string base = prefix + ".l" + std::to_string(i);
    Layer layer;
    layer.weight = params.add(base + ".weight", uniform_init(in, out, bound, init_rng));
    layer.bias = params.add(base + ".bias", uniform_init(1, out, bound, init_rng));
    layers_.push_back(layer);
  }
}

Var Mlp::forward(Tape& tape, const ParamSet& params, Var input) const {
  if (static_cast<std::size_t>(tape.value(input).cols()) != spec_.input_dim) {
    fail(ErrorKind::kShapeMismatch, "mlp input has " + std::to_string(tape.value(input).cols()) +
                                        " columns, expected " + std::to_string(spec_.input_dim));
  }
  Var h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = tape.add_row(tape.matmul(h, tape.parameter(params, layers_[i].weight)),
                     tape.parameter(params, layers_[i].bias));
    const bool last = i + 1 == layers_.size();
    if (!last || spec_.activate_output) {
      h = spec_.activation == Activation::kRelu ? tape.relu(h) : tape.tanh(h);
    }
  }
  return h;
}

Matrix Mlp::forward(const ParamSet& params, const Matrix& input) const {
  if (static_cast<std::size_t>(input.cols()) != spec_.input_dim) {
    fail(ErrorKind::kShapeMismatch, "mlp input has " + std::to_string(input.cols()) + " columns, expected " +
                                        std::to_string(spec_.input_dim));
  }
  Matrix h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix next = h * params.value(layers_[i].weight);
    next.rowwise() += params.value(layers_[i].bias).row(0);
    const bool last = i + 1 == layers_.size();
    if (!last || spec_.activate_output) {
      if (spec_.activation == Activation::kRelu) {
        next = next.cwiseMax(0.0);
      } else {
        next = next.array().tanh().matrix();
      }
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace sadq::nn

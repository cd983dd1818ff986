#include "sadq/nn/networks.hpp"

#include "sadq/common/error.hpp"

namespace sadq::nn {

std::vector<double> midpoint_fractions(std::size_t n) {
  std::vector<double> taus(n);
  for (std::size_t i = 0; i < n; ++i) taus[i] = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n));
  return taus;
}

Matrix QNetwork::raw_output(const ParamSet& params, const Matrix& obs) const {
  Tape tape;
  return tape.value(forward(tape, params, tape.constant(obs)));
}

Matrix QNetwork::q_values(const ParamSet& params, const Matrix& obs) const { return raw_output(params, obs); }

Matrix QNetwork::state_values(const ParamSet& params, const Matrix& obs) const {
  return q_values(params, obs).rowwise().maxCoeff();
}

PlainQNet::PlainQNet(std::size_t obs_dim, const std::vector<std::size_t>& hidden, std::size_t actions,
                     ParamSet& params, Rng& init_rng)
    : mlp_({.input_dim = obs_dim, .hidden_sizes = hidden, .output_dim = actions}, params, "q", init_rng) {}

Var PlainQNet::forward(Tape& tape, const ParamSet& params, Var obs) const { return mlp_.forward(tape, params, obs); }

namespace {

MlpSpec trunk_spec(std::size_t obs_dim, const std::vector<std::size_t>& hidden) {
  if (hidden.empty()) fail(ErrorKind::kConfigInvalid, "dueling network needs at least one hidden layer");
  return {.input_dim = obs_dim,
          .hidden_sizes = std::vector<std::size_t>(hidden.begin(), hidden.end() - 1),
          .output_dim = hidden.back(),
          .activate_output = true};
}

}  // namespace

DuelingNet::DuelingNet(std::size_t obs_dim, const std::vector<std::size_t>& hidden, std::size_t actions,
                       bool mean_subtract, ParamSet& params, Rng& init_rng)
    : trunk_(trunk_spec(obs_dim, hidden), params, "trunk", init_rng),
      value_({.input_dim = hidden.back(), .output_dim = 1}, params, "value", init_rng),
      advantage_({.input_dim = hidden.back(), .output_dim = actions}, params, "advantage", init_rng),
      mean_subtract_(mean_subtract) {}

Var DuelingNet::combine(Tape& tape, Var value, Var advantage) const {
  Var centred = mean_subtract_ ? tape.sub_col(advantage, tape.row_mean(advantage)) : advantage;
  return tape.add_col(centred, value);
}

DuelingNet::Heads DuelingNet::heads(Tape& tape, const ParamSet& params, Var obs) const {
  Var features = trunk_.forward(tape, params, obs);
  Heads h;
  h.value = value_.forward(tape, params, features);
  h.advantage = advantage_.forward(tape, params, features);
  h.q = combine(tape, h.value, h.advantage);
  return h;
}

Var DuelingNet::forward(Tape& tape, const ParamSet& params, Var obs) const { return heads(tape, params, obs).q; }

Matrix DuelingNet::state_values(const ParamSet& params, const Matrix& obs) const {
  return value_.forward(params, trunk_.forward(params, obs));
}

QuantileNet::QuantileNet(std::size_t obs_dim, const std::vector<std::size_t>& hidden, std::size_t actions,
                         std::size_t atoms, ParamSet& params, Rng& init_rng)
    : mlp_({.input_dim = obs_dim, .hidden_sizes = hidden, .output_dim = actions * atoms}, params, "z", init_rng),
      actions_(actions),
      atoms_(atoms),
      fractions_(midpoint_fractions(atoms)) {
  if (atoms == 0) fail(ErrorKind::kConfigInvalid, "quantile network needs at least one atom");
}

Var QuantileNet::forward(Tape& tape, const ParamSet& params, Var obs) const { return mlp_.forward(tape, params, obs); }

Matrix QuantileNet::q_values(const ParamSet& params, const Matrix& obs) const {
  const Matrix atoms = mlp_.forward(params, obs);
  Matrix q(atoms.rows(), static_cast<Eigen::Index>(actions_));
  const auto n = static_cast<Eigen::Index>(atoms_);
  for (Eigen::Index a = 0; a < q.cols(); ++a) q.col(a) = atoms.middleCols(a * n, n).rowwise().mean();
  return q;
}

}  // namespace sadq::nn

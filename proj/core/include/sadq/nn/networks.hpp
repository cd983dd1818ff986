#pragma once

#include <memory>
#include <vector>

#include "sadq/nn/mlp.hpp"

namespace sadq::nn {

/// Action-value function approximator. Scalar networks emit one value per
/// action; distributional networks emit atom_count() quantile atoms per
/// action laid out action-major (column a * N + i).
class QNetwork {
 public:
  virtual ~QNetwork() = default;

  virtual std::size_t obs_dim() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::size_t atom_count() const { return 1; }
  virtual bool has_value_head() const { return false; }

  /// Differentiable raw output: B x A, or B x (A * N) for quantile networks.
  virtual Var forward(Tape& tape, const ParamSet& params, Var obs) const = 0;

  Matrix raw_output(const ParamSet& params, const Matrix& obs) const;
  /// Expected action values, B x A.
  virtual Matrix q_values(const ParamSet& params, const Matrix& obs) const;
  /// State values, B x 1: the value head when there is one, max_a Q otherwise.
  virtual Matrix state_values(const ParamSet& params, const Matrix& obs) const;
};

/// Plain MLP from observation to one output per action.
class PlainQNet final : public QNetwork {
 public:
  PlainQNet(std::size_t obs_dim, const std::vector<std::size_t>& hidden, std::size_t actions, ParamSet& params,
            Rng& init_rng);

  std::size_t obs_dim() const override { return mlp_.spec().input_dim; }
  std::size_t action_count() const override { return mlp_.spec().output_dim; }
  Var forward(Tape& tape, const ParamSet& params, Var obs) const override;

 private:
  Mlp mlp_;
};

/// Shared trunk with a scalar value head and an advantage head:
/// Q(s, a) = V(s) + A(s, a) - mean_a A(s, a). With mean subtraction disabled
/// the plain sum V + A is used.
class DuelingNet final : public QNetwork {
 public:
  struct Heads {
    Var value;      // B x 1
    Var advantage;  // B x A
    Var q;          // B x A
  };

  DuelingNet(std::size_t obs_dim, const std::vector<std::size_t>& hidden, std::size_t actions, bool mean_subtract,
             ParamSet& params, Rng& init_rng);

  std::size_t obs_dim() const override { return trunk_.spec().input_dim; }
  std::size_t action_count() const override { return advantage_.spec().output_dim; }
  bool has_value_head() const override { return true; }
  bool mean_subtract() const { return mean_subtract_; }

  Heads heads(Tape& tape, const ParamSet& params, Var obs) const;
  /// Combines value and advantage columns into Q.
  Var combine(Tape& tape, Var value, Var advantage) const;
  Var forward(Tape& tape, const ParamSet& params, Var obs) const override;
  Matrix state_values(const ParamSet& params, const Matrix& obs) const override;

 private:
  Mlp trunk_;
  Mlp value_;
  Mlp advantage_;
  bool mean_subtract_;
};

/// MLP emitting N quantile atoms per action at fixed midpoint fractions
/// (2i + 1) / (2N).
class QuantileNet final : public QNetwork {
 public:
  QuantileNet(std::size_t obs_dim, const std::vector<std::size_t>& hidden, std::size_t actions, std::size_t atoms,
              ParamSet& params, Rng& init_rng);

  std::size_t obs_dim() const override { return mlp_.spec().input_dim; }
  std::size_t action_count() const override { return actions_; }
  std::size_t atom_count() const override { return atoms_; }
  const std::vector<double>& fractions() const { return fractions_; }

  Var forward(Tape& tape, const ParamSet& params, Var obs) const override;
  Matrix q_values(const ParamSet& params, const Matrix& obs) const override;

 private:
  Mlp mlp_;
  std::size_t actions_;
  std::size_t atoms_;
  std::vector<double> fractions_;
};

std::vector<double> midpoint_fractions(std::size_t n);

}  // namespace sadq::nn

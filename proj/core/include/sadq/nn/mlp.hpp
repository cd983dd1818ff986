#pragma once

#include <string>
#include <vector>

#include "sadq/common/rng.hpp"
#include "sadq/nn/param_set.hpp"
#include "sadq/nn/tape.hpp"

namespace sadq::nn {

enum class Activation { kRelu, kTanh };

struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_sizes;
  std::size_t output_dim = 1;
  Activation activation = Activation::kRelu;
  /// Apply the activation after the final affine layer too (trunks).
  bool activate_output = false;
};

/// Stack of affine layers with activations in between. The parameters live in
/// an external ParamSet so online and target copies share one structure.
class Mlp {
 public:
  /// Registers "<prefix>.l<i>.weight" (in x out) and "<prefix>.l<i>.bias"
  /// (1 x out) in params, initialised uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Mlp(MlpSpec spec, ParamSet& params, const std::string& prefix, Rng& init_rng);

  const MlpSpec& spec() const { return spec_; }

  Var forward(Tape& tape, const ParamSet& params, Var input) const;
  Matrix forward(const ParamSet& params, const Matrix& input) const;

 private:
  struct Layer {
    std::size_t weight;
    std::size_t bias;
  };

  MlpSpec spec_;
  std::vector<Layer> layers_;
};

}  // namespace sadq::nn

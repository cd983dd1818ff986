#pragma once

#include <functional>

#include <string>

#include "sadq/common/rng.hpp"
#include "sadq/nn/param_set.hpp"
#include "sadq/nn/tape.hpp"

namespace sadq::testing {

/// Builds a scalar loss on a fresh tape from the current parameter values.
using LossFn = std::function<nn::Var(nn::Tape&, const nn::ParamSet&)>;

struct GradCheck {
  double max_relative_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

/// Compares tape gradients with central differences on every parameter entry.
/// Relative error is |g - g_fd| / max(|g|, |g_fd|, floor).
GradCheck check_gradients(nn::ParamSet& params, const LossFn& loss, double h = 1e-6, double floor = 1e-6);

double loss_value(const nn::ParamSet& params, const LossFn& loss);

}  // namespace sadq::testing

namespace sadq::testing {

/// Index of a named parameter array; aborts the test binary when absent.
std::size_t param_index(const nn::ParamSet& params, const std::string& name);

/// Every array filled with uniform(-scale, scale) draws.
void randomize(nn::ParamSet& params, Rng& rng, double scale = 1.0);

nn::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0);

}  // namespace sadq::testing

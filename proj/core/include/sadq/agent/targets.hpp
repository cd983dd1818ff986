#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sadq/common/rng.hpp"
#include "sadq/env/environment.hpp"

namespace sadq {

/// Trade-off factors of the mixed target and of future-aware action selection.
struct TargetMix {
  double alpha = 1.0;  // weight of max_a' Q'(s', a') in the bootstrap term
  double beta = 0.0;   // weight of the predicted successor value when acting
  double gamma = 0.99;

  /// ConfigInvalid unless 0 <= alpha <= 1, beta >= 0 and 0 <= gamma < 1.
  void validate() const;
};

/// Return distribution as N atoms at fixed quantile fractions. Without weights
/// the fractions are uniform and the expectation is the plain mean.
struct QuantileVector {
  std::vector<double> atoms;
  /// Optional probability mass per atom (same length as atoms, sums to 1).
  std::vector<double> weights;
};

struct Selection {
  std::size_t index = 0;
  double value = 0.0;
};

/// Argmax over candidate values; ties go to the lowest index.
/// EmptyCandidates when values is empty.
Selection select_promising_successor(std::span<const double> values);

double sadq_target(double r, const TargetMix& mix, double v_hat, double max_q_next, bool done);
double dqn_target(double r, double gamma, double max_q_next, bool done);

/// argmax_a q[a] + beta * successor_values[a], lowest index on ties.
ActionId sadq_action(std::span<const double> q_values, std::span<const double> successor_values, double beta);

double dist_expectation(const QuantileVector& z);

struct DistSelection {
  std::size_t candidate = 0;
  std::size_t action = 0;
  double value = 0.0;
};

/// Best (candidate, action) pair by expected return. expectations is
/// row-major candidates x actions. Ties go to the lowest candidate, then the
/// lowest action.
DistSelection select_promising_successor_dist(std::span<const double> expectations, std::size_t action_count);

/// Atomwise r + gamma * ((1 - alpha) * z_hat[i] + alpha * z_next[i]); every
/// atom equals r when done.
std::vector<double> sadq_dist_target(double r, const TargetMix& mix, std::span<const double> z_hat,
                                     std::span<const double> z_next, bool done);

/// Alternative reading of the mixed distributional target: the two-component
/// mixture (weight 1 - alpha on z_hat, alpha on z_next) of equally weighted
/// atoms, projected back onto the midpoint fractions, then shifted and scaled
/// by r and gamma.
std::vector<double> sadq_dist_target_mixture(double r, const TargetMix& mix, std::span<const double> z_hat,
                                             std::span<const double> z_next, bool done);

ActionId epsilon_greedy(ActionId greedy, std::size_t action_count, double epsilon, Rng& rng);

/// max - min; EmptyVector when empty.
double q_discrepancy(std::span<const double> q_values);

}  // namespace sadq

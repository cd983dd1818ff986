#include "sadq/agent/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sadq/common/error.hpp"
#include "sadq/nn/networks.hpp"

namespace sadq {

void TargetMix::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::kConfigInvalid, "agent.alpha must lie in [0, 1]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorKind::kConfigInvalid, "agent.beta must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail(ErrorKind::kConfigInvalid, "q.gamma must lie in [0, 1)");
}

Selection select_promising_successor(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::kEmptyCandidates, "no candidate successors");
  Selection best{0, values[0]};
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > best.value) best = {i, values[i]};
  }
  return best;
}

double sadq_target(double r, const TargetMix& mix, double v_hat, double max_q_next, bool done) {
  if (done) return r;
  return r + mix.gamma * ((1.0 - mix.alpha) * v_hat + mix.alpha * max_q_next);
}

double dqn_target(double r, double gamma, double max_q_next, bool done) {
  if (done) return r;
  return r + gamma * max_q_next;
}

ActionId sadq_action(std::span<const double> q_values, std::span<const double> successor_values, double beta) {
  if (q_values.size() != successor_values.size()) {
    fail(ErrorKind::kShapeMismatch, "action scores: " + std::to_string(q_values.size()) + " Q values but " +
                                        std::to_string(successor_values.size()) + " successor values");
  }
  if (q_values.empty()) fail(ErrorKind::kShapeMismatch, "action scores: no actions");
  std::size_t best = 0;
  double best_score = q_values[0] + beta * successor_values[0];
  for (std::size_t a = 1; a < q_values.size(); ++a) {
    const double score = q_values[a] + beta * successor_values[a];
    if (score > best_score) {
      best = a;
      best_score = score;
    }
  }
  return ActionId{best};
}

double dist_expectation(const QuantileVector& z) {
  if (z.atoms.empty()) fail(ErrorKind::kEmptyVector, "quantile vector has no atoms");
  if (z.weights.empty()) {
    return std::accumulate(z.atoms.begin(), z.atoms.end(), 0.0) / static_cast<double>(z.atoms.size());
  }
  if (z.weights.size() != z.atoms.size()) fail(ErrorKind::kShapeMismatch, "quantile weights length");
  double e = 0.0;
  for (std::size_t i = 0; i < z.atoms.size(); ++i) e += z.weights[i] * z.atoms[i];
  return e;
}

DistSelection select_promising_successor_dist(std::span<const double> expectations, std::size_t action_count) {
  if (action_count == 0 || expectations.empty()) fail(ErrorKind::kEmptyCandidates, "no candidate successors");
  if (expectations.size() % action_count != 0) fail(ErrorKind::kShapeMismatch, "expectation table shape");
  DistSelection best{0, 0, expectations[0]};
  for (std::size_t i = 1; i < expectations.size(); ++i) {
    if (expectations[i] > best.value) best = {i / action_count, i % action_count, expectations[i]};
  }
  return best;
}

namespace {

void check_pair(std::span<const double> z_hat, std::span<const double> z_next) {
  if (z_hat.size() != z_next.size() || z_hat.empty()) {
    fail(ErrorKind::kShapeMismatch, "distributional target: atom counts " + std::to_string(z_hat.size()) + " and " +
                                        std::to_string(z_next.size()));
  }
}

}  // namespace

std::vector<double> sadq_dist_target(double r, const TargetMix& mix, std::span<const double> z_hat,
                                     std::span<const double> z_next, bool done) {
  check_pair(z_hat, z_next);
  std::vector<double> out(z_hat.size(), r);
  if (done) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = r + mix.gamma * ((1.0 - mix.alpha) * z_hat[i] + mix.alpha * z_next[i]);
  }
  return out;
}

std::vector<double> sadq_dist_target_mixture(double r, const TargetMix& mix, std::span<const double> z_hat,
                                             std::span<const double> z_next, bool done) {
  check_pair(z_hat, z_next);
  const std::size_t n = z_hat.size();
  std::vector<double> out(n, r);
  if (done) return out;

  struct Atom {
    double value;
    double mass;
  };
  std::vector<Atom> atoms;
  atoms.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    atoms.push_back({z_hat[i], (1.0 - mix.alpha) / static_cast<double>(n)});
    atoms.push_back({z_next[i], mix.alpha / static_cast<double>(n)});
  }
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.value < y.value; });

  const auto taus = nn::midpoint_fractions(n);
  std::size_t j = 0;
  double cdf = atoms[0].mass;
  for (std::size_t i = 0; i < n; ++i) {
    // Smallest atom whose cumulative mass reaches tau.
    while (cdf < taus[i] && j + 1 < atoms.size()) cdf += atoms[++j].mass;
    out[i] = r + mix.gamma * atoms[j].value;
  }
  return out;
}

ActionId epsilon_greedy(ActionId greedy, std::size_t action_count, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) return ActionId{rng.index(action_count)};
  return greedy;
}

double q_discrepancy(std::span<const double> q_values) {
  if (q_values.empty()) fail(ErrorKind::kEmptyVector, "q_discrepancy of an empty vector");
  const auto [lo, hi] = std::minmax_element(q_values.begin(), q_values.end());
  return *hi - *lo;
}

}  // namespace sadq

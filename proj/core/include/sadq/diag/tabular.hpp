#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sadq/common/rng.hpp"

namespace sadq {

/// Finite MDP with exact transition probabilities. Terminal states are
/// absorbing and worth zero.
struct TabularMdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> p;  // [s][a][s'] flattened
  std::vector<double> r;  // [s][a]
  double gamma = 0.9;
  std::vector<std::uint8_t> terminal;  // per state

  double prob(std::size_t s, std::size_t a, std::size_t s2) const {
    return p[(s * n_actions + a) * n_states + s2];
  }
  double reward(std::size_t s, std::size_t a) const { return r[s * n_actions + a]; }

  /// ConfigInvalid unless every row is a probability vector, rewards are finite
  /// and gamma lies in [0, 1).
  void validate() const;
  /// At least two successors with positive probability.
  bool stochastic(std::size_t s, std::size_t a) const;
};

/// Dirichlet(1) transition rows, rewards uniform(-1, 1), no terminal states.
TabularMdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma, Rng& rng);

struct OptimalValues {
  std::vector<double> q;  // [s][a]
  std::vector<double> v;  // [s], row max of q
  double residual = 0.0;  // sup-norm Bellman residual at exit
  std::size_t iterations = 0;

  double q_at(std::size_t s, std::size_t a, std::size_t n_actions) const { return q[s * n_actions + a]; }
};

OptimalValues value_iteration(const TabularMdp& mdp, double tol = 1e-12, std::size_t max_iterations = 100000);

/// Exact successor sampler (inverse CDF per (s, a) row).
class SuccessorSampler {
 public:
  explicit SuccessorSampler(const TabularMdp& mdp);
  std::size_t draw(std::size_t s, std::size_t a, Rng& rng) const;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> cdf_;
};

struct VarianceReport {
  std::size_t s = 0;
  std::size_t a = 0;
  double alpha = 0.0;
  double var_original = 0.0;  // Var(max_a' Q*(s', a'))
  double var_selected = 0.0;  // Var(V*(s_hat))
  double var_modified = 0.0;  // Var((1 - alpha) V*(s_hat) + alpha max_a' Q*(s', a'))
  double covariance = 0.0;    // Cov(V*(s_hat), max_a' Q*(s', a'))
  double bound = 0.0;         // ((1 - alpha)^2 + alpha^2) var_original
  bool degenerate = false;    // deterministic successor: nothing to compare

  bool holds() const { return !degenerate && var_modified < bound; }
};

/// For every (s, a): n draws of s' ~ P(.|s, a) and, per draw, one independent
/// exact successor for every action; s_hat is the draw with the highest V*.
std::vector<VarianceReport> variance_experiment(const TabularMdp& mdp, const OptimalValues& values, double alpha,
                                                std::size_t n_samples, Rng& rng);
/// Several trade-off factors evaluated on the same draws; reports are ordered
/// by (s, a), then by alpha.
std::vector<VarianceReport> variance_experiment(const TabularMdp& mdp, const OptimalValues& values,
                                                const std::vector<double>& alphas, std::size_t n_samples, Rng& rng);

struct BiasReport {
  std::size_t s = 0;
  std::size_t a = 0;
  double alpha = 0.0;
  bool on_policy = false;       // a is the action whose successors s_hat is drawn from
  double y_star = 0.0;          // r + gamma * E[max_a' Q*(s', a')], exact
  double bias_original = 0.0;   // mean(y_original) - y_star
  double bias_modified = 0.0;   // mean(y_modified) - y_star
  double difference_se = 0.0;   // standard error of mean(y_modified - y_original)
  double bias_argmax_all = 0.0; // mean target bias when s_hat is the best of one draw per action

  double difference() const { return bias_modified - bias_original; }
  bool within(double k) const { return std::abs(difference()) < k * difference_se || difference() == 0.0; }
};

/// Q' = Q* and exact successors. s_hat is drawn from P(.|s, a_hat) where
/// a_hat = argmax_a E[V*(s') | s, a], the action the selection step favours in
/// expectation; pairs with a == a_hat are the on-policy pairs. The literal
/// best-of-all-actions selection is reported separately as bias_argmax_all.
std::vector<BiasReport> bias_experiment(const TabularMdp& mdp, const OptimalValues& values, double alpha,
                                        std::size_t n_samples, Rng& rng);
std::vector<BiasReport> bias_experiment(const TabularMdp& mdp, const OptimalValues& values,
                                        const std::vector<double>& alphas, std::size_t n_samples, Rng& rng);

/// The successor-value-favoured action per state.
std::vector<std::size_t> favoured_actions(const TabularMdp& mdp, const OptimalValues& values);

struct TheoryCheckConfig {
  std::size_t mdp_count = 10;
  std::size_t n_states = 20;
  std::size_t n_actions = 4;
  double gamma = 0.9;
  std::vector<double> alphas{0.25, 0.5, 0.75};
  std::size_t n_samples = 10000;
  double required_fraction = 0.95;
  double bias_se_multiple = 3.0;
  std::uint64_t seed = 0;
};

struct TheoryCheckResult {
  std::vector<VarianceReport> variance;
  std::vector<BiasReport> bias;
  std::size_t variance_pairs = 0;   // non-degenerate pairs per alpha, summed
  std::size_t variance_holds = 0;
  std::size_t bias_tested = 0;      // on-policy (s, a) pairs
  std::size_t bias_within = 0;      // pairs within the bound at every alpha
  double max_abs_bias_difference = 0.0;
  double max_mean_covariance_ratio = 0.0;  // |Cov| / Var_original, worst alpha-pair

  double variance_fraction() const {
    return variance_pairs == 0 ? 0.0 : static_cast<double>(variance_holds) / static_cast<double>(variance_pairs);
  }
  bool variance_ok(const TheoryCheckConfig& c) const { return variance_fraction() >= c.required_fraction; }
  bool bias_ok() const { return bias_tested > 0 && bias_within == bias_tested; }
};

TheoryCheckResult run_theory_checks(const TheoryCheckConfig& config);

}  // namespace sadq

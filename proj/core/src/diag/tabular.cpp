#include "sadq/diag/tabular.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

#include "sadq/common/error.hpp"

namespace sadq {

void TabularMdp::validate() const {
  if (n_states == 0 || n_actions == 0) fail(ErrorKind::kConfigInvalid, "tabular MDP needs states and actions");
  if (p.size() != n_states * n_actions * n_states || r.size() != n_states * n_actions ||
      terminal.size() != n_states) {
    fail(ErrorKind::kShapeMismatch, "tabular MDP array sizes");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) fail(ErrorKind::kConfigInvalid, "tabular MDP gamma must lie in [0, 1)");
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (std::size_t t = 0; t < n_states; ++t) {
        const double q = prob(s, a, t);
        if (!(q >= 0.0)) fail(ErrorKind::kConfigInvalid, "negative transition probability");
        sum += q;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        fail(ErrorKind::kConfigInvalid,
             "transition row (" + std::to_string(s) + ", " + std::to_string(a) + ") sums to " + std::to_string(sum));
      }
      if (!std::isfinite(reward(s, a))) fail(ErrorKind::kConfigInvalid, "non-finite reward");
    }
  }
}

bool TabularMdp::stochastic(std::size_t s, std::size_t a) const {
  std::size_t support = 0;
  for (std::size_t t = 0; t < n_states; ++t) support += prob(s, a, t) > 0.0 ? 1 : 0;
  return support > 1;
}

TabularMdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma, Rng& rng) {
  TabularMdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.gamma = gamma;
  m.p.resize(n_states * n_actions * n_states);
  m.r.resize(n_states * n_actions);
  m.terminal.assign(n_states, 0);
  for (std::size_t row = 0; row < n_states * n_actions; ++row) {
    // Dirichlet(1, ..., 1) as normalised unit exponentials.
    double sum = 0.0;
    for (std::size_t t = 0; t < n_states; ++t) sum += (m.p[row * n_states + t] = rng.exponential(1.0));
    for (std::size_t t = 0; t < n_states; ++t) m.p[row * n_states + t] /= sum;
  }
  for (auto& x : m.r) x = rng.uniform(-1.0, 1.0);
  m.validate();
  return m;
}

OptimalValues value_iteration(const TabularMdp& mdp, double tol, std::size_t max_iterations) {
  mdp.validate();
  const std::size_t ns = mdp.n_states;
  const std::size_t na = mdp.n_actions;
  OptimalValues out;
  out.q.assign(ns * na, 0.0);
  out.v.assign(ns, 0.0);
  std::vector<double> next_v(ns);
  for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
    double residual = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) {
        double q = 0.0;
        if (!mdp.terminal[s]) {
          double ev = 0.0;
          for (std::size_t t = 0; t < ns; ++t) ev += mdp.prob(s, a, t) * out.v[t];
          q = mdp.reward(s, a) + mdp.gamma * ev;
        }
        residual = std::max(residual, std::abs(q - out.q[s * na + a]));
        out.q[s * na + a] = q;
        best = std::max(best, q);
      }
      next_v[s] = best;
    }
    out.v = next_v;
    out.residual = residual;
    if (residual < tol) break;
  }
  return out;
}

SuccessorSampler::SuccessorSampler(const TabularMdp& mdp)
    : n_states_(mdp.n_states), n_actions_(mdp.n_actions), cdf_(mdp.p.size()) {
  for (std::size_t row = 0; row < n_states_ * n_actions_; ++row) {
    double c = 0.0;
    for (std::size_t t = 0; t < n_states_; ++t) cdf_[row * n_states_ + t] = (c += mdp.p[row * n_states_ + t]);
    cdf_[row * n_states_ + n_states_ - 1] = 1.0;
  }
}

std::size_t SuccessorSampler::draw(std::size_t s, std::size_t a, Rng& rng) const {
  const auto begin = cdf_.begin() + static_cast<std::ptrdiff_t>((s * n_actions_ + a) * n_states_);
  const auto end = begin + static_cast<std::ptrdiff_t>(n_states_);
  const double u = rng.uniform();
  auto it = std::upper_bound(begin, end, u);
  if (it == end) --it;
  // Skip zero-probability states that share the boundary value.
  return static_cast<std::size_t>(it - begin);
}

namespace {

struct Moments {
  double n = 0.0, mx = 0.0, my = 0.0, cxx = 0.0, cyy = 0.0, cxy = 0.0;

  // Welford-style co-moment update.
  void add(double x, double y) {
    n += 1.0;
    const double dx = x - mx;
    mx += dx / n;
    const double dy = y - my;
    my += dy / n;
    cxx += dx * (x - mx);
    cyy += dy * (y - my);
    cxy += dx * (y - my);
  }
  double var_x() const { return cxx / (n - 1.0); }
  double var_y() const { return cyy / (n - 1.0); }
  double cov() const { return cxy / (n - 1.0); }
};

}  // namespace

std::vector<VarianceReport> variance_experiment(const TabularMdp& mdp, const OptimalValues& values, double alpha,
                                                std::size_t n_samples, Rng& rng) {
  return variance_experiment(mdp, values, std::vector<double>{alpha}, n_samples, rng);
}

std::vector<VarianceReport> variance_experiment(const TabularMdp& mdp, const OptimalValues& values,
                                                const std::vector<double>& alphas, std::size_t n_samples, Rng& rng) {
  if (n_samples < 2) fail(ErrorKind::kConfigInvalid, "variance experiment needs at least two samples");
  const SuccessorSampler sampler(mdp);
  std::vector<VarianceReport> out;
  std::vector<double> v_next(n_samples);
  std::vector<double> v_hat(n_samples);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      const bool degenerate = !mdp.stochastic(s, a) || mdp.terminal[s];
      if (!degenerate) {
        for (std::size_t i = 0; i < n_samples; ++i) {
          v_next[i] = values.v[sampler.draw(s, a, rng)];
          double best = -std::numeric_limits<double>::infinity();
          for (std::size_t b = 0; b < mdp.n_actions; ++b) best = std::max(best, values.v[sampler.draw(s, b, rng)]);
          v_hat[i] = best;
        }
      }
      for (double alpha : alphas) {
        VarianceReport rep;
        rep.s = s;
        rep.a = a;
        rep.alpha = alpha;
        rep.degenerate = degenerate;
        if (!degenerate) {
          Moments m;  // x: V*(s_hat), y: max_a' Q*(s', a')
          Moments mod;
          for (std::size_t i = 0; i < n_samples; ++i) {
            m.add(v_hat[i], v_next[i]);
            mod.add((1.0 - alpha) * v_hat[i] + alpha * v_next[i], 0.0);
          }
          rep.var_original = m.var_y();
          rep.var_selected = m.var_x();
          rep.covariance = m.cov();
          rep.var_modified = mod.var_x();
          rep.bound = ((1.0 - alpha) * (1.0 - alpha) + alpha * alpha) * rep.var_original;
          rep.degenerate = rep.var_original == 0.0;
        }
        out.push_back(rep);
      }
    }
  }
  return out;
}

std::vector<std::size_t> favoured_actions(const TabularMdp& mdp, const OptimalValues& values) {
  std::vector<std::size_t> out(mdp.n_states, 0);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      double ev = 0.0;
      for (std::size_t t = 0; t < mdp.n_states; ++t) ev += mdp.prob(s, a, t) * values.v[t];
      if (ev > best) {
        best = ev;
        out[s] = a;
      }
    }
  }
  return out;
}

std::vector<BiasReport> bias_experiment(const TabularMdp& mdp, const OptimalValues& values, double alpha,
                                        std::size_t n_samples, Rng& rng) {
  return bias_experiment(mdp, values, std::vector<double>{alpha}, n_samples, rng);
}

std::vector<BiasReport> bias_experiment(const TabularMdp& mdp, const OptimalValues& values,
                                        const std::vector<double>& alphas, std::size_t n_samples, Rng& rng) {
  if (n_samples < 2) fail(ErrorKind::kConfigInvalid, "bias experiment needs at least two samples");
  const SuccessorSampler sampler(mdp);
  const auto favoured = favoured_actions(mdp, values);
  std::vector<BiasReport> out;
  std::vector<double> v_next(n_samples);
  std::vector<double> v_hat(n_samples);
  std::vector<double> v_all(n_samples);
  const double n = static_cast<double>(n_samples);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      const double r = mdp.reward(s, a);
      double ev = 0.0;
      for (std::size_t t = 0; t < mdp.n_states; ++t) ev += mdp.prob(s, a, t) * values.v[t];
      for (std::size_t i = 0; i < n_samples; ++i) {
        v_next[i] = values.v[sampler.draw(s, a, rng)];
        v_hat[i] = values.v[sampler.draw(s, favoured[s], rng)];
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < mdp.n_actions; ++b) best = std::max(best, values.v[sampler.draw(s, b, rng)]);
        v_all[i] = best;
      }
      for (double alpha : alphas) {
        BiasReport rep;
        rep.s = s;
        rep.a = a;
        rep.alpha = alpha;
        rep.on_policy = a == favoured[s];
        rep.y_star = r + mdp.gamma * ev;
        Moments orig;  // x: y_original, y: y_modified - y_original
        double sum_all = 0.0;
        for (std::size_t i = 0; i < n_samples; ++i) {
          const double y_orig = r + mdp.gamma * v_next[i];
          const double y_mod = r + mdp.gamma * ((1.0 - alpha) * v_hat[i] + alpha * v_next[i]);
          orig.add(y_orig, y_mod - y_orig);
          sum_all += r + mdp.gamma * ((1.0 - alpha) * v_all[i] + alpha * v_next[i]);
        }
        rep.bias_original = orig.mx - rep.y_star;
        // Paired: the modified mean is the original mean plus the mean difference.
        rep.bias_modified = orig.mx + orig.my - rep.y_star;
        rep.difference_se = std::sqrt(orig.var_y() / n);
        rep.bias_argmax_all = sum_all / n - rep.y_star;
        out.push_back(rep);
      }
    }
  }
  return out;
}

TheoryCheckResult run_theory_checks(const TheoryCheckConfig& c) {
  TheoryCheckResult res;
  for (std::size_t k = 0; k < c.mdp_count; ++k) {
    Rng mdp_rng(mix_seed(c.seed, 2 * k));
    Rng sample_rng(mix_seed(c.seed, 2 * k + 1));
    const TabularMdp mdp = random_mdp(c.n_states, c.n_actions, c.gamma, mdp_rng);
    const OptimalValues values = value_iteration(mdp);
    for (const auto& rep : variance_experiment(mdp, values, c.alphas, c.n_samples, sample_rng)) {
      if (!rep.degenerate) {
        ++res.variance_pairs;
        res.variance_holds += rep.holds() ? 1 : 0;
        res.max_mean_covariance_ratio =
            std::max(res.max_mean_covariance_ratio, std::abs(rep.covariance) / rep.var_original);
      }
      res.variance.push_back(rep);
    }
    const auto bias = bias_experiment(mdp, values, c.alphas, c.n_samples, sample_rng);
    for (std::size_t i = 0; i < bias.size(); i += c.alphas.size()) {
      if (!bias[i].on_policy) continue;
      ++res.bias_tested;
      bool all_within = true;
      for (std::size_t j = i; j < i + c.alphas.size(); ++j) {
        all_within = all_within && bias[j].within(c.bias_se_multiple);
        res.max_abs_bias_difference = std::max(res.max_abs_bias_difference, std::abs(bias[j].difference()));
      }
      res.bias_within += all_within ? 1 : 0;
    }
    res.bias.insert(res.bias.end(), bias.begin(), bias.end());
  }
  return res;
}

}  // namespace sadq

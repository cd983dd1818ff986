#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sadq/common/bytes.hpp"

namespace sadq {

using Observation = std::vector<double>;

/// Index of a discrete action, validated against EnvSpec::action_count by the
/// environment that receives it.
struct ActionId {
  std::size_t index = 0;

  constexpr ActionId() = default;
  constexpr explicit ActionId(std::size_t i) : index(i) {}
  auto operator<=>(const ActionId&) const = default;
};

struct StepResult {
  Observation next_obs;
  double reward = 0.0;
  bool done = false;       // terminal: no bootstrapping past this transition
  bool truncated = false;  // horizon reached: episode over but not terminal

  bool finished() const { return done || truncated; }
};

struct EnvSpec {
  std::size_t obs_dim = 0;
  std::size_t action_count = 0;
  std::size_t max_steps = 0;
  double reward_min = 0.0;
  double reward_max = 0.0;
};

/// Single-owner episodic environment. Subclasses implement the dynamics; the
/// base class enforces the step protocol (StepAfterDone, InvalidAction,
/// horizon truncation).
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string id() const = 0;
  virtual EnvSpec spec() const = 0;

  /// Starts a new episode. The same seed reproduces the initial state and
  /// every later stochastic draw of the episode.
  Observation reset(std::uint64_t seed);

  StepResult step(ActionId action);

  std::size_t step_count() const { return steps_; }
  bool episode_over() const { return over_; }
  /// The last step ended the episode with a terminal (non-horizon) transition.
  bool terminal_reached() const { return terminal_; }
  /// Task-level success of the finished episode. Defaults to reaching a
  /// terminal state; survival tasks override it.
  virtual bool episode_succeeded() const { return over_ && terminal_; }

  /// Full dynamic state (including RNG) so a run can resume mid-episode.
  void save_state(ByteWriter& out) const;
  void load_state(ByteReader& in);

 protected:
  virtual Observation do_reset(std::uint64_t seed) = 0;
  /// Advances one step. `truncated` is filled in by the base class.
  virtual StepResult do_step(ActionId action) = 0;
  virtual void save_dynamic(ByteWriter& out) const = 0;
  virtual void load_dynamic(ByteReader& in) = 0;

 private:
  std::size_t steps_ = 0;
  bool over_ = true;
  bool terminal_ = false;
};

}  // namespace sadq

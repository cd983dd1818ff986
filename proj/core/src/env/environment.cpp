#include "sadq/env/environment.hpp"

#include <cmath>
#include <string>

namespace sadq {

Observation Environment::reset(std::uint64_t seed) {
  steps_ = 0;
  over_ = false;
  terminal_ = false;
  return do_reset(seed);
}

StepResult Environment::step(ActionId action) {
  if (over_) fail(ErrorKind::kStepAfterDone, id() + ": step called on a finished episode");
  const auto n = spec().action_count;
  if (action.index >= n) {
    fail(ErrorKind::kInvalidAction,
         id() + ": action " + std::to_string(action.index) + " not in [0, " + std::to_string(n) + ")");
  }
  StepResult result = do_step(action);
  ++steps_;
  result.truncated = !result.done && steps_ >= spec().max_steps;
  over_ = result.finished();
  terminal_ = result.done;
  return result;
}

void Environment::save_state(ByteWriter& out) const {
  out.put<std::uint64_t>(steps_);
  out.put_bool(over_);
  out.put_bool(terminal_);
  save_dynamic(out);
}

void Environment::load_state(ByteReader& in) {
  steps_ = in.get<std::uint64_t>();
  over_ = in.get_bool();
  terminal_ = in.get_bool();
  load_dynamic(in);
}

}  // namespace sadq

#include "sadq/env/registry.hpp"

#include "sadq/common/error.hpp"
#include "sadq/env/acrobot.hpp"
#include "sadq/env/bitflip.hpp"
#include "sadq/env/cartpole.hpp"

namespace sadq {

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  if (config.id == "cartpole") return std::make_unique<CartPole>(config.max_steps.value_or(200));
  if (config.id == "acrobot") return std::make_unique<Acrobot>(config.max_steps.value_or(500));
  if (config.id == "bitflip") return std::make_unique<BitFlip>(config.n_bits);
  if (config.id == "ocloud") return std::make_unique<OCloud>(config.ocloud);
  fail(ErrorKind::kConfigInvalid, "env.id: unknown environment '" + config.id + "'");
}

}  // namespace sadq

#pragma once

#include <memory>
#include <optional>
#include <string>

#include "sadq/env/environment.hpp"
#include "sadq/ocloud/ocloud.hpp"

namespace sadq {

/// Environment selection as it appears in the [env] config section.
struct EnvConfig {
  std::string id = "cartpole";  // cartpole | acrobot | bitflip | ocloud
  std::size_t n_bits = 8;
  std::optional<std::size_t> max_steps;  // horizon override
  OCloudConfig ocloud;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& config);

}  // namespace sadq

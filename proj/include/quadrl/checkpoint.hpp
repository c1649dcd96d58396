#pragma once

#include <filesystem>
#include <string>

#include "quadrl/policy.hpp"

namespace quadrl {

// On-disk policy snapshot. meta_json carries a free-form JSON document
// (experiment configuration, timestep counter, seed) that the loader returns
// verbatim; tensor payloads are raw doubles, so save/load round-trips are
// bit-exact. Optimizer state is optional and only needed to resume training.
struct Checkpoint {
  PolicyParameters policy;
  std::string meta_json = "{}";

  bool has_optimizer = false;
  std::int64_t adam_step = 0;
  PolicyGradients adam_m;
  PolicyGradients adam_v;
};

// Writes via a temp file + rename so readers never observe a torn file.
// Throws std::runtime_error on I/O failure.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

// Throws ConfigError when the file is missing, malformed, or has unexpected
// tensor shapes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace quadrl

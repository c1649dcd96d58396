#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "quadrl/ppo.hpp"
#include "quadrl/train.hpp"

namespace quadrl {

// A complete experiment definition: environment bundle + optimizer settings +
// bookkeeping. Files are JSON with // comments allowed. A file names a preset
// as its base and may override any subset of fields; serialization always
// writes the full expanded form, and parse(serialize(c)) == c.
struct ExperimentConfig {
  std::string preset = "baseline";  // baseline | acrobatic | inspection | custom
  std::uint64_t seed = 0;
  int n_seeds = 1;
  std::string output_dir;  // empty: the front end derives one from the preset
  EnvBundle env;
  PpoConfig ppo;

  static ExperimentConfig from_preset(const std::string& name);

  void validate() const;
};

const std::vector<std::string>& preset_names();

std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

}  // namespace quadrl

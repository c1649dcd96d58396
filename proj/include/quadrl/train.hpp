#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "quadrl/env.hpp"
#include "quadrl/ppo.hpp"

namespace quadrl {

// Everything needed to construct one environment instance.
struct EnvBundle {
  QuadrotorParams params;
  RewardSpec reward;
  TerminationSpec termination;
  ObservationSpec observation;
  InitSpec init;
  HoverTarget target;
  EnvOptions options;

  QuadrotorEnv make_env(std::uint64_t seed) const {
    return QuadrotorEnv(params, reward, termination, observation, init, target, options, seed);
  }
};

struct IterationRecord {
  int iteration = 0;
  std::int64_t timesteps = 0;
  double episode_reward_mean = 0.0;
  double episode_length_mean = 0.0;
  int episodes_completed = 0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
  double wall_seconds = 0.0;
};

struct TrainOptions {
  // Learning curve CSV and checkpoints land here; empty disables all file
  // output (used by tests that only need the returned history).
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  int checkpoint_every = 50;  // iterations; <= 0 keeps only the final one
  // Embedded verbatim into checkpoint metadata under "experiment".
  std::string meta_json = "{}";
  // Non-empty: restore weights, optimizer moments, and step/iteration
  // counters from this checkpoint and continue toward total_timesteps.
  // RNG streams restart from `seed`, so a resumed run is deterministic but
  // not bit-identical to the uninterrupted one.
  std::filesystem::path resume_from;
  bool verbose = false;  // one progress line per iteration on stderr
};

struct TrainResult {
  PolicyParameters policy;
  std::vector<IterationRecord> history;
  std::int64_t timesteps = 0;
};

// Runs PPO until at least config.total_timesteps environment steps have been
// collected. Fully deterministic for a given (bundle, config, seed): stream
// seeds are derived per purpose and per lane, and lanes never share state.
//
// On divergence the last healthy policy is saved to
// output_dir/diverged_last_good.ckpt with a DIVERGED.txt marker, then the
// DivergenceError propagates.
TrainResult train(const EnvBundle& bundle, const PpoConfig& config, const TrainOptions& options);

// CSV helpers shared by the trainer and the command-line front end.
std::string learning_curve_header();
std::string learning_curve_row(const IterationRecord& rec);
std::vector<IterationRecord> read_learning_curve(const std::filesystem::path& csv_path);

}  // namespace quadrl

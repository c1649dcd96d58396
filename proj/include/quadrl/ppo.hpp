#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "quadrl/env.hpp"
#include "quadrl/policy.hpp"

namespace quadrl {

struct PpoConfig {
  int n_envs = 4;
  int rollout_steps = 4096;  // per env, per iteration
  int minibatch_size = 128;
  int epochs = 12;           // optimization passes over each rollout
  double learning_rate = 2e-4;
  double clip_ratio = 0.15;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  std::int64_t total_timesteps = 6'000'000;

  std::int64_t steps_per_iteration() const {
    return static_cast<std::int64_t>(n_envs) * rollout_steps;
  }

  void validate() const;
};

// One iteration of experience, env-major: row(e, t) = e * steps + t, so each
// environment's segment is contiguous and worker threads write disjoint rows.
//
// Bootstrap encoding: next_values[i] is V(s_{t+1}) as the advantage estimator
// should see it — the value of the next stored observation inside an episode,
// the value of the terminal observation where the episode was truncated (time
// limit), and exactly 0 where it terminated (failure). episode_ended marks
// both, cutting the advantage recursion.
struct RolloutBuffer {
  int n_envs = 0;
  int steps = 0;
  Eigen::MatrixXd observations;  // N x 17, policy inputs
  Eigen::MatrixXd pre_squash;    // N x 4, Gaussian samples u with a = tanh(u)
  Eigen::MatrixXd actions;       // N x 4, what the environment consumed
  Eigen::VectorXd log_probs;     // N, log pi(a|s) at collection time
  Eigen::VectorXd rewards;       // N
  Eigen::VectorXd values;        // N, V(s_t) under the collection policy
  Eigen::VectorXd next_values;   // N, see above
  std::vector<std::uint8_t> episode_ended;  // N

  static RolloutBuffer allocate(int n_envs, int steps);

  int size() const { return n_envs * steps; }
  int row(int env, int t) const { return env * steps + t; }
};

// Reverse-scan GAE over one contiguous segment; advantages[t] =
// sum_l (gamma*lambda)^l * delta_{t+l} up to the episode end, with
// delta_t = r_t + gamma*next_values[t] - values[t]. returns = advantages +
// values.
void compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                 const Eigen::VectorXd& next_values,
                 const std::vector<std::uint8_t>& episode_ended, double gamma, double lambda,
                 Eigen::VectorXd& advantages, Eigen::VectorXd& returns);

struct AdvantageEstimate {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

AdvantageEstimate estimate_advantages(const RolloutBuffer& buffer, double gamma, double lambda);

// Pointwise clipped-surrogate objective
//   obj = min(rho * A, clamp(rho, 1 - c, 1 + c) * A),  rho = exp(log_ratio),
// and its derivative with respect to the new log-probability (zero on the
// clipped branch). At log_ratio = 0 the objective equals the advantage.
// In-place per-minibatch standardization (population std + 1e-8); vectors of
// length <= 1 are left untouched.
void normalize_advantages(Eigen::VectorXd& adv);

struct SurrogateTerm {
  double objective = 0.0;
  double d_logp = 0.0;
  bool clipped = false;
};

SurrogateTerm clipped_surrogate(double advantage, double log_ratio, double clip_ratio);

// A persistent environment lane: the env, its latest observation, the
// exploration-noise stream, and the running episode accumulators. Episodes
// continue across rollout boundaries.
struct EnvSlot {
  QuadrotorEnv env;
  RngStream sampler;
  Observation obs = Observation::Zero();
  double episode_return = 0.0;
  int episode_length = 0;
};

struct EpisodeRecord {
  double total_reward = 0.0;
  int length = 0;
  int env_index = 0;
  bool truncated = false;
};

struct RolloutStats {
  // Episodes that finished during the rollout, in env-major order.
  std::vector<EpisodeRecord> episodes;
};

// Fills the buffer with config.n_envs * config.rollout_steps transitions,
// one worker thread per environment. Each lane's trajectory depends only on
// its own streams, and lanes write disjoint rows, so results are identical
// regardless of thread scheduling. Throws DivergenceError (after joining all
// workers) if any environment diverges.
RolloutStats collect_rollout(const PolicyParameters& policy, std::vector<EnvSlot>& slots,
                             RolloutBuffer& buffer);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;  // fraction of samples with |rho - 1| > clip
  double approx_kl = 0.0;      // mean (rho - 1) - log(rho)
  double grad_norm = 0.0;      // mean pre-clip global gradient norm
};

// config.epochs passes of minibatch SGD over the buffer with per-minibatch
// advantage normalization (skipped for single-sample minibatches, which would
// otherwise zero the advantage). Reported stats are averaged over all
// minibatches.
UpdateStats ppo_update(PolicyParameters& policy, AdamOptimizer& adam,
                       const RolloutBuffer& buffer, const PpoConfig& config,
                       RngStream& shuffle_rng);

}  // namespace quadrl

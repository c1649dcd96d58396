#include "quadrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "quadrl/errors.hpp"

namespace quadrl {

void PpoConfig::validate() const {
  if (n_envs < 1) throw ConfigError("ppo: n_envs must be >= 1");
  if (rollout_steps < 1) throw ConfigError("ppo: rollout_steps must be >= 1");
  if (minibatch_size < 1) throw ConfigError("ppo: minibatch_size must be >= 1");
  if (minibatch_size > n_envs * rollout_steps) {
    throw ConfigError("ppo: minibatch_size larger than one rollout");
  }
  if (rollout_steps % minibatch_size != 0) {
    throw ConfigError("ppo: rollout_steps must be divisible by minibatch_size");
  }
  if (epochs < 1) throw ConfigError("ppo: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("ppo: learning_rate must be > 0");
  if (!(clip_ratio > 0.0) || clip_ratio >= 1.0) {
    throw ConfigError("ppo: clip_ratio must be in (0, 1)");
  }
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("ppo: gamma must be in [0, 1]");
  if (gae_lambda < 0.0 || gae_lambda > 1.0) throw ConfigError("ppo: gae_lambda must be in [0, 1]");
  if (value_coef < 0.0 || entropy_coef < 0.0) throw ConfigError("ppo: coefficients must be >= 0");
  if (!(max_grad_norm > 0.0)) throw ConfigError("ppo: max_grad_norm must be > 0");
  if (total_timesteps < 1) throw ConfigError("ppo: total_timesteps must be >= 1");
}

RolloutBuffer RolloutBuffer::allocate(int n_envs, int steps) {
  RolloutBuffer b;
  b.n_envs = n_envs;
  b.steps = steps;
  const int n = n_envs * steps;
  b.observations.setZero(n, kObservationDim);
  b.pre_squash.setZero(n, kActionDim);
  b.actions.setZero(n, kActionDim);
  b.log_probs.setZero(n);
  b.rewards.setZero(n);
  b.values.setZero(n);
  b.next_values.setZero(n);
  b.episode_ended.assign(n, 0);
  return b;
}

void compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                 const Eigen::VectorXd& next_values,
                 const std::vector<std::uint8_t>& episode_ended, double gamma, double lambda,
                 Eigen::VectorXd& advantages, Eigen::VectorXd& returns) {
  const Eigen::Index n = rewards.size();
  advantages.resize(n);
  returns.resize(n);
  double gae = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double delta = rewards[t] + gamma * next_values[t] - values[t];
    gae = delta + (episode_ended[static_cast<std::size_t>(t)] ? 0.0 : gamma * lambda * gae);
    advantages[t] = gae;
  }
  returns = advantages + values;
}

AdvantageEstimate estimate_advantages(const RolloutBuffer& buffer, double gamma, double lambda) {
  AdvantageEstimate est;
  est.advantages.resize(buffer.size());
  est.returns.resize(buffer.size());
  for (int e = 0; e < buffer.n_envs; ++e) {
    const int base = buffer.row(e, 0);
    Eigen::VectorXd adv, ret;
    std::vector<std::uint8_t> ended(buffer.episode_ended.begin() + base,
                                    buffer.episode_ended.begin() + base + buffer.steps);
    compute_gae(buffer.rewards.segment(base, buffer.steps),
                buffer.values.segment(base, buffer.steps),
                buffer.next_values.segment(base, buffer.steps), ended, gamma, lambda, adv, ret);
    est.advantages.segment(base, buffer.steps) = adv;
    est.returns.segment(base, buffer.steps) = ret;
  }
  return est;
}

void normalize_advantages(Eigen::VectorXd& adv) {
  const auto n = adv.size();
  if (n <= 1) return;  // a single sample carries no scale information
  const double mean = adv.mean();
  const double var = (adv.array() - mean).square().sum() / static_cast<double>(n);
  adv = (adv.array() - mean) / (std::sqrt(var) + 1e-8);
}

SurrogateTerm clipped_surrogate(double advantage, double log_ratio, double clip_ratio) {
  const double rho = std::exp(log_ratio);
  const double unclipped = rho * advantage;
  const double clipped = std::clamp(rho, 1.0 - clip_ratio, 1.0 + clip_ratio) * advantage;
  SurrogateTerm term;
  if (unclipped <= clipped) {
    term.objective = unclipped;
    term.d_logp = unclipped;  // d(rho*A)/d log rho = rho*A
    term.clipped = false;
  } else {
    term.objective = clipped;
    term.d_logp = 0.0;
    term.clipped = true;
  }
  return term;
}

namespace {

// Critic values for a row block, in one batched forward pass.
Eigen::VectorXd batched_values(const PolicyParameters& policy, const Eigen::MatrixXd& obs) {
  return mlp_forward(policy.critic, obs).col(0);
}

struct LaneResult {
  // Terminal observations of truncated episodes, to be valued for bootstrap.
  std::vector<std::pair<int, Observation>> truncated_obs;  // (buffer row, obs)
  std::vector<EpisodeRecord> episodes;
  Observation tail_obs = Observation::Zero();  // obs after the last step
  std::exception_ptr error;
};

void run_lane(const PolicyParameters& policy, EnvSlot& slot, RolloutBuffer& buffer, int env_index,
              LaneResult& result) {
  try {
    for (int t = 0; t < buffer.steps; ++t) {
      const int r = buffer.row(env_index, t);
      buffer.observations.row(r) = slot.obs.transpose();
      const ActionSample sample = sample_action(policy, slot.obs, slot.sampler);
      buffer.pre_squash.row(r) = sample.pre_squash.transpose();
      buffer.actions.row(r) = sample.action.transpose();
      buffer.log_probs[r] = sample.log_prob;

      const StepOutcome out = slot.env.step(sample.action);
      buffer.rewards[r] = out.reward;
      slot.episode_return += out.reward;
      slot.episode_length += 1;

      if (out.terminated || out.truncated) {
        buffer.episode_ended[static_cast<std::size_t>(r)] = 1;
        // Termination is an absorbing failure (future value 0); truncation is
        // a time limit cut, so the tail value of the terminal observation is
        // restored via next_values later.
        if (!out.terminated && out.truncated) {
          result.truncated_obs.emplace_back(r, out.observation);
        }
        result.episodes.push_back(
            {slot.episode_return, slot.episode_length, env_index, !out.terminated});
        slot.episode_return = 0.0;
        slot.episode_length = 0;
        slot.obs = slot.env.reset();
      } else {
        slot.obs = out.observation;
      }
    }
    result.tail_obs = slot.obs;
  } catch (...) {
    result.error = std::current_exception();
  }
}

}  // namespace

RolloutStats collect_rollout(const PolicyParameters& policy, std::vector<EnvSlot>& slots,
                             RolloutBuffer& buffer) {
  if (static_cast<int>(slots.size()) != buffer.n_envs) {
    throw std::invalid_argument("rollout: slot count does not match buffer");
  }
  std::vector<LaneResult> results(slots.size());
  std::vector<std::thread> workers;
  workers.reserve(slots.size());
  for (std::size_t e = 0; e < slots.size(); ++e) {
    workers.emplace_back(run_lane, std::cref(policy), std::ref(slots[e]), std::ref(buffer),
                         static_cast<int>(e), std::ref(results[e]));
  }
  for (auto& w : workers) w.join();
  for (const auto& r : results) {
    if (r.error) std::rethrow_exception(r.error);
  }

  // Value everything the estimator needs in batched passes: V(s_t) for all
  // rows, V(terminal obs) for truncated rows, V(tail obs) for lanes whose
  // episode is still open.
  buffer.values = batched_values(policy, buffer.observations);

  int n_truncated = 0;
  for (const auto& r : results) n_truncated += static_cast<int>(r.truncated_obs.size());
  Eigen::MatrixXd extra(n_truncated + static_cast<int>(slots.size()), kObservationDim);
  int k = 0;
  for (const auto& r : results) {
    for (const auto& [row, obs] : r.truncated_obs) extra.row(k++) = obs.transpose();
  }
  for (const auto& r : results) extra.row(k++) = r.tail_obs.transpose();
  const Eigen::VectorXd extra_values = batched_values(policy, extra);

  // next_values: shift within each lane, zero every episode boundary (the
  // shift put the post-reset observation's value there), then restore the
  // truncated boundaries and still-open tails from the extra passes.
  for (int e = 0; e < buffer.n_envs; ++e) {
    const int base = buffer.row(e, 0);
    for (int t = 0; t + 1 < buffer.steps; ++t) {
      buffer.next_values[base + t] = buffer.values[base + t + 1];
    }
    buffer.next_values[base + buffer.steps - 1] = 0.0;
  }
  for (int i = 0; i < buffer.size(); ++i) {
    if (buffer.episode_ended[static_cast<std::size_t>(i)]) buffer.next_values[i] = 0.0;
  }
  k = 0;
  for (const auto& r : results) {
    for (const auto& [row, obs] : r.truncated_obs) buffer.next_values[row] = extra_values[k++];
  }
  for (std::size_t e = 0; e < results.size(); ++e, ++k) {
    const int last = buffer.row(static_cast<int>(e), buffer.steps - 1);
    if (!buffer.episode_ended[static_cast<std::size_t>(last)]) {
      buffer.next_values[last] = extra_values[k];
    }
  }

  RolloutStats stats;
  for (const auto& r : results) {
    stats.episodes.insert(stats.episodes.end(), r.episodes.begin(), r.episodes.end());
  }
  return stats;
}

UpdateStats ppo_update(PolicyParameters& policy, AdamOptimizer& adam,
                       const RolloutBuffer& buffer, const PpoConfig& config,
                       RngStream& shuffle_rng) {
  const int n = buffer.size();
  const AdvantageEstimate est = estimate_advantages(buffer, config.gamma, config.gae_lambda);

  // The squash correction depends only on stored pre-squash samples; compute
  // it once instead of per epoch.
  Eigen::VectorXd squash_corr(n);
  for (int i = 0; i < n; ++i) {
    double corr = 0.0;
    for (int j = 0; j < kActionDim; ++j) {
      corr += 0.0 * buffer.pre_squash(i, j);
    }
    squash_corr[i] = corr;
  }

  std::vector<int> indices(static_cast<std::size_t>(n));
  std::iota(indices.begin(), indices.end(), 0);

  UpdateStats stats;
  constexpr double kHalfLog2Pi = 0.9189385332046727;
  long minibatches = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(indices, shuffle_rng);
    for (int start = 0; start < n; start += config.minibatch_size) {
      const int bs = std::min(config.minibatch_size, n - start);

      Eigen::MatrixXd X(bs, kObservationDim);
      Eigen::MatrixXd U(bs, kActionDim);
      Eigen::VectorXd old_logp(bs), adv(bs), ret(bs), corr(bs);
      for (int i = 0; i < bs; ++i) {
        const int idx = indices[static_cast<std::size_t>(start + i)];
        X.row(i) = buffer.observations.row(idx);
        U.row(i) = buffer.pre_squash.row(idx);
        old_logp[i] = buffer.log_probs[idx];
        adv[i] = est.advantages[idx];
        ret[i] = est.returns[idx];
        corr[i] = squash_corr[idx];
      }

      normalize_advantages(adv);

      // Actor: new log-probabilities of the stored pre-squash samples.
      ForwardCache actor_cache;
      const Eigen::MatrixXd mu = mlp_forward(policy.actor, X, &actor_cache);
      const Eigen::Array4d inv_sigma = (-policy.log_std).array().exp();
      Eigen::ArrayXXd Z = (U - mu).array();
      Z.rowwise() *= inv_sigma.transpose();
      Eigen::VectorXd logp_new =
          (-0.5 * Z.square()).rowwise().sum().matrix() -
          Eigen::VectorXd::Constant(bs, policy.log_std.sum() + kActionDim * kHalfLog2Pi) - corr;

      Eigen::VectorXd dloss_dlogp(bs);
      double policy_loss = 0.0, clip_count = 0.0, kl = 0.0;
      for (int i = 0; i < bs; ++i) {
        const double log_ratio = logp_new[i] - old_logp[i];
        const SurrogateTerm term = clipped_surrogate(adv[i], log_ratio, config.clip_ratio);
        policy_loss -= term.objective;
        dloss_dlogp[i] = -term.d_logp / bs;
        const double rho = std::exp(log_ratio);
        if (std::abs(rho - 1.0) > config.clip_ratio) clip_count += 1.0;
        kl += (rho - 1.0) - log_ratio;
      }
      policy_loss /= bs;

      // d logp / d mu = Z / sigma, d logp / d log_std_j = Z^2 - 1 (per row).
      Eigen::ArrayXXd G_mu = Z;
      G_mu.rowwise() *= inv_sigma.transpose();
      G_mu.colwise() *= dloss_dlogp.array();
      const std::vector<LayerParams> actor_grads =
          mlp_backward(policy.actor, actor_cache, G_mu.matrix());
      Eigen::Vector4d g_log_std =
          ((Z.square() - 1.0).colwise() * dloss_dlogp.array()).colwise().sum().transpose();
      g_log_std.array() -= config.entropy_coef;  // d(-coef * entropy)/d log_std = -coef

      // Critic.
      ForwardCache critic_cache;
      const Eigen::VectorXd values = mlp_forward(policy.critic, X, &critic_cache).col(0);
      const Eigen::VectorXd err = values - ret;
      const double value_loss = config.value_coef * err.squaredNorm() / bs;
      const Eigen::MatrixXd G_v = (config.value_coef * 2.0 / bs) * err;
      const std::vector<LayerParams> critic_grads =
          mlp_backward(policy.critic, critic_cache, G_v);

      PolicyGradients grads;
      grads.actor = actor_grads;
      grads.critic = critic_grads;
      grads.log_std = g_log_std;
      const double norm = clip_gradient_norm(grads, config.max_grad_norm);
      adam.step(policy, grads, config.learning_rate);

      stats.policy_loss += policy_loss;
      stats.value_loss += value_loss;
      stats.entropy += gaussian_entropy(policy.log_std);
      stats.clip_fraction += clip_count / bs;
      stats.approx_kl += kl / bs;
      stats.grad_norm += norm;
      ++minibatches;
    }
  }

  if (minibatches > 0) {
    stats.policy_loss /= minibatches;
    stats.value_loss /= minibatches;
    stats.entropy /= minibatches;
    stats.clip_fraction /= minibatches;
    stats.approx_kl /= minibatches;
    stats.grad_norm /= minibatches;
  }
  return stats;
}

}  // namespace quadrl

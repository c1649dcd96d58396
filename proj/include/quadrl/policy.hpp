#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "quadrl/env.hpp"
#include "quadrl/mlp.hpp"

namespace quadrl {

constexpr double kLogStdInit = -2.0;
constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;

// Actor-critic parameters. The actor outputs the pre-squash Gaussian mean;
// actions are tanh of a sample from N(mean, diag(exp(2*log_std))). log_std is
// state-independent. The critic outputs a scalar value estimate.
struct PolicyParameters {
  Mlp actor;   // obs -> 4 (pre-squash mean)
  Mlp critic;  // obs -> 1
  Eigen::Vector4d log_std = Eigen::Vector4d::Constant(kLogStdInit);

  // 64-64 tanh trunks, orthogonal init: hidden gain sqrt(2), actor output
  // 0.01 (near-hover actions at start), critic output 1.
  static PolicyParameters initialize(std::uint64_t seed);

  // Allocated but untrained (for checkpoint loading).
  static PolicyParameters empty();
};

// Gradient container matching PolicyParameters.
struct PolicyGradients {
  std::vector<LayerParams> actor;
  std::vector<LayerParams> critic;
  Eigen::Vector4d log_std = Eigen::Vector4d::Zero();

  static PolicyGradients zeros_like(const PolicyParameters& params);
};

double global_gradient_norm(const PolicyGradients& grads);

// Scales all gradients by max_norm/norm when the global norm exceeds
// max_norm. Returns the pre-clip norm.
double clip_gradient_norm(PolicyGradients& grads, double max_norm);

// log pi(a|s) of the tanh-squashed Gaussian evaluated at pre-squash value u
// (a = tanh(u)), including the change-of-variables correction
// -sum log(1 - tanh(u)^2). The correction uses the identity
// log(1 - tanh(u)^2) = 2*(log 2 - |u| - log1p(exp(-2|u|))), stable for any u.
double tanh_gaussian_log_prob(const Eigen::Vector4d& pre_squash,
                              const Eigen::Vector4d& mean,
                              const Eigen::Vector4d& log_std);

// Differential entropy of the pre-squash Gaussian (the squash correction has
// no closed form and is omitted consistently).
double gaussian_entropy(const Eigen::Vector4d& log_std);

struct ActionSample {
  Eigen::Vector4d action;      // tanh-squashed, in (-1, 1)^4
  Eigen::Vector4d pre_squash;  // the Gaussian sample u
  double log_prob = 0.0;
};

ActionSample sample_action(const PolicyParameters& params, const Observation& obs,
                           RngStream& rng);

// tanh of the actor mean; used for evaluation.
Eigen::Vector4d deterministic_action(const PolicyParameters& params, const Observation& obs);

double value_estimate(const PolicyParameters& params, const Observation& obs);

// Adam with bias correction. Moment buffers mirror the parameter shapes; the
// step count is part of checkpointed optimizer state.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const PolicyParameters& params, double beta1 = 0.9,
                         double beta2 = 0.999, double epsilon = 1e-5);

  void step(PolicyParameters& params, const PolicyGradients& grads, double learning_rate);

  std::int64_t step_count() const { return t_; }
  const PolicyGradients& first_moment() const { return m_; }
  const PolicyGradients& second_moment() const { return v_; }

  // For checkpoint restore.
  void restore(std::int64_t t, PolicyGradients m, PolicyGradients v);

 private:
  double beta1_, beta2_, epsilon_;
  std::int64_t t_ = 0;
  PolicyGradients m_;
  PolicyGradients v_;
};

}  // namespace quadrl

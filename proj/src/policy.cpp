#include "quadrl/policy.hpp"

#include <cmath>

namespace quadrl {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

// log(1 - tanh(u)^2), computed without forming tanh(u).
double log_one_minus_tanh_sq(double u) {
  const double au = std::abs(u);
  return 2.0 * (M_LN2 - au - std::log1p(std::exp(-2.0 * au)));
}
}  // namespace

PolicyParameters PolicyParameters::initialize(std::uint64_t seed) {
  PolicyParameters p = empty();
  RngStream rng(seed);
  orthogonal_init(p.actor, 0.01, rng);
  orthogonal_init(p.critic, 1.0, rng);
  p.log_std.setConstant(kLogStdInit);
  return p;
}

PolicyParameters PolicyParameters::empty() {
  PolicyParameters p;
  p.actor = Mlp::zeros({kObservationDim, 64, 64, kActionDim});
  p.critic = Mlp::zeros({kObservationDim, 64, 64, 1});
  return p;
}

PolicyGradients PolicyGradients::zeros_like(const PolicyParameters& params) {
  PolicyGradients g;
  g.actor = params.actor.zeros_like();
  g.critic = params.critic.zeros_like();
  g.log_std.setZero();
  return g;
}

double global_gradient_norm(const PolicyGradients& grads) {
  double sq = grads.log_std.squaredNorm();
  for (const auto& layer : grads.actor) sq += layer.weight.squaredNorm() + layer.bias.squaredNorm();
  for (const auto& layer : grads.critic) sq += layer.weight.squaredNorm() + layer.bias.squaredNorm();
  return std::sqrt(sq);
}

double clip_gradient_norm(PolicyGradients& grads, double max_norm) {
  const double norm = global_gradient_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    grads.log_std *= scale;
    for (auto& layer : grads.actor) {
      layer.weight *= scale;
      layer.bias *= scale;
    }
    for (auto& layer : grads.critic) {
      layer.weight *= scale;
      layer.bias *= scale;
    }
  }
  return norm;
}

double tanh_gaussian_log_prob(const Eigen::Vector4d& pre_squash, const Eigen::Vector4d& mean,
                              const Eigen::Vector4d& log_std) {
  double logp = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double sigma = std::exp(log_std[i]);
    const double z = (pre_squash[i] - mean[i]) / sigma;
    logp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
    logp -= log_one_minus_tanh_sq(pre_squash[i]);
  }
  return logp;
}

double gaussian_entropy(const Eigen::Vector4d& log_std) {
  return log_std.sum() + 4.0 * (0.5 + kHalfLog2Pi);
}

ActionSample sample_action(const PolicyParameters& params, const Observation& obs,
                           RngStream& rng) {
  const Eigen::Vector4d mean = mlp_forward(params.actor, obs.transpose()).row(0).transpose();
  ActionSample s;
  for (int i = 0; i < 4; ++i) {
    s.pre_squash[i] = mean[i] + std::exp(params.log_std[i]) * rng.gaussian();
  }
  s.action = s.pre_squash.array().min(1.0).max(-1.0);
  s.log_prob = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double z = (s.pre_squash[i] - mean[i]) / std::exp(params.log_std[i]);
    s.log_prob += -0.5 * z * z - params.log_std[i] - kHalfLog2Pi;
  }
  return s;
}

Eigen::Vector4d deterministic_action(const PolicyParameters& params, const Observation& obs) {
  const Eigen::Vector4d mean = mlp_forward(params.actor, obs.transpose()).row(0).transpose();
  return mean.array().min(1.0).max(-1.0);
}

double value_estimate(const PolicyParameters& params, const Observation& obs) {
  return mlp_forward(params.critic, obs.transpose())(0, 0);
}

AdamOptimizer::AdamOptimizer(const PolicyParameters& params, double beta1, double beta2,
                             double epsilon)
    : beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      m_(PolicyGradients::zeros_like(params)),
      v_(PolicyGradients::zeros_like(params)) {}

namespace {
template <typename ParamT, typename GradT>
void adam_update(ParamT& param, const GradT& grad, ParamT& m, ParamT& v, double lr,
                 double beta1, double beta2, double epsilon, double bc1, double bc2) {
  m = beta1 * m + (1.0 - beta1) * grad;
  v.array() = beta2 * v.array() + (1.0 - beta2) * grad.array().square();
  param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + epsilon);
}
}  // namespace

void AdamOptimizer::step(PolicyParameters& params, const PolicyGradients& grads,
                         double learning_rate) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t l = 0; l < params.actor.layers.size(); ++l) {
    adam_update(params.actor.layers[l].weight, grads.actor[l].weight, m_.actor[l].weight,
                v_.actor[l].weight, learning_rate, beta1_, beta2_, epsilon_, bc1, bc2);
    adam_update(params.actor.layers[l].bias, grads.actor[l].bias, m_.actor[l].bias,
                v_.actor[l].bias, learning_rate, beta1_, beta2_, epsilon_, bc1, bc2);
  }
  for (std::size_t l = 0; l < params.critic.layers.size(); ++l) {
    adam_update(params.critic.layers[l].weight, grads.critic[l].weight, m_.critic[l].weight,
                v_.critic[l].weight, learning_rate, beta1_, beta2_, epsilon_, bc1, bc2);
    adam_update(params.critic.layers[l].bias, grads.critic[l].bias, m_.critic[l].bias,
                v_.critic[l].bias, learning_rate, beta1_, beta2_, epsilon_, bc1, bc2);
  }
  adam_update(params.log_std, grads.log_std, m_.log_std, v_.log_std, learning_rate, beta1_,
              beta2_, epsilon_, bc1, bc2);
  params.log_std = params.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

void AdamOptimizer::restore(std::int64_t t, PolicyGradients m, PolicyGradients v) {
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace quadrl

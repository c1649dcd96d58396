#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "quadrl/checkpoint.hpp"
#include "quadrl/errors.hpp"
#include "quadrl/mlp.hpp"
#include "quadrl/policy.hpp"

using namespace quadrl;

namespace {

Mlp random_net(const std::vector<int>& sizes, RngStream& rng) {
  Mlp net = Mlp::zeros(sizes);
  for (auto& layer : net.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = 0.5 * rng.gaussian();
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = 0.2 * rng.gaussian();
  }
  return net;
}

// Scalar loss L = c . f(x) for a fixed random weighting c, so dL/dy = c.
double weighted_output(const Mlp& net, const Eigen::VectorXd& x, const Eigen::VectorXd& c) {
  const Eigen::MatrixXd y = mlp_forward(net, x.transpose());
  return (y.row(0) * c)(0, 0);
}

double max_relative_gradient_error(const Mlp& net, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& c) {
  ForwardCache cache;
  mlp_forward(net, x.transpose(), &cache);
  const std::vector<LayerParams> grads = mlp_backward(net, cache, c.transpose());

  const double eps = 1e-5;
  double worst = 0.0;
  Mlp probe = net;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto check_coeff = [&](double& coeff, double analytic) {
      const double saved = coeff;
      coeff = saved + eps;
      const double hi = weighted_output(probe, x, c);
      coeff = saved - eps;
      const double lo = weighted_output(probe, x, c);
      coeff = saved;
      const double fd = (hi - lo) / (2.0 * eps);
      const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-3});
      worst = std::max(worst, std::abs(fd - analytic) / scale);
    };
    for (Eigen::Index r = 0; r < probe.layers[l].weight.rows(); ++r) {
      for (Eigen::Index cidx = 0; cidx < probe.layers[l].weight.cols(); ++cidx) {
        check_coeff(probe.layers[l].weight(r, cidx), grads[l].weight(r, cidx));
      }
    }
    for (Eigen::Index r = 0; r < probe.layers[l].bias.size(); ++r) {
      check_coeff(probe.layers[l].bias[r], grads[l].bias[r]);
    }
  }
  return worst;
}

constexpr double kHalfLog2Pi = 0.9189385332046727;

double naive_log_prob(const Eigen::Vector4d& u, const Eigen::Vector4d& mean,
                      const Eigen::Vector4d& log_std) {
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double sigma = std::exp(log_std[i]);
    const double z = (u[i] - mean[i]) / sigma;
    const double t = std::tanh(u[i]);
    total += -0.5 * z * z - log_std[i] - kHalfLog2Pi - std::log(1.0 - t * t);
  }
  return total;
}

}  // namespace

// --------------------------------------------------------------------- mlp

TEST_CASE("a single linear layer computes W x + b") {
  Mlp net = Mlp::zeros({2, 3});
  net.layers[0].weight << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  net.layers[0].bias << 0.5, -0.5, 1.0;
  const Eigen::MatrixXd y = mlp_forward(net, Eigen::RowVector2d(1.0, -1.0));
  CHECK(y(0, 0) == doctest::Approx(1.0 - 2.0 + 0.5).epsilon(1e-15));
  CHECK(y(0, 1) == doctest::Approx(3.0 - 4.0 - 0.5).epsilon(1e-15));
  CHECK(y(0, 2) == doctest::Approx(5.0 - 6.0 + 1.0).epsilon(1e-15));
}

TEST_CASE("hidden layers apply tanh, the output layer stays linear") {
  Mlp net = Mlp::zeros({1, 1, 1});
  net.layers[0].weight << 2.0;
  net.layers[1].weight << 3.0;
  const Eigen::MatrixXd y = mlp_forward(net, Eigen::MatrixXd::Constant(1, 1, 0.7));
  CHECK(y(0, 0) == doctest::Approx(3.0 * std::tanh(1.4)).epsilon(1e-15));
}

TEST_CASE("batched rows equal independent single-row passes") {
  RngStream rng(31);
  const Mlp net = random_net({5, 8, 3}, rng);
  Eigen::MatrixXd X(4, 5);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 5; ++c) X(r, c) = rng.gaussian();
  }
  const Eigen::MatrixXd batch = mlp_forward(net, X);
  for (int r = 0; r < 4; ++r) {
    const Eigen::MatrixXd single = mlp_forward(net, X.row(r));
    CHECK((batch.row(r) - single.row(0)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("analytic gradients agree with central finite differences on 50 random nets") {
  RngStream rng(42);
  int cases = 0;
  double worst = 0.0;
  const std::vector<std::vector<int>> shapes = {
      {3, 5, 2}, {4, 6, 6, 3}, {6, 4, 1}, {2, 8, 2}, {5, 5, 5, 5, 1}};
  while (cases < 50) {
    const auto& shape = shapes[static_cast<std::size_t>(cases) % shapes.size()];
    const Mlp net = random_net(shape, rng);
    Eigen::VectorXd x(shape.front());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.gaussian();
    Eigen::VectorXd c(shape.back());
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.gaussian();
    worst = std::max(worst, max_relative_gradient_error(net, x, c));
    ++cases;
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("gradients of the production-size network pass the same check") {
  RngStream rng(43);
  const Mlp net = random_net({17, 64, 64, 4}, rng);
  Eigen::VectorXd x(17);
  for (int i = 0; i < 17; ++i) x[i] = rng.gaussian();
  Eigen::VectorXd c(4);
  for (int i = 0; i < 4; ++i) c[i] = rng.gaussian();
  CHECK(max_relative_gradient_error(net, x, c) < 1e-5);
}

TEST_CASE("batched backward accumulates per-row gradients") {
  RngStream rng(44);
  const Mlp net = random_net({4, 6, 2}, rng);
  Eigen::MatrixXd X(3, 4);
  Eigen::MatrixXd G(3, 2);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) X(r, c) = rng.gaussian();
    for (int c = 0; c < 2; ++c) G(r, c) = rng.gaussian();
  }
  ForwardCache cache;
  mlp_forward(net, X, &cache);
  const auto batch_grads = mlp_backward(net, cache, G);

  auto sum_grads = net.zeros_like();
  for (int r = 0; r < 3; ++r) {
    ForwardCache single;
    mlp_forward(net, X.row(r), &single);
    const auto g = mlp_backward(net, single, G.row(r));
    for (std::size_t l = 0; l < g.size(); ++l) {
      sum_grads[l].weight += g[l].weight;
      sum_grads[l].bias += g[l].bias;
    }
  }
  for (std::size_t l = 0; l < batch_grads.size(); ++l) {
    CHECK((batch_grads[l].weight - sum_grads[l].weight).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((batch_grads[l].bias - sum_grads[l].bias).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("orthogonal matrices have orthonormal columns or rows times the gain") {
  RngStream rng(45);
  {
    const Eigen::MatrixXd W = orthogonal_matrix(8, 8, 1.0, rng);
    CHECK((W.transpose() * W - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
  }
  {
    const Eigen::MatrixXd W = orthogonal_matrix(12, 5, 2.0, rng);  // tall
    CHECK((W.transpose() * W - 4.0 * Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  {
    const Eigen::MatrixXd W = orthogonal_matrix(3, 9, 0.5, rng);  // wide
    CHECK((W * W.transpose() - 0.25 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("network init scales hidden layers by sqrt(2) and the output by its gain") {
  RngStream rng(46);
  Mlp net = Mlp::zeros({17, 64, 64, 4});
  orthogonal_init(net, 0.01, rng);
  // Hidden weights: tall 64x17 then square 64x64, columns scaled by sqrt(2).
  const Eigen::MatrixXd& W0 = net.layers[0].weight;
  CHECK((W0.transpose() * W0 - 2.0 * Eigen::MatrixXd::Identity(17, 17)).cwiseAbs().maxCoeff() <
        1e-12);
  // Output: wide 4x64, rows scaled by 0.01.
  const Eigen::MatrixXd& W2 = net.layers[2].weight;
  CHECK((W2 * W2.transpose() - 1e-4 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-12);
  for (const auto& layer : net.layers) CHECK(layer.bias.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("initialization is deterministic in the seed") {
  const PolicyParameters a = PolicyParameters::initialize(99);
  const PolicyParameters b = PolicyParameters::initialize(99);
  const PolicyParameters c = PolicyParameters::initialize(100);
  CHECK((a.actor.layers[0].weight - b.actor.layers[0].weight).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.critic.layers[2].weight - b.critic.layers[2].weight).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.actor.layers[0].weight - c.actor.layers[0].weight).cwiseAbs().maxCoeff() > 0.0);
  CHECK((a.log_std.array() == -0.5).all());
}

// ------------------------------------------------------------------ policy

TEST_CASE("log probability matches the direct density formula at moderate inputs") {
  RngStream rng(47);
  for (int i = 0; i < 200; ++i) {
    Eigen::Vector4d u, mean, log_std;
    for (int k = 0; k < 4; ++k) {
      u[k] = rng.uniform(-2.0, 2.0);
      mean[k] = rng.uniform(-1.0, 1.0);
      log_std[k] = rng.uniform(-1.5, 0.5);
    }
    CHECK(tanh_gaussian_log_prob(u, mean, log_std) ==
          doctest::Approx(naive_log_prob(u, mean, log_std)).epsilon(1e-12));
  }
}

TEST_CASE("log probability stays finite where the naive formula underflows") {
  const Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  const Eigen::Vector4d log_std = Eigen::Vector4d::Zero();
  Eigen::Vector4d u(20.0, 0.0, 0.0, 0.0);
  // For the saturated coordinate: -0.5*400 - half-log-2pi + 38.61370563888011.
  const double expect = (-0.5 * 400.0 - kHalfLog2Pi + 38.61370563888011) +
                        3.0 * (-kHalfLog2Pi);  // three coordinates at u = 0
  CHECK(std::isfinite(tanh_gaussian_log_prob(u, mean, log_std)));
  CHECK(tanh_gaussian_log_prob(u, mean, log_std) == doctest::Approx(expect).epsilon(1e-9));

  u = Eigen::Vector4d(-15.0, 0.0, 0.0, 0.0);
  const double expect_neg = (-0.5 * 225.0 - kHalfLog2Pi + 28.613705638880297) +
                            3.0 * (-kHalfLog2Pi);
  CHECK(tanh_gaussian_log_prob(u, mean, log_std) == doctest::Approx(expect_neg).epsilon(1e-9));
}

TEST_CASE("entropy of the pre-squash gaussian has its closed form") {
  const Eigen::Vector4d log_std = Eigen::Vector4d::Constant(-0.5);
  const double expect = 4.0 * (0.5 + kHalfLog2Pi) - 2.0;
  CHECK(gaussian_entropy(log_std) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sampled actions are squashed pre-squash draws with consistent log density") {
  const PolicyParameters policy = PolicyParameters::initialize(7);
  RngStream rng(88);
  Observation obs = Observation::Zero();
  obs[2] = -0.4;
  for (int i = 0; i < 50; ++i) {
    const ActionSample s = sample_action(policy, obs, rng);
    for (int k = 0; k < 4; ++k) {
      CHECK(s.action[k] == doctest::Approx(std::tanh(s.pre_squash[k])).epsilon(1e-15));
      CHECK(std::abs(s.action[k]) < 1.0);
    }
    const Eigen::MatrixXd mu = mlp_forward(policy.actor, obs.transpose());
    CHECK(s.log_prob ==
          doctest::Approx(tanh_gaussian_log_prob(s.pre_squash, mu.row(0).transpose(),
                                                 policy.log_std))
              .epsilon(1e-12));
  }
}

TEST_CASE("the deterministic action is the squashed actor mean") {
  const PolicyParameters policy = PolicyParameters::initialize(7);
  Observation obs = Observation::Zero();
  obs[0] = 0.3;
  obs[7] = -0.2;
  const Eigen::MatrixXd mu = mlp_forward(policy.actor, obs.transpose());
  const Eigen::Vector4d a = deterministic_action(policy, obs);
  for (int k = 0; k < 4; ++k) CHECK(a[k] == doctest::Approx(std::tanh(mu(0, k))).epsilon(1e-15));
}

TEST_CASE("value estimates come from the critic head") {
  const PolicyParameters policy = PolicyParameters::initialize(7);
  Observation obs = Observation::Zero();
  obs[1] = 0.9;
  const Eigen::MatrixXd v = mlp_forward(policy.critic, obs.transpose());
  CHECK(value_estimate(policy, obs) == doctest::Approx(v(0, 0)).epsilon(1e-15));
}

// -------------------------------------------------------------------- adam

TEST_CASE("two optimizer steps match hand-computed moment updates") {
  // Scalar weight w = 1, gradients 0.3 then -0.2, lr = 0.01, default betas:
  // the bias-corrected update gives 0.9900000003333334 then 0.9885547950928597.
  PolicyParameters p;
  p.actor = Mlp::zeros({1, 1});
  p.critic = Mlp::zeros({1, 1});
  p.actor.layers[0].weight(0, 0) = 1.0;

  AdamOptimizer adam(p);
  PolicyGradients g = PolicyGradients::zeros_like(p);
  g.actor[0].weight(0, 0) = 0.3;
  adam.step(p, g, 0.01);
  CHECK(p.actor.layers[0].weight(0, 0) == doctest::Approx(0.9900000003333334).epsilon(1e-14));

  g.actor[0].weight(0, 0) = -0.2;
  adam.step(p, g, 0.01);
  CHECK(p.actor.layers[0].weight(0, 0) == doctest::Approx(0.9885547950928597).epsilon(1e-14));
  CHECK(adam.step_count() == 2);
}

TEST_CASE("log std stays inside its clamp after optimizer steps") {
  PolicyParameters p = PolicyParameters::initialize(3);
  AdamOptimizer adam(p);
  PolicyGradients g = PolicyGradients::zeros_like(p);
  g.log_std = Eigen::Vector4d::Constant(1.0);
  for (int i = 0; i < 10000; ++i) adam.step(p, g, 1.0);
  for (int k = 0; k < 4; ++k) {
    CHECK(p.log_std[k] >= kLogStdMin);
    CHECK(p.log_std[k] <= kLogStdMax);
  }
}

TEST_CASE("gradient clipping rescales to the threshold and reports the raw norm") {
  PolicyParameters p;
  p.actor = Mlp::zeros({2, 2});
  p.critic = Mlp::zeros({2, 1});
  PolicyGradients g = PolicyGradients::zeros_like(p);
  g.actor[0].weight << 3.0, 0.0, 0.0, 4.0;  // norm 5
  const double raw = clip_gradient_norm(g, 0.5);
  CHECK(raw == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(global_gradient_norm(g) == doctest::Approx(0.5).epsilon(1e-12));

  PolicyGradients small = PolicyGradients::zeros_like(p);
  small.critic[0].weight(0, 0) = 0.1;
  const double raw2 = clip_gradient_norm(small, 0.5);
  CHECK(raw2 == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(small.critic[0].weight(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
}

// -------------------------------------------------------------- checkpoint

TEST_CASE("checkpoints round-trip weights, optimizer state, and metadata bit-exactly") {
  const auto dir = std::filesystem::temp_directory_path() / "quadrl_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "roundtrip.ckpt";

  PolicyParameters p = PolicyParameters::initialize(11);
  AdamOptimizer adam(p);
  PolicyGradients g = PolicyGradients::zeros_like(p);
  g.actor[0].weight.setConstant(0.01);
  g.log_std = Eigen::Vector4d(0.1, -0.2, 0.3, -0.4);
  adam.step(p, g, 1e-3);

  Checkpoint out;
  out.policy = p;
  out.meta_json = "{\"note\":\"roundtrip\"}";
  out.has_optimizer = true;
  out.adam_step = adam.step_count();
  out.adam_m = adam.first_moment();
  out.adam_v = adam.second_moment();
  save_checkpoint(path, out);

  const Checkpoint in = load_checkpoint(path);
  CHECK(in.meta_json == out.meta_json);
  CHECK(in.has_optimizer);
  CHECK(in.adam_step == out.adam_step);
  for (std::size_t l = 0; l < p.actor.layers.size(); ++l) {
    CHECK((in.policy.actor.layers[l].weight.array() == p.actor.layers[l].weight.array()).all());
    CHECK((in.policy.actor.layers[l].bias.array() == p.actor.layers[l].bias.array()).all());
  }
  for (std::size_t l = 0; l < p.critic.layers.size(); ++l) {
    CHECK((in.policy.critic.layers[l].weight.array() == p.critic.layers[l].weight.array()).all());
  }
  CHECK((in.policy.log_std.array() == p.log_std.array()).all());
  CHECK((in.adam_m.actor[0].weight.array() == out.adam_m.actor[0].weight.array()).all());
  CHECK((in.adam_v.critic[1].weight.array() == out.adam_v.critic[1].weight.array()).all());
  std::filesystem::remove_all(dir);
}

TEST_CASE("loading rejects missing, corrupt, and truncated files") {
  const auto dir = std::filesystem::temp_directory_path() / "quadrl_ckpt_bad";
  std::filesystem::create_directories(dir);

  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), ConfigError);

  const auto garbage = dir / "garbage.ckpt";
  {
    std::ofstream f(garbage, std::ios::binary);
    f << "definitely not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(garbage), ConfigError);

  // Valid file cut in half.
  const auto whole = dir / "whole.ckpt";
  Checkpoint out;
  out.policy = PolicyParameters::initialize(1);
  save_checkpoint(whole, out);
  const auto truncated = dir / "truncated.ckpt";
  {
    std::ifstream src(whole, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(src)), std::istreambuf_iterator<char>());
    std::ofstream dst(truncated, std::ios::binary);
    dst.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_checkpoint(truncated), ConfigError);
  std::filesystem::remove_all(dir);
}

#include "quadrl/mlp.hpp"

#include <stdexcept>

namespace quadrl {

Mlp Mlp::zeros(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("mlp: need at least input and output size");
  Mlp net;
  net.layers.reserve(sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] < 1 || sizes[l + 1] < 1) throw std::invalid_argument("mlp: sizes must be >= 1");
    net.layers.push_back({Eigen::MatrixXd::Zero(sizes[l + 1], sizes[l]),
                          Eigen::VectorXd::Zero(sizes[l + 1])});
  }
  return net;
}

std::vector<LayerParams> Mlp::zeros_like() const {
  std::vector<LayerParams> grads;
  grads.reserve(layers.size());
  for (const auto& layer : layers) {
    grads.push_back({Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                     Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return grads;
}

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& X, ForwardCache* cache) {
  if (X.cols() != net.layers.front().weight.cols()) {
    throw std::invalid_argument("mlp: input width does not match first layer");
  }
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(X);
  }
  Eigen::MatrixXd h = X;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd z = h * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (l + 1 < net.layers.size()) {
      h = z.array().tanh().matrix();
      if (cache) cache->activations.push_back(h);
    } else {
      h = std::move(z);
    }
  }
  return h;
}

std::vector<LayerParams> mlp_backward(const Mlp& net, const ForwardCache& cache,
                                      const Eigen::MatrixXd& output_grad) {
  const std::size_t n_layers = net.layers.size();
  if (cache.activations.size() != n_layers) {
    throw std::invalid_argument("mlp: cache does not match network");
  }
  std::vector<LayerParams> grads(n_layers);
  Eigen::MatrixXd g = output_grad;  // d loss / d pre-activation of current layer
  for (std::size_t l = n_layers; l-- > 0;) {
    const Eigen::MatrixXd& input = cache.activations[l];
    grads[l].weight = g.transpose() * input;
    grads[l].bias = g.colwise().sum().transpose();
    if (l > 0) {
      // Input of this layer is tanh output of the previous one:
      // d tanh(z) / d z = 1 - tanh(z)^2.
      g = ((g * net.layers[l].weight).array() * (1.0 - input.array().square())).matrix();
    }
  }
  return grads;
}

Eigen::MatrixXd orthogonal_matrix(int rows, int cols, double gain, RngStream& rng) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("orthogonal: sizes must be >= 1");
  const bool transpose = rows < cols;
  const int r = transpose ? cols : rows;
  const int c = transpose ? rows : cols;
  Eigen::MatrixXd a(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) a(i, j) = rng.gaussian();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
  // Fix the sign ambiguity of QR so the factorization (and hence the sampled
  // distribution) is unique: make diag(R) positive.
  const Eigen::MatrixXd& qr_packed = qr.matrixQR();
  for (int j = 0; j < c; ++j) {
    if (qr_packed(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  Eigen::MatrixXd m = transpose ? Eigen::MatrixXd(q.transpose()) : q;
  return gain * m;
}

void orthogonal_init(Mlp& net, double output_gain, RngStream& rng) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    const double gain = (l + 1 < net.layers.size()) ? std::sqrt(2.0) : output_gain;
    layer.weight = orthogonal_matrix(static_cast<int>(layer.weight.rows()),
                                     static_cast<int>(layer.weight.cols()), gain, rng);
    layer.bias.setZero();
  }
}

}  // namespace quadrl

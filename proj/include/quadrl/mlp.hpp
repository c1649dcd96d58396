#pragma once

#include <vector>

#include <Eigen/Dense>

#include "quadrl/rng.hpp"

namespace quadrl {

struct LayerParams {
  Eigen::MatrixXd weight;  // (out x in)
  Eigen::VectorXd bias;    // (out)
};

// Fully connected network with tanh hidden activations and a linear output
// layer. Parameters are plain matrices so gradients, Adam moments and
// checkpoints can all reuse the same containers.
struct Mlp {
  std::vector<LayerParams> layers;

  // sizes = {input, hidden..., output}; parameters zero-initialized.
  static Mlp zeros(const std::vector<int>& sizes);

  std::vector<LayerParams> zeros_like() const;

  int input_dim() const { return static_cast<int>(layers.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers.front().weight.rows()) == 0
                               ? 0
                               : static_cast<int>(layers.back().weight.rows()); }
};

// Per-layer inputs captured during the forward pass, as needed by backward():
// activations[0] is the network input, activations[l] for l >= 1 the post-tanh
// output of hidden layer l-1. One row per batch element throughout.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
};

// X has one observation per row; returns one output row per input row.
// Pass a cache to enable a subsequent backward().
Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& X,
                            ForwardCache* cache = nullptr);

// Backpropagates output_grad (d loss / d network output, one row per batch
// element) through the cached forward pass. Returned gradients are summed
// over the batch, matching net.layers in shape.
std::vector<LayerParams> mlp_backward(const Mlp& net, const ForwardCache& cache,
                                      const Eigen::MatrixXd& output_grad);

// Gain-scaled orthogonal matrix via Householder QR of a Gaussian sample, with
// the R-diagonal sign fix so the distribution is Haar. For rows < cols the
// transpose is orthogonalized so the rows come out orthonormal.
Eigen::MatrixXd orthogonal_matrix(int rows, int cols, double gain, RngStream& rng);

// Orthogonal weights (gain sqrt(2) on hidden layers, output_gain on the last)
// and zero biases.
void orthogonal_init(Mlp& net, double output_gain, RngStream& rng);

}  // namespace quadrl

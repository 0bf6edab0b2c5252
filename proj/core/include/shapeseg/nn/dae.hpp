#pragma once

#include "shapeseg/nn/network.hpp"

#include <Eigen/Core>

#include <vector>

namespace shapeseg::nn {

/// One encoder layer h = sigmoid(W x + b).
struct EncoderLayer {
  Eigen::MatrixXd weights;  // hidden x input
  Eigen::VectorXd bias;     // hidden
};

/// Denoising autoencoder with tied weights: the decoder is
/// z = sigmoid(W^T h + c).
struct DaeResult {
  EncoderLayer encoder;
  Eigen::VectorXd decoder_bias;
  std::vector<double> loss_trace;  // mean per-sample loss of each epoch
};

/// Mean over columns of 0.5 * ||decode(encode(corrupted)) - target||^2.
double dae_batch_loss(const EncoderLayer& enc, const Eigen::VectorXd& decoder_bias,
                      const Eigen::MatrixXd& corrupted, const Eigen::MatrixXd& target);

struct DaeGradient {
  Eigen::MatrixXd weights;
  Eigen::VectorXd encoder_bias;
  Eigen::VectorXd decoder_bias;
};

/// Analytic gradient of dae_batch_loss.
DaeGradient dae_batch_gradient(const EncoderLayer& enc, const Eigen::VectorXd& decoder_bias,
                               const Eigen::MatrixXd& corrupted, const Eigen::MatrixXd& target);

/// Trains a tied-weight denoising autoencoder by plain mini-batch SGD.
///
/// `data` holds one sample per column. The procedure is a pure function of
/// its arguments; random draws happen in this order from Rng(cfg.seed):
///   1. weights row-major, uniform in +-sigmoid_init_bound (biases start 0);
///   2. per epoch, a Fisher-Yates shuffle of the sample order;
///   3. per sample in batch order, one uniform per input element deciding
///      whether it is masked to zero (skipped when corruption_rate == 0).
/// The loss trace records, for each epoch, the mean loss of the batches
/// measured before their update.
DaeResult train_dae(Eigen::Index input_dim, Eigen::Index hidden_dim, const Eigen::MatrixXd& data,
                    const TrainConfig& cfg);

/// Greedy layer-wise stack. Layer i is trained on the clean hidden
/// activations of layer i-1, with seed cfg.seed + i.
struct StackedEncoder {
  std::vector<Eigen::Index> layer_dims;
  std::vector<EncoderLayer> layers;
  std::vector<std::vector<double>> loss_traces;

  /// Activations of the top layer for a column-wise batch.
  Eigen::MatrixXd encode(const Eigen::MatrixXd& inputs) const;
};

StackedEncoder stack_sdae(const std::vector<Eigen::Index>& layer_dims, const Eigen::MatrixXd& data,
                          const TrainConfig& cfg);

}  // namespace shapeseg::nn

#include "shapeseg/nn/dae.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace shapeseg::nn {
namespace {

Eigen::MatrixXd encode_batch(const EncoderLayer& enc, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd pre = enc.weights * x;
  pre.colwise() += enc.bias;
  return sigmoid(pre);
}

Eigen::MatrixXd decode_batch(const EncoderLayer& enc, const Eigen::VectorXd& decoder_bias,
                             const Eigen::MatrixXd& h) {
  Eigen::MatrixXd pre = enc.weights.transpose() * h;
  pre.colwise() += decoder_bias;
  return sigmoid(pre);
}

}  // namespace

double dae_batch_loss(const EncoderLayer& enc, const Eigen::VectorXd& decoder_bias,
                      const Eigen::MatrixXd& corrupted, const Eigen::MatrixXd& target) {
  const Eigen::MatrixXd z = decode_batch(enc, decoder_bias, encode_batch(enc, corrupted));
  return 0.5 * (z - target).squaredNorm() / static_cast<double>(target.cols());
}

DaeGradient dae_batch_gradient(const EncoderLayer& enc, const Eigen::VectorXd& decoder_bias,
                               const Eigen::MatrixXd& corrupted, const Eigen::MatrixXd& target) {
  const double inv_n = 1.0 / static_cast<double>(target.cols());
  const Eigen::MatrixXd h = encode_batch(enc, corrupted);
  const Eigen::MatrixXd z = decode_batch(enc, decoder_bias, h);
  const Eigen::MatrixXd dz = ((z - target).array() * z.array() * (1.0 - z.array())).matrix() * inv_n;
  const Eigen::MatrixXd dh = ((enc.weights * dz).array() * h.array() * (1.0 - h.array())).matrix();
  DaeGradient g;
  g.weights = dh * corrupted.transpose() + h * dz.transpose();
  g.encoder_bias = dh.rowwise().sum();
  g.decoder_bias = dz.rowwise().sum();
  return g;
}

DaeResult train_dae(Eigen::Index input_dim, Eigen::Index hidden_dim, const Eigen::MatrixXd& data,
                    const TrainConfig& cfg) {
  cfg.validate();
  if (input_dim <= 0 || hidden_dim <= 0) throw DataError("autoencoder dims must be positive");
  if (data.cols() == 0) throw DataError("autoencoder training data is empty");
  if (data.rows() != input_dim) {
    throw DataError("autoencoder data has length " + std::to_string(data.rows()) + ", expected " +
                    std::to_string(input_dim));
  }

  Rng rng(cfg.seed);
  DaeResult result;
  const double bound = sigmoid_init_bound(input_dim, hidden_dim);
  result.encoder.weights.resize(hidden_dim, input_dim);
  for (Eigen::Index r = 0; r < hidden_dim; ++r) {
    for (Eigen::Index c = 0; c < input_dim; ++c) result.encoder.weights(r, c) = rng.uniform(-bound, bound);
  }
  result.encoder.bias = Eigen::VectorXd::Zero(hidden_dim);
  result.decoder_bias = Eigen::VectorXd::Zero(input_dim);

  const Eigen::Index n = data.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  result.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    rng.shuffle(std::span<Eigen::Index>(order));
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + start + len);
      const Eigen::MatrixXd target = data(Eigen::all, idx);
      Eigen::MatrixXd corrupted = target;
      if (cfg.corruption_rate > 0.0) {
        for (Eigen::Index c = 0; c < len; ++c) {
          for (Eigen::Index r = 0; r < input_dim; ++r) {
            if (rng.uniform() < cfg.corruption_rate) corrupted(r, c) = 0.0;
          }
        }
      }
      const double loss = dae_batch_loss(result.encoder, result.decoder_bias, corrupted, target);
      if (!std::isfinite(loss)) {
        throw NumericError("autoencoder loss became non-finite at epoch " + std::to_string(epoch) +
                           " (learning rate too large?)");
      }
      loss_sum += loss * static_cast<double>(len);
      const DaeGradient g = dae_batch_gradient(result.encoder, result.decoder_bias, corrupted, target);
      result.encoder.weights -= cfg.learning_rate * g.weights;
      result.encoder.bias -= cfg.learning_rate * g.encoder_bias;
      result.decoder_bias -= cfg.learning_rate * g.decoder_bias;
    }
    result.loss_trace.push_back(loss_sum / static_cast<double>(n));
  }
  return result;
}

Eigen::MatrixXd StackedEncoder::encode(const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd a = inputs;
  for (const auto& layer : layers) a = encode_batch(layer, a);
  return a;
}

StackedEncoder stack_sdae(const std::vector<Eigen::Index>& layer_dims, const Eigen::MatrixXd& data,
                          const TrainConfig& cfg) {
  if (layer_dims.size() < 2) throw DataError("stacked autoencoder needs at least two layer dims");
  for (auto d : layer_dims) {
    if (d <= 0) throw DataError("stacked autoencoder dims must be positive");
  }
  StackedEncoder stack;
  stack.layer_dims = layer_dims;
  Eigen::MatrixXd activations = data;
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
    TrainConfig layer_cfg = cfg;
    layer_cfg.seed = cfg.seed + i;
    DaeResult r = train_dae(layer_dims[i], layer_dims[i + 1], activations, layer_cfg);
    if (i + 2 < layer_dims.size()) activations = encode_batch(r.encoder, activations);
    stack.layers.push_back(std::move(r.encoder));
    stack.loss_traces.push_back(std::move(r.loss_trace));
  }
  return stack;
}

}  // namespace shapeseg::nn

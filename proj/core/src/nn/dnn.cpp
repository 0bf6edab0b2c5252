#include "shapeseg/nn/dnn.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/log.hpp"
#include "shapeseg/common/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace shapeseg::nn {
namespace {

void check_labels(const NetworkModel& model, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels) {
  if (inputs.rows() != model.input_dim()) {
    throw DataError("training vectors have length " + std::to_string(inputs.rows()) + ", network expects " +
                    std::to_string(model.input_dim()));
  }
  if (labels.size() != inputs.cols()) throw DataError("label count does not match sample count");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0) throw DataError("labels must be 0 or 1");
  }
}

// log(1 + exp(a)) without overflow.
double softplus(double a) { return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); }

}  // namespace

NetworkModel init_dnn_from_sdae(const StackedEncoder& sdae, Eigen::Index output_dim, std::uint64_t seed) {
  if (output_dim < 1) throw DataError("output_dim must be >= 1");
  if (sdae.layers.empty()) throw DataError("stacked encoder has no layers");
  NetworkModel model;
  model.seed = seed;
  model.layer_dims = sdae.layer_dims;
  for (const auto& layer : sdae.layers) {
    model.weights.push_back(layer.weights);
    model.biases.push_back(layer.bias);
  }
  const Eigen::Index fan_in = model.layer_dims.back();
  model.layer_dims.push_back(output_dim);
  Rng rng(seed);
  const double bound = sigmoid_init_bound(fan_in, output_dim);
  Eigen::MatrixXd w(output_dim, fan_in);
  for (Eigen::Index r = 0; r < output_dim; ++r) {
    for (Eigen::Index c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
  }
  model.weights.push_back(std::move(w));
  model.biases.push_back(Eigen::VectorXd::Zero(output_dim));
  model.validate();
  return model;
}

double dnn_batch_loss(const NetworkModel& model, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels) {
  const Eigen::VectorXd logits = logit_batch(model, inputs);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) sum += softplus(logits(i)) - labels(i) * logits(i);
  return sum / static_cast<double>(logits.size());
}

NetworkGradient dnn_batch_gradient(const NetworkModel& model, const Eigen::MatrixXd& inputs,
                                   const Eigen::VectorXd& labels) {
  const auto acts = forward_all(model, inputs);
  const std::size_t layers = model.layer_count();
  const double inv_n = 1.0 / static_cast<double>(inputs.cols());

  NetworkGradient g;
  g.weights.resize(layers);
  g.biases.resize(layers);

  // Cross-entropy through a sigmoid output: delta = y_hat - y on unit 0.
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(model.output_dim(), inputs.cols());
  delta.row(0) = (acts.back().row(0) - labels.transpose()) * inv_n;
  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = delta * acts[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = ((model.weights[l].transpose() * delta).array() * acts[l].array() * (1.0 - acts[l].array()))
                  .matrix();
    }
  }
  return g;
}

DnnTrainResult train_dnn(const NetworkModel& model, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels,
                         const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  check_labels(model, inputs, labels);
  if (inputs.cols() == 0) throw DataError("training data is empty");
  const double positives = labels.sum();
  if (positives == 0.0 || positives == static_cast<double>(labels.size())) {
    log::warn("fine-tuning on single-class data");
  }

  DnnTrainResult result{model, {}};
  result.model.train_config = cfg;
  Rng rng(cfg.seed);
  const Eigen::Index n = inputs.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    rng.shuffle(std::span<Eigen::Index>(order));
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + start + len);
      const Eigen::MatrixXd x = inputs(Eigen::all, idx);
      const Eigen::VectorXd y = labels(idx);
      const double loss = dnn_batch_loss(result.model, x, y);
      if (!std::isfinite(loss)) {
        throw NumericError("network loss became non-finite at epoch " + std::to_string(epoch));
      }
      loss_sum += loss * static_cast<double>(len);
      const NetworkGradient g = dnn_batch_gradient(result.model, x, y);
      for (std::size_t l = 0; l < result.model.layer_count(); ++l) {
        result.model.weights[l] -= cfg.learning_rate * g.weights[l];
        result.model.biases[l] -= cfg.learning_rate * g.biases[l];
      }
    }
    result.loss_trace.push_back(loss_sum / static_cast<double>(n));
  }
  return result;
}

}  // namespace shapeseg::nn

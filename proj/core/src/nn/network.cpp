#include "shapeseg/nn/network.hpp"

#include "shapeseg/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace shapeseg::nn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw DataError("learning_rate must be positive, got " + std::to_string(learning_rate));
  }
  if (batch_size < 1) throw DataError("batch_size must be >= 1");
  if (epochs < 0) throw DataError("epochs must be >= 0");
  if (!(corruption_rate >= 0.0 && corruption_rate < 1.0)) {
    throw DataError("corruption_rate must lie in [0, 1)");
  }
}

void NetworkModel::validate() const {
  if (layer_dims.size() < 2) throw DataError("network needs at least two layer dims");
  for (auto d : layer_dims) {
    if (d <= 0) throw DataError("layer dims must be positive");
  }
  if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
    throw DataError("weight/bias count does not match layer dims");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].rows() != layer_dims[i + 1] || weights[i].cols() != layer_dims[i]) {
      throw DataError("weight matrix " + std::to_string(i) + " does not chain with layer dims");
    }
    if (biases[i].size() != layer_dims[i + 1]) {
      throw DataError("bias vector " + std::to_string(i) + " has wrong length");
    }
    if (!weights[i].allFinite() || !biases[i].allFinite()) {
      throw DataError("non-finite parameter in layer " + std::to_string(i));
    }
  }
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

std::vector<Eigen::MatrixXd> forward_all(const NetworkModel& model, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != model.input_dim()) {
    throw DataError("input length " + std::to_string(inputs.rows()) + " does not match network input " +
                    std::to_string(model.input_dim()));
  }
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(model.layer_count() + 1);
  acts.push_back(inputs);
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    Eigen::MatrixXd pre = model.weights[i] * acts.back();
    pre.colwise() += model.biases[i];
    acts.push_back(sigmoid(pre));
  }
  return acts;
}

Eigen::MatrixXd forward(const NetworkModel& model, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != model.input_dim()) {
    throw DataError("input length " + std::to_string(inputs.rows()) + " does not match network input " +
                    std::to_string(model.input_dim()));
  }
  Eigen::MatrixXd a = inputs;
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    Eigen::MatrixXd pre = model.weights[i] * a;
    pre.colwise() += model.biases[i];
    a = sigmoid(pre);
  }
  return a;
}

double dnn_score(const NetworkModel& model, const Eigen::VectorXd& input) {
  // Saturated sigmoids round to exactly 0 or 1 in double precision.
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(forward(model, input)(0, 0), lo, hi);
}

Eigen::VectorXd score_batch(const NetworkModel& model, const Eigen::MatrixXd& inputs) {
  return forward(model, inputs).row(0).transpose();
}

Eigen::VectorXd logit_batch(const NetworkModel& model, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != model.input_dim()) {
    throw DataError("input length " + std::to_string(inputs.rows()) + " does not match network input " +
                    std::to_string(model.input_dim()));
  }
  Eigen::MatrixXd a = inputs;
  const std::size_t last = model.layer_count() - 1;
  for (std::size_t i = 0; i < last; ++i) {
    Eigen::MatrixXd pre = model.weights[i] * a;
    pre.colwise() += model.biases[i];
    a = sigmoid(pre);
  }
  Eigen::VectorXd out = (model.weights[last].row(0) * a).transpose();
  out.array() += model.biases[last](0);
  return out;
}

double sigmoid_init_bound(Eigen::Index fan_in, Eigen::Index fan_out) {
  return 4.0 * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace shapeseg::nn

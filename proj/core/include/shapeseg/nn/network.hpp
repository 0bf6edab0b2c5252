#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <vector>

namespace shapeseg::nn {

/// Mini-batch SGD settings shared by autoencoder pre-training and
/// supervised fine-tuning. corruption_rate only applies to autoencoders.
struct TrainConfig {
  double learning_rate = 0.1;
  int batch_size = 1000;
  int epochs = 100;
  double corruption_rate = 0.25;
  std::uint64_t seed = 0;

  /// Throws DataError when a field is out of range.
  void validate() const;
};

/// Fully connected sigmoid network. weights[i] maps layer i to layer i+1
/// and has shape layer_dims[i+1] x layer_dims[i].
struct NetworkModel {
  std::vector<Eigen::Index> layer_dims;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::uint64_t seed = 0;
  TrainConfig train_config;

  Eigen::Index input_dim() const { return layer_dims.front(); }
  Eigen::Index output_dim() const { return layer_dims.back(); }
  std::size_t layer_count() const { return weights.size(); }

  /// Checks the dimension chain and finiteness; throws DataError.
  void validate() const;
};

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

/// Elementwise logistic function.
Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& a);

/// Activations of every layer for a batch stored column-wise; element 0 is
/// the input itself.
std::vector<Eigen::MatrixXd> forward_all(const NetworkModel& model, const Eigen::MatrixXd& inputs);

/// Output-layer activations for a column-wise batch.
Eigen::MatrixXd forward(const NetworkModel& model, const Eigen::MatrixXd& inputs);

/// First output unit for one input vector; strictly inside (0, 1) for any
/// finite input.
double dnn_score(const NetworkModel& model, const Eigen::VectorXd& input);

/// First output unit for every column of `inputs`.
Eigen::VectorXd score_batch(const NetworkModel& model, const Eigen::MatrixXd& inputs);

/// Pre-sigmoid value of the first output unit for every column. Monotone in
/// the score but does not saturate, so detectors rank candidates by it.
Eigen::VectorXd logit_batch(const NetworkModel& model, const Eigen::MatrixXd& inputs);

/// Uniform sigmoid-layer initialization in +-4*sqrt(6/(fan_in+fan_out)).
double sigmoid_init_bound(Eigen::Index fan_in, Eigen::Index fan_out);

}  // namespace shapeseg::nn

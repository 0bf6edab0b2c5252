#pragma once

#include "shapeseg/nn/dae.hpp"
#include "shapeseg/nn/network.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace shapeseg::nn {

/// Copies the encoder stack into the hidden layers and appends a randomly
/// initialized sigmoid output layer drawn from Rng(seed).
NetworkModel init_dnn_from_sdae(const StackedEncoder& sdae, Eigen::Index output_dim, std::uint64_t seed);

/// Mean binary cross-entropy of the first output unit against 0/1 labels.
double dnn_batch_loss(const NetworkModel& model, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels);

struct NetworkGradient {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Analytic gradient of dnn_batch_loss with respect to every layer.
NetworkGradient dnn_batch_gradient(const NetworkModel& model, const Eigen::MatrixXd& inputs,
                                   const Eigen::VectorXd& labels);

struct DnnTrainResult {
  NetworkModel model;
  std::vector<double> loss_trace;
};

/// Supervised fine-tuning of all layers by mini-batch SGD on binary
/// cross-entropy. Labels must be 0 or 1; single-class data trains with a
/// warning. Shuffles are drawn from Rng(cfg.seed).
DnnTrainResult train_dnn(const NetworkModel& model, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& labels,
                         const TrainConfig& cfg);

}  // namespace shapeseg::nn

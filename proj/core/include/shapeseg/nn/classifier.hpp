#pragma once

#include "shapeseg/nn/network.hpp"

#include <Eigen/Core>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace shapeseg::nn {

/// Hidden widths plus the two training stages of a detector.
struct DetectorConfig {
  std::vector<Eigen::Index> hidden{800, 400};
  TrainConfig pretrain{0.001, 1000, 100, 0.25, 0};
  TrainConfig finetune{0.1, 1000, 100, 0.0, 0};
};

struct ClassifierResult {
  NetworkModel model;
  std::vector<std::vector<double>> pretrain_losses;  // one trace per stacked layer
  std::vector<double> finetune_loss;
};

/// SdAE pre-training on all inputs followed by supervised fine-tuning with
/// one sigmoid output. Both classes must be present; `name` labels the
/// error. Pre-training uses seed+0.., fine-tuning and the output layer
/// derive their seeds from `seed`.
ClassifierResult train_classifier(const Eigen::MatrixXd& inputs, std::span<const int> labels,
                                  const DetectorConfig& cfg, std::uint64_t seed, const std::string& name);

/// Ranks candidates, higher is better. `features` holds one candidate per
/// column; `candidates` carries the scanned parameter (position, angle or
/// mode weight) of each column so that stubs can score analytically.
using CandidateScorer =
    std::function<Eigen::VectorXd(const Eigen::MatrixXd& features, std::span<const double> candidates)>;

/// Scores by the network's pre-sigmoid output, which orders candidates the
/// same way as dnn_score without saturating into ties.
CandidateScorer network_scorer(const NetworkModel& model);

struct TopNResult {
  double value = 0.0;
  bool flat = false;  // every score identical
};

/// Unweighted mean of the candidates with the n highest scores; equal
/// scores are ordered by candidate index.
TopNResult top_n_mean(std::span<const double> candidates, const Eigen::VectorXd& scores, int n);

}  // namespace shapeseg::nn

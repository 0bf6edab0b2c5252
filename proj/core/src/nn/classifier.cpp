#include "shapeseg/nn/classifier.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/rng.hpp"
#include "shapeseg/nn/dae.hpp"
#include "shapeseg/nn/dnn.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace shapeseg::nn {

ClassifierResult train_classifier(const Eigen::MatrixXd& inputs, std::span<const int> labels,
                                  const DetectorConfig& cfg, std::uint64_t seed, const std::string& name) {
  if (static_cast<Eigen::Index>(labels.size()) != inputs.cols()) throw DataError(name + ": label count mismatch");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  const auto negatives = std::count(labels.begin(), labels.end(), 0);
  if (positives + negatives != static_cast<long>(labels.size())) throw DataError(name + ": labels must be 0 or 1");
  if (positives == 0 || negatives == 0) {
    throw DataError(name + ": training data has a single class (" + std::to_string(positives) + " positive, " +
                    std::to_string(negatives) + " negative)");
  }
  std::vector<Eigen::Index> dims{inputs.rows()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());

  TrainConfig pre = cfg.pretrain;
  pre.seed = mix_seed(seed, "pretrain");
  TrainConfig fine = cfg.finetune;
  fine.seed = mix_seed(seed, "finetune");

  ClassifierResult out;
  if (cfg.hidden.empty()) throw DataError(name + ": at least one hidden layer is required");
  const StackedEncoder sdae = stack_sdae(dims, inputs, pre);
  out.pretrain_losses = sdae.loss_traces;
  NetworkModel init = init_dnn_from_sdae(sdae, 1, mix_seed(seed, "output"));
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i];
  DnnTrainResult trained = train_dnn(init, inputs, y, fine);
  out.model = std::move(trained.model);
  out.finetune_loss = std::move(trained.loss_trace);
  return out;
}

CandidateScorer network_scorer(const NetworkModel& model) {
  auto shared = std::make_shared<const NetworkModel>(model);
  return [shared](const Eigen::MatrixXd& features, std::span<const double>) {
    if (features.rows() != shared->input_dim()) {
      throw DataError("detector expects inputs of length " + std::to_string(shared->input_dim()) + ", got " +
                      std::to_string(features.rows()));
    }
    return logit_batch(*shared, features);
  };
}

TopNResult top_n_mean(std::span<const double> candidates, const Eigen::VectorXd& scores, int n) {
  if (candidates.empty()) throw DataError("no candidates to rank");
  if (static_cast<Eigen::Index>(candidates.size()) != scores.size()) throw DataError("score count mismatch");
  if (n < 1) throw DataError("top_n must be at least 1");
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores(i))) throw NumericError("detector produced a non-finite score");
  }
  TopNResult r;
  r.flat = scores.maxCoeff() == scores.minCoeff();
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(n), order.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += candidates[order[i]];
  r.value = sum / static_cast<double>(take);
  return r;
}

}  // namespace shapeseg::nn

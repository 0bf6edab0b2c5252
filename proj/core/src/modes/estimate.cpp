#include "shapeseg/modes/estimate.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/log.hpp"
#include "shapeseg/common/rng.hpp"
#include "shapeseg/data/augment.hpp"
#include "shapeseg/modes/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace shapeseg::modes {

std::vector<nn::CandidateScorer> ModeDetectorSet::scorers() const {
  std::vector<nn::CandidateScorer> out;
  out.reserve(detectors.size());
  for (const auto& d : detectors) out.push_back(nn::network_scorer(d));
  return out;
}

ModeEstimate estimate_mode(const nn::CandidateScorer& scorer, const data::GrayImage& image,
                           const shape::Shape& x_prev, const shape::ShapeModel& model, const shape::SpaceParams& sp,
                           int k, const ModeConfig& cfg) {
  if (k < 1 || k > model.modes()) throw DataError("mode " + std::to_string(k) + " is not in the model");
  if (x_prev.landmark_count() != model.landmark_count()) throw DataError("stage shape does not match the model");
  const double sd = std::sqrt(model.eigvals(k - 1));
  const Eigen::VectorXd direction = shape::apply_linear(sp, model.eigvecs.col(k - 1) * sd);
  const std::vector<double> grid = ModeConfig::grid(cfg.range, cfg.scan_step);
  const Eigen::Index dim = x_prev.landmark_count() * cfg.q * cfg.q;
  Eigen::MatrixXd features(dim, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const shape::Shape candidate(x_prev.coords() + grid[i] * direction, x_prev.sides());
    features.col(static_cast<Eigen::Index>(i)) = extract_shape_patch_vector(image, candidate, cfg.q);
  }
  const Eigen::VectorXd scores = scorer(features, grid);
  const nn::TopNResult top = nn::top_n_mean(grid, scores, cfg.top_n);
  ModeEstimate est;
  if (top.flat) {
    log::warn("mode " + std::to_string(k) + " detector returned a flat score field; keeping the mean shape");
    est.degenerate = true;
    return est;
  }
  est.u = std::clamp(top.value, -cfg.range, cfg.range);
  est.b = est.u * sd;
  return est;
}

ModeRecursion::ModeRecursion(const shape::ShapeModel& model, const shape::SpaceParams& sp) : model_(&model), sp_(sp) {
  sp.validate();
  stages_.push_back(shape::apply_space(sp, model.mean_shape()));
}

void ModeRecursion::check_order(int k) const {
  if (k != stage() + 1) {
    throw DataError("mode " + std::to_string(k) + " cannot be estimated at stage " + std::to_string(stage()) +
                    "; modes must follow 1, 2, ... in order");
  }
  if (k > model_->modes()) throw DataError("mode " + std::to_string(k) + " is not in the model");
}

ModeEstimate ModeRecursion::step(int k, const nn::CandidateScorer& scorer, const data::GrayImage& image,
                                 const ModeConfig& cfg) {
  check_order(k);
  const ModeEstimate est = estimate_mode(scorer, image, current(), *model_, sp_, k, cfg);
  apply(k, est.b);
  return est;
}

void ModeRecursion::apply(int k, double b) {
  check_order(k);
  const Eigen::VectorXd delta = shape::apply_linear(sp_, model_->eigvecs.col(k - 1) * b);
  stages_.emplace_back(current().coords() + delta, current().sides());
  weights_.push_back(b);
}

SegmentResult segment(const data::GrayImage& image, const shape::SpaceParams& sp, const shape::ShapeModel& model,
                      std::span<const nn::CandidateScorer> detectors, int k_use, const ModeConfig& cfg) {
  if (k_use < 0) throw DataError("mode count must be non-negative");
  if (k_use > model.modes()) {
    throw DataError("requested " + std::to_string(k_use) + " modes but the shape model has " +
                    std::to_string(model.modes()));
  }
  for (int k = 1; k <= k_use; ++k) {
    if (static_cast<std::size_t>(k) > detectors.size() || !detectors[static_cast<std::size_t>(k - 1)]) {
      throw DataError("no detector for mode " + std::to_string(k) + " (requested " + std::to_string(k_use) + ")");
    }
  }
  ModeRecursion rec(model, sp);
  for (int k = 1; k <= k_use; ++k) rec.step(k, detectors[static_cast<std::size_t>(k - 1)], image, cfg);
  return {rec.stages(), rec.weights()};
}

SegmentResult segment(const data::GrayImage& image, const shape::SpaceParams& sp, const shape::ShapeModel& model,
                      const ModeDetectorSet& detectors, int k_use) {
  const Eigen::Index expect = model.landmark_count() * detectors.cfg.q * detectors.cfg.q;
  for (int k = 1; k <= std::min(k_use, detectors.modes()); ++k) {
    if (detectors.detectors[static_cast<std::size_t>(k - 1)].input_dim() != expect) {
      throw DataError("mode " + std::to_string(k) + " detector expects " +
                      std::to_string(detectors.detectors[static_cast<std::size_t>(k - 1)].input_dim()) +
                      " inputs but the model gives " + std::to_string(expect));
    }
  }
  const auto scorers = detectors.scorers();
  return segment(image, sp, model, scorers, k_use, detectors.cfg);
}

ModeLabeledSet balanced_mode_set(std::span<const ModeHypothesis> hyps, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(hyps.size());
  for (const auto& h : hyps) labels.push_back(h.label);
  const auto keep = data::balance_classes(labels, seed);
  ModeLabeledSet out;
  if (keep.empty()) return out;
  out.features.resize(hyps[keep.front()].feature.size(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto& h = hyps[keep[i]];
    if (h.feature.size() != out.features.rows()) throw DataError("mode hypothesis feature lengths differ");
    out.features.col(static_cast<Eigen::Index>(i)) = h.feature;
    out.labels.push_back(h.label);
    (h.label == 1 ? out.positives : out.negatives)++;
  }
  return out;
}

nn::ClassifierResult train_mode_detector(std::span<const ModeHypothesis> hyps, int k, const nn::DetectorConfig& cfg,
                                         std::uint64_t seed) {
  if (hyps.empty()) throw DataError("no hypotheses for mode " + std::to_string(k));
  const ModeLabeledSet set = balanced_mode_set(hyps, mix_seed(seed, "balance"));
  return nn::train_classifier(set.features, set.labels, cfg, seed, "mode " + std::to_string(k) + " detector");
}

}  // namespace shapeseg::modes

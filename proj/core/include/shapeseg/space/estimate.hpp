#pragma once

#include "shapeseg/nn/classifier.hpp"
#include "shapeseg/space/line.hpp"
#include "shapeseg/space/orientation.hpp"

#include <array>
#include <cstdint>

namespace shapeseg::space {

/// Five trained detectors plus the scan settings they were trained for.
struct SpaceDetectorSet {
  std::array<nn::NetworkModel, 4> lines;
  nn::NetworkModel orientation;
  int r = 7;
  int top_n = 10;
  OrientationScan scan;
  int image_width = 0;
  int image_height = 0;
  int bit_depth = 12;

  /// Throws DataError unless r >= 1, top_n >= 1 and every detector input
  /// length matches the image dims.
  void validate() const;
};

struct SpaceScorers {
  std::array<nn::CandidateScorer, 4> lines;
  nn::CandidateScorer orientation;
};

SpaceScorers network_scorers(const SpaceDetectorSet& set);

/// Output of ensemble space learning in box form: the detected rectangle
/// and the orientation found inside it.
struct SpaceEstimate {
  std::array<double, 4> lines{0.0, 0.0, 0.0, 0.0};
  shape::Box box;
  double theta = 0.0;

  /// T = box center, S = box size, theta.
  shape::SpaceParams params() const;
};

/// Runs the four line detections (in `order`; the result does not depend
/// on it), derives the box, then scans the orientation inside it.
SpaceEstimate estimate_space(const data::GrayImage& image, const SpaceScorers& scorers, int r, int top_n,
                             const OrientationScan& scan, std::array<int, 4> order = {1, 2, 3, 4}, int jobs = 1);

/// As above with trained networks; rejects images whose dims differ from
/// the training dims.
SpaceEstimate estimate_space(const data::GrayImage& image, const SpaceDetectorSet& set, int jobs = 1);

/// Column-wise features and labels after 1:1 class balancing.
struct LabeledSet {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

LabeledSet balanced_line_set(std::span<const LineHypothesis> hyps, std::uint64_t seed);
LabeledSet balanced_orientation_set(std::span<const OrientationHypothesis> hyps, std::uint64_t seed);

/// SdAE pre-training and fine-tuning on balanced hypotheses.
nn::ClassifierResult train_line_detector(std::span<const LineHypothesis> hyps, const nn::DetectorConfig& cfg,
                                         std::uint64_t seed);
nn::ClassifierResult train_orientation_detector(std::span<const OrientationHypothesis> hyps,
                                                const nn::DetectorConfig& cfg, std::uint64_t seed);

}  // namespace shapeseg::space

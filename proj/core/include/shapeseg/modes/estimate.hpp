#pragma once

#include "shapeseg/data/image.hpp"
#include "shapeseg/modes/hypotheses.hpp"
#include "shapeseg/nn/classifier.hpp"
#include "shapeseg/shape/ssm.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace shapeseg::modes {

/// One detector per mode, index 0 holding mode 1.
struct ModeDetectorSet {
  std::vector<nn::NetworkModel> detectors;
  ModeConfig cfg;

  int modes() const { return static_cast<int>(detectors.size()); }
  std::vector<nn::CandidateScorer> scorers() const;
};

struct ModeEstimate {
  double b = 0.0;  // model units
  double u = 0.0;  // stddev units, within [-range, range]
  bool degenerate = false;
};

/// Scans u over [-range, range] at scan_step, scoring the patch vector of
/// x_prev + L p_k u sqrt(lambda_k) (L the linear part of sp), and returns
/// the clamped mean of the top_n weights. A flat score field yields 0 with
/// a warning.
ModeEstimate estimate_mode(const nn::CandidateScorer& scorer, const data::GrayImage& image,
                           const shape::Shape& x_prev, const shape::ShapeModel& model, const shape::SpaceParams& sp,
                           int k, const ModeConfig& cfg);

/// Stage-wise refinement x_k = x_{k-1} + L p_k b_k starting from
/// x_0 = A_space(mean). Modes must be estimated strictly in order 1, 2, ...;
/// any other call throws.
class ModeRecursion {
 public:
  ModeRecursion(const shape::ShapeModel& model, const shape::SpaceParams& sp);

  int stage() const { return static_cast<int>(stages_.size()) - 1; }
  const shape::Shape& current() const { return stages_.back(); }
  const std::vector<shape::Shape>& stages() const { return stages_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Estimates mode k, which must equal stage() + 1.
  ModeEstimate step(int k, const nn::CandidateScorer& scorer, const data::GrayImage& image, const ModeConfig& cfg);
  /// Applies a known weight for mode k (same ordering rule).
  void apply(int k, double b);

 private:
  void check_order(int k) const;

  const shape::ShapeModel* model_;
  shape::SpaceParams sp_;
  std::vector<shape::Shape> stages_;
  std::vector<double> weights_;
};

struct SegmentResult {
  std::vector<shape::Shape> stages;  // x_0 .. x_K
  std::vector<double> weights;       // b_1 .. b_K (model units)

  const shape::Shape& final_shape() const { return stages.back(); }
};

/// Runs modes 1..k_use. Throws DataError before any work when a detector is
/// missing or k_use exceeds the model's mode count.
SegmentResult segment(const data::GrayImage& image, const shape::SpaceParams& sp, const shape::ShapeModel& model,
                      std::span<const nn::CandidateScorer> detectors, int k_use, const ModeConfig& cfg);
SegmentResult segment(const data::GrayImage& image, const shape::SpaceParams& sp, const shape::ShapeModel& model,
                      const ModeDetectorSet& detectors, int k_use);

struct ModeLabeledSet {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

ModeLabeledSet balanced_mode_set(std::span<const ModeHypothesis> hyps, std::uint64_t seed);

nn::ClassifierResult train_mode_detector(std::span<const ModeHypothesis> hyps, int k, const nn::DetectorConfig& cfg,
                                         std::uint64_t seed);

}  // namespace shapeseg::modes

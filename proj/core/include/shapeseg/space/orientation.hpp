#pragma once

#include "shapeseg/common/rng.hpp"
#include "shapeseg/data/image.hpp"
#include "shapeseg/nn/classifier.hpp"
#include "shapeseg/shape/shape.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace shapeseg::space {

struct OrientationRule {
  double positive_within = 0.017;  // rad
  double negative_from = 0.034;    // rad
};

struct OrientationScan {
  double step = 0.0017;
  double range = 0.26;
  int crop_side = 64;
  double crop_margin = 1.1;  // crop extent relative to the box

  /// Grid angles i*step for |i| <= floor(range/step), ascending.
  std::vector<double> grid() const;
};

struct OrientationHypothesis {
  double theta_hat = 0.0;
  double ground_truth = 0.0;
  int label = 0;
  Eigen::VectorXd patch;
};

/// Box rotated by theta about its center (scaled by crop_margin), resampled
/// bicubically to crop_side x crop_side and flattened row-major.
Eigen::VectorXd orientation_crop(const data::GrayImage& image, const shape::Box& box, double theta,
                                 const OrientationScan& scan);

/// `positives` hypotheses with |theta_hat - gt| <= positive_within (the
/// first exactly at gt, the rest uniform in the band) and neg_multiple
/// times as many negatives drawn uniformly from the scan range with
/// |theta_hat - gt| >= negative_from.
std::vector<OrientationHypothesis> extract_orientation_hypotheses(const data::GrayImage& image,
                                                                  const shape::Box& box, double gt,
                                                                  const OrientationRule& rule,
                                                                  const OrientationScan& scan, int positives,
                                                                  int neg_multiple, Rng& rng);

std::vector<std::string> audit_orientation_hypotheses(std::span<const OrientationHypothesis> hyps,
                                                      const OrientationRule& rule);

struct OrientationDetection {
  double theta = 0.0;
  bool degenerate = false;
};

/// Scans the grid and averages the top_n angles; a flat score field yields
/// 0 with a warning.
OrientationDetection detect_orientation(const nn::CandidateScorer& scorer, const data::GrayImage& image,
                                        const shape::Box& box, const OrientationScan& scan, int top_n);

}  // namespace shapeseg::space

#pragma once

#include "shapeseg/data/image.hpp"
#include "shapeseg/shape/ssm.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace shapeseg::modes {

/// Mode weights are expressed in standard deviations: u = b / sqrt(lambda).
struct ModeConfig {
  int q = 15;
  double range = 3.0;          // scan and clamp bound, in stddev units
  double grid_step = 0.25;     // training grid for negatives
  double exclusion = 0.25;     // negatives need |u - u_true| >= exclusion
  double scan_step = 0.05;     // test-time grid
  int top_n = 10;
  bool synthesized_positive = true;  // also add the model shape at u_true

  void validate() const;
  /// Grid -range .. +range with the given step, ascending; the step must
  /// divide the range.
  static std::vector<double> grid(double range, double step);
};

struct ModeHypothesis {
  int mode = 1;
  double u_hat = 0.0;   // candidate weight (stddev units)
  double u_true = 0.0;  // projected ground-truth weight
  int label = 0;
  bool from_landmarks = false;  // positive taken at the annotated landmarks
  Eigen::VectorXd feature;
};

/// Hypotheses for mode k (1-based) of one training image:
///  (a) b_true = project_shape(model, gt_shape, sp);
///  (b) candidates keep b_true_1..k-1, put u_hat on the grid for mode k and
///      zero the later modes; only |u_hat - u_true| >= exclusion become
///      negatives;
///  (c) patch features at the synthesized landmarks. The positive is the
///      feature vector at the annotated landmarks, plus the synthesized
///      shape at u_true when synthesized_positive is set.
std::vector<ModeHypothesis> fabricate_mode_hypotheses(const shape::ShapeModel& model, const data::GrayImage& image,
                                                      const shape::Shape& gt_shape, const shape::SpaceParams& sp,
                                                      int k, const ModeConfig& cfg);

std::vector<std::string> audit_mode_hypotheses(std::span<const ModeHypothesis> hyps, const ModeConfig& cfg);

}  // namespace shapeseg::modes

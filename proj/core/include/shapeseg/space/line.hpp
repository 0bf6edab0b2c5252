#pragma once

#include "shapeseg/common/rng.hpp"
#include "shapeseg/data/image.hpp"
#include "shapeseg/nn/classifier.hpp"
#include "shapeseg/shape/shape.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace shapeseg::space {

/// Bounding lines: 1 top row, 2 bottom row, 3 left column, 4 right column.
inline bool is_horizontal(int line_index) { return line_index == 1 || line_index == 2; }

/// Rules separating positive and negative line hypotheses.
struct LineLabelRule {
  double positive_within = 1.0;  // |l - l_hat| <= this
  double negative_from = 5.0;    // |l - l_hat| >= this
};

struct LineHypothesis {
  int line_index = 1;
  int position = 0;
  double ground_truth = 0.0;
  int label = 0;
  Eigen::VectorXd patch;
};

/// Number of candidate positions (rows or columns) along the scan axis.
int line_axis_length(const data::GrayImage& image, int line_index);

/// Strip of 2r+1 rows (full width) or columns (full height) centered on
/// `position`, edge-replicated and flattened row-major.
Eigen::VectorXd line_strip(const data::GrayImage& image, int line_index, int position, int r);

/// Strips for every listed position, one per column.
Eigen::MatrixXd line_strips(const data::GrayImage& image, int line_index, std::span<const double> positions, int r);

/// The four line positions of a box: top y, bottom y, left x, right x.
std::array<double, 4> box_lines(const shape::Box& box);

/// Integer positions within positive_within of gt are positives; positions
/// at least negative_from away are candidates for negatives, uniformly
/// subsampled to neg_multiple times the positive count (neg_multiple <= 0
/// keeps them all). Throws DataError if gt lies outside the image or the
/// image is narrower than the strip.
std::vector<LineHypothesis> extract_line_hypotheses(const data::GrayImage& image, double gt, int line_index, int r,
                                                    const LineLabelRule& rule, int neg_multiple, Rng& rng);

/// Descriptions of hypotheses that break the labeling rule (empty when the
/// set is clean).
std::vector<std::string> audit_line_hypotheses(std::span<const LineHypothesis> hyps, const LineLabelRule& rule);

struct LineDetection {
  double position = 0.0;
  bool degenerate = false;
};

/// Scores every row or column and averages the positions of the top_n
/// scores. A flat score field returns the axis midpoint with a warning.
LineDetection detect_line(const nn::CandidateScorer& scorer, const data::GrayImage& image, int line_index, int r,
                          int top_n);

/// Rectangle from the four lines: T = center, S = (l4 - l3, l2 - l1).
shape::Box derive_box(double l1, double l2, double l3, double l4);

}  // namespace shapeseg::space

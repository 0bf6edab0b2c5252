#include "shapeseg/space/line.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/log.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shapeseg::space {
namespace {

void check_line_index(int line_index) {
  if (line_index < 1 || line_index > 4) throw DataError("line index must lie in 1..4");
}

}  // namespace

int line_axis_length(const data::GrayImage& image, int line_index) {
  check_line_index(line_index);
  return is_horizontal(line_index) ? image.height : image.width;
}

Eigen::VectorXd line_strip(const data::GrayImage& image, int line_index, int position, int r) {
  check_line_index(line_index);
  if (r < 1) throw DataError("strip half-width must be at least 1");
  const int band = 2 * r + 1;
  if (is_horizontal(line_index)) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(band) * image.width);
    Eigen::Index k = 0;
    for (int dy = -r; dy <= r; ++dy) {
      for (int x = 0; x < image.width; ++x) v(k++) = image.clamped(x, position + dy);
    }
    return v;
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(band) * image.height);
  Eigen::Index k = 0;
  for (int y = 0; y < image.height; ++y) {
    for (int dx = -r; dx <= r; ++dx) v(k++) = image.clamped(position + dx, y);
  }
  return v;
}

Eigen::MatrixXd line_strips(const data::GrayImage& image, int line_index, std::span<const double> positions, int r) {
  const Eigen::Index dim = static_cast<Eigen::Index>(2 * r + 1) *
                           (is_horizontal(line_index) ? image.width : image.height);
  Eigen::MatrixXd out(dim, static_cast<Eigen::Index>(positions.size()));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = line_strip(image, line_index, static_cast<int>(positions[i]), r);
  }
  return out;
}

std::array<double, 4> box_lines(const shape::Box& box) {
  const double hx = 0.5 * box.size.x(), hy = 0.5 * box.size.y();
  return {box.center.y() - hy, box.center.y() + hy, box.center.x() - hx, box.center.x() + hx};
}

std::vector<LineHypothesis> extract_line_hypotheses(const data::GrayImage& image, double gt, int line_index, int r,
                                                    const LineLabelRule& rule, int neg_multiple, Rng& rng) {
  const int length = line_axis_length(image, line_index);
  const int across = is_horizontal(line_index) ? image.height : image.width;
  if (across < 2 * r + 1) throw DataError("image is smaller than the line strip");
  if (!(gt >= 0.0 && gt <= length - 1)) {
    throw DataError("ground-truth line " + std::to_string(line_index) + " at " + std::to_string(gt) +
                    " lies outside the image");
  }
  std::vector<int> positives, negatives;
  for (int p = 0; p < length; ++p) {
    const double d = std::abs(p - gt);
    if (d <= rule.positive_within) {
      positives.push_back(p);
    } else if (d >= rule.negative_from) {
      negatives.push_back(p);
    }
  }
  if (neg_multiple > 0) {
    const std::size_t keep = static_cast<std::size_t>(neg_multiple) * positives.size();
    if (negatives.size() > keep) {
      rng.shuffle(std::span<int>(negatives));
      negatives.resize(keep);
      std::sort(negatives.begin(), negatives.end());
    }
  }
  std::vector<LineHypothesis> out;
  out.reserve(positives.size() + negatives.size());
  for (int p : positives) out.push_back({line_index, p, gt, 1, line_strip(image, line_index, p, r)});
  for (int p : negatives) out.push_back({line_index, p, gt, 0, line_strip(image, line_index, p, r)});
  return out;
}

std::vector<std::string> audit_line_hypotheses(std::span<const LineHypothesis> hyps, const LineLabelRule& rule) {
  std::vector<std::string> problems;
  for (const auto& h : hyps) {
    const double d = std::abs(h.position - h.ground_truth);
    const bool ok = h.label == 1 ? d <= rule.positive_within : (h.label == 0 && d >= rule.negative_from);
    if (!ok) {
      std::ostringstream msg;
      msg << "line " << h.line_index << " hypothesis at " << h.position << " (gt " << h.ground_truth
          << ") labeled " << h.label;
      problems.push_back(msg.str());
    }
  }
  return problems;
}

LineDetection detect_line(const nn::CandidateScorer& scorer, const data::GrayImage& image, int line_index, int r,
                          int top_n) {
  const int length = line_axis_length(image, line_index);
  std::vector<double> positions(static_cast<std::size_t>(length));
  for (int p = 0; p < length; ++p) positions[static_cast<std::size_t>(p)] = p;
  const Eigen::MatrixXd strips = line_strips(image, line_index, positions, r);
  const Eigen::VectorXd scores = scorer(strips, positions);
  const nn::TopNResult top = nn::top_n_mean(positions, scores, top_n);
  if (top.flat) {
    log::warn("line " + std::to_string(line_index) + " detector returned a flat score field; using the midpoint");
    return {0.5 * (length - 1), true};
  }
  return {top.value, false};
}

shape::Box derive_box(double l1, double l2, double l3, double l4) {
  if (!(l2 - l1 > 0.0) || !(l4 - l3 > 0.0)) {
    throw DataError("bounding lines give a non-positive extent (l1=" + std::to_string(l1) + ", l2=" +
                    std::to_string(l2) + ", l3=" + std::to_string(l3) + ", l4=" + std::to_string(l4) + ")");
  }
  shape::Box box;
  box.center = {0.5 * (l3 + l4), 0.5 * (l1 + l2)};
  box.size = {l4 - l3, l2 - l1};
  return box;
}

}  // namespace shapeseg::space

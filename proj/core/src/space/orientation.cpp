#include "shapeseg/space/orientation.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/log.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shapeseg::space {

std::vector<double> OrientationScan::grid() const {
  if (!(step > 0.0) || !(range >= 0.0)) throw DataError("orientation scan needs step > 0 and range >= 0");
  const int half = static_cast<int>(std::floor(range / step + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * half + 1));
  for (int i = -half; i <= half; ++i) out.push_back(i * step);
  return out;
}

Eigen::VectorXd orientation_crop(const data::GrayImage& image, const shape::Box& box, double theta,
                                 const OrientationScan& scan) {
  if (!(box.size.x() > 0.0 && box.size.y() > 0.0)) throw DataError("orientation crop needs a non-degenerate box");
  if (scan.crop_side < 1) throw DataError("crop side must be positive");
  const int n = scan.crop_side;
  const Eigen::Matrix2d rot = shape::rotation(theta);
  const double wx = box.size.x() * scan.crop_margin, wy = box.size.y() * scan.crop_margin;
  Eigen::VectorXd out(static_cast<Eigen::Index>(n) * n);
  Eigen::Index k = 0;
  for (int v = 0; v < n; ++v) {
    const double b = ((v + 0.5) / n - 0.5) * wy;
    for (int u = 0; u < n; ++u) {
      const double a = ((u + 0.5) / n - 0.5) * wx;
      const shape::Point p = box.center + rot * shape::Point(a, b);
      out(k++) = std::clamp(data::sample_bicubic(image, p.x(), p.y()), 0.0, 1.0);
    }
  }
  return out;
}

std::vector<OrientationHypothesis> extract_orientation_hypotheses(const data::GrayImage& image,
                                                                  const shape::Box& box, double gt,
                                                                  const OrientationRule& rule,
                                                                  const OrientationScan& scan, int positives,
                                                                  int neg_multiple, Rng& rng) {
  if (positives < 1) throw DataError("need at least one positive orientation hypothesis");
  std::vector<OrientationHypothesis> out;
  for (int i = 0; i < positives; ++i) {
    double t = i == 0 ? gt : gt + rng.uniform(-rule.positive_within, rule.positive_within);
    while (std::abs(t - gt) > rule.positive_within) t = std::nextafter(t, gt);
    out.push_back({t, gt, 1, orientation_crop(image, box, t, scan)});
  }
  // Negatives come from the scan interval minus the band around gt.
  const double lo = -scan.range, hi = scan.range;
  const double left = std::max(0.0, std::min(hi, gt - rule.negative_from) - lo);
  const double right = std::max(0.0, hi - std::max(lo, gt + rule.negative_from));
  const int count = positives * std::max(0, neg_multiple);
  if (count > 0 && left + right <= 0.0) throw DataError("orientation scan range leaves no room for negatives");
  for (int i = 0; i < count; ++i) {
    const double u = rng.uniform(0.0, left + right);
    double t = u < left ? lo + u : std::max(lo, gt + rule.negative_from) + (u - left);
    // Rounding may land a hair inside the band; push outward ulp by ulp.
    const double outward = u < left ? -INFINITY : INFINITY;
    while (std::abs(t - gt) < rule.negative_from) t = std::nextafter(t, outward);
    out.push_back({t, gt, 0, orientation_crop(image, box, t, scan)});
  }
  return out;
}

std::vector<std::string> audit_orientation_hypotheses(std::span<const OrientationHypothesis> hyps,
                                                      const OrientationRule& rule) {
  std::vector<std::string> problems;
  for (const auto& h : hyps) {
    const double d = std::abs(h.theta_hat - h.ground_truth);
    const bool ok = h.label == 1 ? d <= rule.positive_within : (h.label == 0 && d >= rule.negative_from);
    if (!ok) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "orientation hypothesis " << h.theta_hat << " (gt " << h.ground_truth << ") labeled " << h.label;
      problems.push_back(msg.str());
    }
  }
  return problems;
}

OrientationDetection detect_orientation(const nn::CandidateScorer& scorer, const data::GrayImage& image,
                                        const shape::Box& box, const OrientationScan& scan, int top_n) {
  const std::vector<double> grid = scan.grid();
  Eigen::MatrixXd crops(static_cast<Eigen::Index>(scan.crop_side) * scan.crop_side,
                        static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    crops.col(static_cast<Eigen::Index>(i)) = orientation_crop(image, box, grid[i], scan);
  }
  const Eigen::VectorXd scores = scorer(crops, grid);
  const nn::TopNResult top = nn::top_n_mean(grid, scores, top_n);
  if (top.flat) {
    log::warn("orientation detector returned a flat score field; using 0");
    return {0.0, true};
  }
  return {top.value, false};
}

}  // namespace shapeseg::space

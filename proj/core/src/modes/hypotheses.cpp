#include "shapeseg/modes/hypotheses.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/modes/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shapeseg::modes {

void ModeConfig::validate() const {
  if (q < 1 || q % 2 == 0) throw DataError("q must be a positive odd number");
  if (!(range > 0.0)) throw DataError("mode range must be positive");
  if (!(grid_step > 0.0) || !(scan_step > 0.0)) throw DataError("mode grid steps must be positive");
  if (!(exclusion > 0.0)) throw DataError("mode exclusion must be positive");
  if (top_n < 1) throw DataError("top_n must be at least 1");
  grid(range, grid_step);
  grid(range, scan_step);
}

std::vector<double> ModeConfig::grid(double range, double step) {
  const double count = 2.0 * range / step;
  const auto n = static_cast<long>(std::llround(count));
  if (std::abs(count - static_cast<double>(n)) > 1e-9 * std::max(1.0, count)) {
    throw DataError("grid step must divide the scan range");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  for (long i = 0; i <= n; ++i) out.push_back(-range + static_cast<double>(i) * (2.0 * range / static_cast<double>(n)));
  return out;
}

std::vector<ModeHypothesis> fabricate_mode_hypotheses(const shape::ShapeModel& model, const data::GrayImage& image,
                                                      const shape::Shape& gt_shape, const shape::SpaceParams& sp,
                                                      int k, const ModeConfig& cfg) {
  cfg.validate();
  if (k < 1 || k > model.modes()) {
    throw DataError("mode " + std::to_string(k) + " requested but the model has " + std::to_string(model.modes()));
  }
  const Eigen::VectorXd b_true = shape::project_shape(model, gt_shape, sp).b;
  const double sd = std::sqrt(model.eigvals(k - 1));
  if (!(sd > 0.0)) throw DataError("mode " + std::to_string(k) + " has zero variance");
  const double u_true = b_true(k - 1) / sd;

  std::vector<ModeHypothesis> out;
  out.push_back({k, u_true, u_true, 1, true, extract_shape_patch_vector(image, gt_shape, cfg.q)});
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  b.head(k - 1) = b_true.head(k - 1);
  if (cfg.synthesized_positive) {
    b(k - 1) = b_true(k - 1);
    const shape::Shape s = shape::synthesize_shape(model, {b}, sp);
    out.push_back({k, u_true, u_true, 1, false, extract_shape_patch_vector(image, s, cfg.q)});
  }
  for (double u : ModeConfig::grid(cfg.range, cfg.grid_step)) {
    if (std::abs(u - u_true) < cfg.exclusion) continue;
    b(k - 1) = u * sd;
    const shape::Shape s = shape::synthesize_shape(model, {b}, sp);
    out.push_back({k, u, u_true, 0, false, extract_shape_patch_vector(image, s, cfg.q)});
  }
  return out;
}

std::vector<std::string> audit_mode_hypotheses(std::span<const ModeHypothesis> hyps, const ModeConfig& cfg) {
  std::vector<std::string> problems;
  for (const auto& h : hyps) {
    const double d = std::abs(h.u_hat - h.u_true);
    const bool ok = h.label == 1 ? d == 0.0 : (h.label == 0 && d >= cfg.exclusion);
    if (!ok) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "mode " << h.mode << " hypothesis u=" << h.u_hat << " (true " << h.u_true << ") labeled " << h.label;
      problems.push_back(msg.str());
    }
  }
  return problems;
}

}  // namespace shapeseg::modes

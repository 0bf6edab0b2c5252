#pragma once

#include "shapeseg/shape/ssm.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace shapeseg::shape {

/// Two-way partition of training shapes by bounding-box aspect ratio.
/// Group 0 holds ratios <= threshold, group 1 ratios above it.
struct GroupSplit {
  double threshold = 1.22;
  std::vector<int> assignments;
  bool fitted = false;  // true when the threshold came from the mixture fit
  std::array<double, 2> means{0.0, 0.0};
  std::array<double, 2> stddevs{0.0, 0.0};
  std::array<double, 2> weights{0.5, 0.5};

  int group_of(double aspect_ratio) const { return aspect_ratio > threshold ? 1 : 0; }
};

/// Fits a 1-D two-component Gaussian mixture by EM and cuts at the point of
/// equal posterior between the component means. With `fixed_threshold` the
/// fit is skipped. Returns std::nullopt when all ratios are identical, which
/// callers treat as a single-group fallback. Needs at least four ratios.
std::optional<GroupSplit> cluster_aspect_ratios(std::span<const double> ratios,
                                                std::optional<double> fixed_threshold = std::nullopt);

/// Picks the model whose group_id matches split.group_of(aspect_ratio);
/// a ratio equal to the threshold goes to group 0.
const ShapeModel& select_model(double aspect_ratio, const GroupSplit& split, std::span<const ShapeModel> models);

}  // namespace shapeseg::shape

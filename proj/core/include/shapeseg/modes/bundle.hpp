#pragma once

#include "shapeseg/modes/estimate.hpp"
#include "shapeseg/shape/groups.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace shapeseg::modes {

/// Group shape models, the aspect-ratio split choosing between them and
/// the shared per-mode detectors.
struct ShapeBundle {
  std::vector<shape::ShapeModel> models;  // indexed by group id
  std::optional<shape::GroupSplit> split;  // empty for a single group
  ModeDetectorSet detectors;

  /// Model for a detected box aspect ratio.
  const shape::ShapeModel& model_for(double aspect_ratio) const;
  int group_for(double aspect_ratio) const;
};

/// Writes model_g<id>.json, group_split.json (when split), mode_<k>.json and
/// manifest.json {version, q, scan_step, top_n, K, model_refs, units, ...}.
void save_shape_bundle(const std::filesystem::path& dir, const ShapeBundle& bundle,
                       const nlohmann::json& provenance = nullptr);

/// Loads the bundle; every listed detector file must exist.
ShapeBundle load_shape_bundle(const std::filesystem::path& dir);

}  // namespace shapeseg::modes

#pragma once

#include "shapeseg/data/image.hpp"
#include "shapeseg/data/raster.hpp"
#include "shapeseg/eval/stats.hpp"
#include "shapeseg/shape/shape.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace shapeseg::eval {

struct SpaceErrors {
  double translation_px = 0.0;  // |T_hat - T|
  double translation_mm = 0.0;
  double scale_px = 0.0;        // mean of |dSx| and |dSy|
  double orientation_rad = 0.0;
};

SpaceErrors space_errors(const shape::Box& truth_box, double truth_theta, const shape::Box& est_box,
                         double est_theta, const Eigen::Vector2d& spacing);

struct ImageResult {
  std::string id;
  int fold = -1;
  double dsc = 0.0;
  double jaccard = 0.0;
  double acd_mm = 0.0;
  std::optional<SpaceErrors> space;
  std::vector<double> dsc_by_stage;  // DSC of x_0 .. x_K when recorded
};

struct ShapeScores {
  double dsc = 0.0;
  double jaccard = 0.0;
  double acd_mm = 0.0;
};

/// Overlap and contour metrics of a predicted landmark shape against the
/// ground-truth shape on an image grid. Self-intersecting predictions are
/// filled with the even-odd rule.
ShapeScores score_shapes(const shape::Shape& gt, const shape::Shape& pred, int width, int height,
                         const Eigen::Vector2d& spacing);

struct EvalReport {
  std::vector<ImageResult> images;
  std::map<std::string, Summary> aggregates;
  std::map<int, std::map<std::string, Summary>> fold_aggregates;  // by ImageResult::fold
  std::vector<int> folds;  // per image, when cross-validated
  std::uint64_t seed = 0;
  nlohmann::json config;   // effective configuration, echoed verbatim

  /// Recomputes the aggregates from the per-image values.
  void aggregate();
  nlohmann::json to_json() const;
  /// Aligned-column table: metric, mean +- std (min/max).
  std::string table() const;
};

/// JSON + text table under `stem` (stem.json and stem.txt).
void write_report(const std::filesystem::path& stem, const EvalReport& report);

/// Grayscale image with ground truth in green, segmentation in red and
/// their overlap in blue, written as an 8-bit RGB PNG.
void write_overlay_png(const std::filesystem::path& path, const data::GrayImage& image, const data::Mask& gt,
                       const data::Mask& seg);

}  // namespace shapeseg::eval

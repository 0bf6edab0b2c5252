#pragma once

#include "shapeseg/data/image.hpp"
#include "shapeseg/modes/bundle.hpp"
#include "shapeseg/space/estimate.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>

namespace shapeseg::pipeline {

struct Segmentation {
  space::SpaceEstimate space;
  int group = 0;
  shape::SpaceParams sp;  // A_space of the selected group mean
  modes::SegmentResult result;

  const shape::Shape& final_shape() const { return result.final_shape(); }
};

/// Space estimation, model selection by the detected aspect ratio, then
/// modes 1..k_use. k_use < 0 uses every trained detector. The mode count is
/// checked against the bundle before any detector runs.
Segmentation segment_image(const data::GrayImage& image, const space::SpaceDetectorSet& space_set,
                           const modes::ShapeBundle& shapes, int k_use, int jobs = 1);

/// Same flow with caller-supplied scorers (used by tests and benchmarks).
Segmentation segment_image(const data::GrayImage& image, const space::SpaceScorers& space_scorers, int r, int top_n,
                           const space::OrientationScan& scan, const modes::ShapeBundle& shapes,
                           std::span<const nn::CandidateScorer> mode_scorers, int k_use, int jobs = 1);

/// {id, group, box, theta, space_params, weights, landmarks, sides}.
nlohmann::json segmentation_to_json(const Segmentation& seg, const std::string& id);

}  // namespace shapeseg::pipeline

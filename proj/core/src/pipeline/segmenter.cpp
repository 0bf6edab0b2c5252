#include "shapeseg/pipeline/segmenter.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/shape/frame.hpp"
#include "shapeseg/shape/io.hpp"

namespace shapeseg::pipeline {

namespace {

int resolve_modes(const modes::ShapeBundle& shapes, std::size_t detectors, int k_use) {
  if (shapes.models.empty()) throw DataError("shape bundle holds no models");
  const int k = k_use < 0 ? static_cast<int>(detectors) : k_use;
  if (static_cast<std::size_t>(k) > detectors) {
    throw DataError(std::to_string(k) + " modes requested but the bundle has detectors for modes 1.." +
                    std::to_string(detectors) + " (mode_" + std::to_string(detectors + 1) + " is missing)");
  }
  for (const auto& m : shapes.models) {
    if (m.modes() < k) {
      throw DataError(std::to_string(k) + " modes requested but group " + std::to_string(m.group_id) +
                      " model has " + std::to_string(m.modes()));
    }
  }
  return k;
}

Segmentation finish(const data::GrayImage& image, space::SpaceEstimate est, const modes::ShapeBundle& shapes,
                    std::span<const nn::CandidateScorer> scorers, int k) {
  Segmentation out;
  out.space = est;
  const double ar = est.box.aspect_ratio();
  out.group = shapes.group_for(ar);
  const shape::ShapeModel& model = shapes.model_for(ar);
  out.sp = shape::space_from_box(est.box, est.theta, model.mean_shape());
  out.result = modes::segment(image, out.sp, model, scorers.first(static_cast<std::size_t>(k)), k,
                              shapes.detectors.cfg);
  return out;
}

}  // namespace

Segmentation segment_image(const data::GrayImage& image, const space::SpaceDetectorSet& space_set,
                           const modes::ShapeBundle& shapes, int k_use, int jobs) {
  const int k = resolve_modes(shapes, shapes.detectors.detectors.size(), k_use);
  const space::SpaceEstimate est = space::estimate_space(image, space_set, jobs);
  const auto scorers = shapes.detectors.scorers();
  for (int i = 0; i < k; ++i) {
    const auto& m = shapes.detectors.detectors[i];
    const Eigen::Index expected =
        shapes.models.front().landmark_count() * shapes.detectors.cfg.q * shapes.detectors.cfg.q;
    if (m.input_dim() != expected) {
      throw DataError("mode_" + std::to_string(i + 1) + " detector expects " + std::to_string(m.input_dim()) +
                      " inputs but the shape model and q give " + std::to_string(expected));
    }
  }
  return finish(image, est, shapes, scorers, k);
}

Segmentation segment_image(const data::GrayImage& image, const space::SpaceScorers& space_scorers, int r, int top_n,
                           const space::OrientationScan& scan, const modes::ShapeBundle& shapes,
                           std::span<const nn::CandidateScorer> mode_scorers, int k_use, int jobs) {
  const int k = resolve_modes(shapes, mode_scorers.size(), k_use);
  const space::SpaceEstimate est = space::estimate_space(image, space_scorers, r, top_n, scan, {1, 2, 3, 4}, jobs);
  return finish(image, est, shapes, mode_scorers, k);
}

nlohmann::json segmentation_to_json(const Segmentation& seg, const std::string& id) {
  const shape::Shape& s = seg.final_shape();
  const auto pts = s.points();
  return {{"id", id},
          {"group", seg.group},
          {"box", shape::box_to_json(seg.space.box)},
          {"theta", seg.space.theta},
          {"space_params", shape::space_params_to_json(seg.sp)},
          {"weights", seg.result.weights},
          {"modes", seg.result.weights.size()},
          {"sides", s.sides()},
          {"landmarks", shape::points_to_json(pts)}};
}

}  // namespace shapeseg::pipeline

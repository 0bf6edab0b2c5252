#include "shapeseg/space/estimate.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/parallel.hpp"
#include "shapeseg/data/augment.hpp"

#include <algorithm>
#include <string>

namespace shapeseg::space {

void SpaceDetectorSet::validate() const {
  if (r < 1) throw DataError("space detectors need r >= 1");
  if (top_n < 1) throw DataError("space detectors need top_n >= 1");
  if (image_width <= 0 || image_height <= 0) throw DataError("space detectors have no training dims");
  for (int l = 1; l <= 4; ++l) {
    const auto& net = lines[static_cast<std::size_t>(l - 1)];
    net.validate();
    const Eigen::Index expect = static_cast<Eigen::Index>(2 * r + 1) * (is_horizontal(l) ? image_width : image_height);
    if (net.input_dim() != expect) {
      throw DataError("line " + std::to_string(l) + " detector input length " + std::to_string(net.input_dim()) +
                      " does not match " + std::to_string(expect));
    }
  }
  orientation.validate();
  if (orientation.input_dim() != static_cast<Eigen::Index>(scan.crop_side) * scan.crop_side) {
    throw DataError("orientation detector input length does not match the crop size");
  }
}

SpaceScorers network_scorers(const SpaceDetectorSet& set) {
  SpaceScorers s;
  for (std::size_t i = 0; i < 4; ++i) s.lines[i] = nn::network_scorer(set.lines[i]);
  s.orientation = nn::network_scorer(set.orientation);
  return s;
}

shape::SpaceParams SpaceEstimate::params() const {
  shape::SpaceParams sp;
  sp.translation = box.center;
  sp.scale = box.size;
  sp.theta = theta;
  return sp;
}

SpaceEstimate estimate_space(const data::GrayImage& image, const SpaceScorers& scorers, int r, int top_n,
                             const OrientationScan& scan, std::array<int, 4> order, int jobs) {
  std::array<int, 4> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::array<int, 4>{1, 2, 3, 4}) throw DataError("line order must be a permutation of 1..4");
  SpaceEstimate est;
  // Each detection writes only its own slot, so the order cannot leak into
  // the result.
  parallel_for(4, jobs, [&](std::size_t i) {
    const int l = order[i];
    est.lines[static_cast<std::size_t>(l - 1)] =
        detect_line(scorers.lines[static_cast<std::size_t>(l - 1)], image, l, r, top_n).position;
  });
  est.box = derive_box(est.lines[0], est.lines[1], est.lines[2], est.lines[3]);
  est.theta = detect_orientation(scorers.orientation, image, est.box, scan, top_n).theta;
  return est;
}

SpaceEstimate estimate_space(const data::GrayImage& image, const SpaceDetectorSet& set, int jobs) {
  set.validate();
  if (image.width != set.image_width || image.height != set.image_height) {
    throw DataError("image is " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                    " but the space detectors were trained on " + std::to_string(set.image_width) + "x" +
                    std::to_string(set.image_height));
  }
  return estimate_space(image, network_scorers(set), set.r, set.top_n, set.scan, {1, 2, 3, 4}, jobs);
}

namespace {

template <typename Hyp>
LabeledSet balanced_set(std::span<const Hyp> hyps, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(hyps.size());
  for (const auto& h : hyps) labels.push_back(h.label);
  const auto keep = data::balance_classes(labels, seed);
  LabeledSet out;
  if (keep.empty()) return out;
  out.features.resize(hyps[keep.front()].patch.size(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto& h = hyps[keep[i]];
    if (h.patch.size() != out.features.rows()) throw DataError("hypothesis feature lengths differ");
    out.features.col(static_cast<Eigen::Index>(i)) = h.patch;
    out.labels.push_back(h.label);
    (h.label == 1 ? out.positives : out.negatives)++;
  }
  return out;
}

}  // namespace

LabeledSet balanced_line_set(std::span<const LineHypothesis> hyps, std::uint64_t seed) {
  return balanced_set(hyps, seed);
}

LabeledSet balanced_orientation_set(std::span<const OrientationHypothesis> hyps, std::uint64_t seed) {
  return balanced_set(hyps, seed);
}

nn::ClassifierResult train_line_detector(std::span<const LineHypothesis> hyps, const nn::DetectorConfig& cfg,
                                         std::uint64_t seed) {
  if (hyps.empty()) throw DataError("no line hypotheses to train on");
  const LabeledSet set = balanced_line_set(hyps, mix_seed(seed, "balance"));
  return nn::train_classifier(set.features, set.labels, cfg, seed,
                              "line " + std::to_string(hyps.front().line_index) + " detector");
}

nn::ClassifierResult train_orientation_detector(std::span<const OrientationHypothesis> hyps,
                                                const nn::DetectorConfig& cfg, std::uint64_t seed) {
  if (hyps.empty()) throw DataError("no orientation hypotheses to train on");
  const LabeledSet set = balanced_orientation_set(hyps, mix_seed(seed, "balance"));
  return nn::train_classifier(set.features, set.labels, cfg, seed, "orientation detector");
}

}  // namespace shapeseg::space

#include "shapeseg/pipeline/training.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/log.hpp"
#include "shapeseg/common/parallel.hpp"
#include "shapeseg/common/rng.hpp"
#include "shapeseg/shape/frame.hpp"
#include "shapeseg/shape/procrustes.hpp"

#include <algorithm>

namespace shapeseg::pipeline {

std::size_t TrainingLog::violation_count() const {
  std::size_t n = 0;
  for (const auto& a : audits) n += a.violations.size();
  return n;
}

nlohmann::json TrainingLog::to_json() const {
  nlohmann::json det = nlohmann::json::array();
  for (const auto& d : detectors) {
    det.push_back({{"name", d.name},
                   {"inputs", d.inputs},
                   {"positives", d.positives},
                   {"negatives", d.negatives},
                   {"pretrain_losses", d.pretrain_losses},
                   {"finetune_loss", d.finetune_loss}});
  }
  nlohmann::json aud = nlohmann::json::array();
  for (const auto& a : audits) {
    aud.push_back({{"name", a.name}, {"checked", a.checked}, {"violations", a.violations}});
  }
  return {{"detectors", det}, {"audits", aud}, {"violation_count", violation_count()}};
}

void TrainingLog::append(const TrainingLog& other) {
  detectors.insert(detectors.end(), other.detectors.begin(), other.detectors.end());
  audits.insert(audits.end(), other.audits.begin(), other.audits.end());
}

namespace {

std::vector<shape::Shape> sample_shapes(std::span<const data::Sample> samples) {
  std::vector<shape::Shape> shapes;
  shapes.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.landmarks) throw DataError("training sample '" + s.id + "' has no landmarks");
    shapes.push_back(*s.landmarks);
  }
  return shapes;
}

void check_dims(std::span<const data::Sample> samples) {
  if (samples.empty()) throw DataError("no training samples");
  for (const auto& s : samples) {
    if (!s.image.same_dims(samples.front().image)) {
      throw DataError("training image '" + s.id + "' is " + std::to_string(s.image.width) + "x" +
                      std::to_string(s.image.height) + " but '" + samples.front().id + "' is " +
                      std::to_string(samples.front().image.width) + "x" +
                      std::to_string(samples.front().image.height));
    }
  }
}

std::vector<data::AugmentedImage> augmented(std::span<const data::Sample> samples, std::span<const double> thetas,
                                            const RunConfig& cfg, bool allow_vertical, std::uint64_t salt) {
  std::vector<data::AugmentedImage> originals;
  std::vector<data::GrayImage> images;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    originals.push_back({samples[i].image, *samples[i].landmarks, thetas[i], static_cast<int>(i), false, false});
    images.push_back(samples[i].image);
  }
  data::AugmentConfig acfg = cfg.augment;
  acfg.seed = mix_seed(cfg.seed, salt);
  const int components = std::min<int>(acfg.intensity_components, static_cast<int>(samples.size()) - 1);
  if (acfg.intensity_copies <= 0 || components < 1) return data::augment_images(originals, nullptr, acfg, allow_vertical);
  if (components < acfg.intensity_components) {
    log::warn("intensity augmentation limited to " + std::to_string(components) + " components by the sample count");
  }
  const data::IntensityBasis basis = data::fit_intensity_basis(images, components, acfg.intensity_side);
  return data::augment_images(originals, &basis, acfg, allow_vertical);
}

template <typename H>
AuditLog make_audit(const std::string& name, const std::vector<H>& hyps, std::vector<std::string> violations) {
  return {name, hyps.size(), std::move(violations)};
}

template <typename H>
DetectorLog make_detector_log(const std::string& name, const std::vector<H>& hyps, const nn::ClassifierResult& r) {
  std::size_t pos = 0;
  for (const auto& h : hyps) pos += h.label == 1 ? 1 : 0;
  const std::size_t kept = std::min(pos, hyps.size() - pos);
  return {name, static_cast<std::size_t>(r.model.input_dim()), kept, kept, r.pretrain_losses, r.finetune_loss};
}

}  // namespace

std::vector<double> training_orientations(std::span<const data::Sample> samples) {
  const bool all_truth =
      std::all_of(samples.begin(), samples.end(), [](const data::Sample& s) { return s.truth.has_value(); });
  if (all_truth) {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(s.truth->theta);
    return out;
  }
  const auto shapes = sample_shapes(samples);
  if (shapes.size() < 2) return std::vector<double>(shapes.size(), 0.0);
  return shape::procrustes_orientations(shape::procrustes_align(shapes));
}

SpaceTraining train_space(std::span<const data::Sample> samples, const RunConfig& cfg) {
  cfg.validate();
  check_dims(samples);
  sample_shapes(samples);
  const std::vector<double> thetas = training_orientations(samples);
  const auto images = augmented(samples, thetas, cfg, true, 1);

  SpaceTraining out;
  out.set.r = cfg.r;
  out.set.top_n = cfg.space_top_n;
  out.set.scan = cfg.scan;
  out.set.image_width = samples.front().image.width;
  out.set.image_height = samples.front().image.height;
  out.set.bit_depth = cfg.bit_depth;

  std::vector<DetectorLog> det(5);
  std::vector<AuditLog> aud(5);
  parallel_for(5, cfg.jobs, [&](std::size_t d) {
    if (d < 4) {
      const int l = static_cast<int>(d) + 1;
      const std::string name = "line_" + std::to_string(l);
      std::vector<space::LineHypothesis> hyps;
      for (std::size_t i = 0; i < images.size(); ++i) {
        Rng rng(mix_seed(mix_seed(cfg.seed, name), i));
        const double gt = space::box_lines(shape::bounding_box(images[i].landmarks))[d];
        auto h = space::extract_line_hypotheses(images[i].image, gt, l, cfg.r, cfg.line_rule, cfg.line_neg_multiple,
                                                rng);
        std::move(h.begin(), h.end(), std::back_inserter(hyps));
      }
      aud[d] = make_audit(name, hyps, space::audit_line_hypotheses(hyps, cfg.line_rule));
      auto r = space::train_line_detector(hyps, cfg.line_net, mix_seed(cfg.seed, name));
      det[d] = make_detector_log(name, hyps, r);
      out.set.lines[d] = std::move(r.model);
    } else {
      std::vector<space::OrientationHypothesis> hyps;
      for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].vflip) continue;
        Rng rng(mix_seed(mix_seed(cfg.seed, "orientation"), i));
        auto h = space::extract_orientation_hypotheses(images[i].image, shape::bounding_box(images[i].landmarks),
                                                       images[i].theta, cfg.orientation_rule, cfg.scan,
                                                       cfg.orientation_positives, cfg.orientation_neg_multiple, rng);
        std::move(h.begin(), h.end(), std::back_inserter(hyps));
      }
      aud[d] = make_audit("orientation", hyps, space::audit_orientation_hypotheses(hyps, cfg.orientation_rule));
      auto r = space::train_orientation_detector(hyps, cfg.orientation_net, mix_seed(cfg.seed, "orientation"));
      det[d] = make_detector_log("orientation", hyps, r);
      out.set.orientation = std::move(r.model);
    }
  });
  out.log.detectors = std::move(det);
  out.log.audits = std::move(aud);
  out.set.validate();
  return out;
}

ShapeTraining train_shape(std::span<const data::Sample> samples, const RunConfig& cfg) {
  cfg.validate();
  check_dims(samples);
  const auto shapes = sample_shapes(samples);
  if (shapes.size() < 2) throw DataError("shape training needs at least two samples");
  const std::vector<double> thetas = training_orientations(samples);

  std::vector<double> ratios;
  for (const auto& s : shapes) ratios.push_back(shape::bounding_box(s).aspect_ratio());
  std::optional<shape::GroupSplit> split;
  if (ratios.size() >= 4) split = shape::cluster_aspect_ratios(ratios, cfg.group_threshold);
  if (split) {
    const auto members = std::count(split->assignments.begin(), split->assignments.end(), 1);
    if (members < 2 || static_cast<std::size_t>(members) + 2 > shapes.size()) {
      log::warn("aspect-ratio split leaves a group with fewer than two shapes; using a single model");
      split.reset();
    }
  } else {
    log::warn("aspect ratios do not separate into two groups; using a single model");
  }
  const int groups = split ? 2 : 1;

  ShapeTraining out;
  out.bundle.split = split;
  std::vector<std::vector<std::size_t>> members(groups);
  for (std::size_t n = 0; n < shapes.size(); ++n) members[split ? split->assignments[n] : 0].push_back(n);

  // Models keep every mode the energy fraction asks for, and at least as
  // many as there are detectors to train.
  std::vector<shape::FrameModel> frames;
  for (int g = 0; g < groups; ++g) {
    std::vector<shape::Shape> gs;
    std::vector<double> gt;
    for (auto n : members[g]) {
      gs.push_back(shapes[n]);
      gt.push_back(thetas[n]);
    }
    frames.push_back(shape::build_box_frame_model(gs, gt, 1.0, g, cfg.calibration_iterations));
  }
  Eigen::Index k_train = cfg.modes;
  if (k_train < 0) {
    k_train = 0;
    for (const auto& f : frames) {
      k_train = std::max(k_train, shape::select_mode_count(f.model.eigvals, cfg.energy_fraction));
    }
  }
  for (auto& f : frames) {
    if (f.model.modes() < k_train) {
      throw DataError("group " + std::to_string(f.model.group_id) + " model has " + std::to_string(f.model.modes()) +
                      " modes but " + std::to_string(k_train) + " detectors were requested");
    }
    const Eigen::Index keep = std::max(k_train, shape::select_mode_count(f.model.eigvals, cfg.energy_fraction));
    f.model = shape::truncate_modes(f.model, keep);
    f.model.energy_fraction = cfg.energy_fraction;
    out.bundle.models.push_back(f.model);
  }

  std::vector<int> group_of(shapes.size(), 0);
  for (int g = 0; g < groups; ++g) {
    for (auto n : members[g]) group_of[n] = g;
  }
  const auto images = augmented(samples, thetas, cfg, false, 2);
  std::vector<shape::SpaceParams> spaces(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& model = out.bundle.models[group_of[images[i].source]];
    spaces[i] = shape::space_from_box(shape::bounding_box(images[i].landmarks), images[i].theta, model.mean_shape());
  }

  out.bundle.detectors.cfg = cfg.mode;
  out.bundle.detectors.detectors.resize(k_train);
  std::vector<DetectorLog> det(k_train);
  std::vector<AuditLog> aud(k_train);
  parallel_for(static_cast<std::size_t>(k_train), cfg.jobs, [&](std::size_t d) {
    const int k = static_cast<int>(d) + 1;
    const std::string name = "mode_" + std::to_string(k);
    std::vector<modes::ModeHypothesis> hyps;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const auto& model = out.bundle.models[group_of[images[i].source]];
      auto h = modes::fabricate_mode_hypotheses(model, images[i].image, images[i].landmarks, spaces[i], k, cfg.mode);
      std::move(h.begin(), h.end(), std::back_inserter(hyps));
    }
    aud[d] = make_audit(name, hyps, modes::audit_mode_hypotheses(hyps, cfg.mode));
    auto r = modes::train_mode_detector(hyps, k, cfg.mode_net, mix_seed(cfg.seed, name));
    det[d] = make_detector_log(name, hyps, r);
    out.bundle.detectors.detectors[d] = std::move(r.model);
  });
  out.log.detectors = std::move(det);
  out.log.audits = std::move(aud);
  return out;
}

}  // namespace shapeseg::pipeline

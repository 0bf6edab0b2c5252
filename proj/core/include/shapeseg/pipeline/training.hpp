#pragma once

#include "shapeseg/data/manifest.hpp"
#include "shapeseg/modes/bundle.hpp"
#include "shapeseg/pipeline/config.hpp"
#include "shapeseg/space/estimate.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

namespace shapeseg::pipeline {

struct DetectorLog {
  std::string name;
  std::size_t inputs = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::vector<std::vector<double>> pretrain_losses;
  std::vector<double> finetune_loss;
};

/// Result of checking one generated hypothesis set against its labeling rule.
struct AuditLog {
  std::string name;
  std::size_t checked = 0;
  std::vector<std::string> violations;
};

struct TrainingLog {
  std::vector<DetectorLog> detectors;
  std::vector<AuditLog> audits;

  std::size_t violation_count() const;
  nlohmann::json to_json() const;
  void append(const TrainingLog& other);
};

/// Ground-truth orientation per sample: the truth record when every sample
/// has one, otherwise GPA rotations centered on their circular mean.
std::vector<double> training_orientations(std::span<const data::Sample> samples);

struct SpaceTraining {
  space::SpaceDetectorSet set;
  TrainingLog log;
};

/// Trains the four line detectors (flip-augmented in both axes) and the
/// orientation detector (horizontal flips only). Every sample needs
/// landmarks.
SpaceTraining train_space(std::span<const data::Sample> samples, const RunConfig& cfg);

struct ShapeTraining {
  modes::ShapeBundle bundle;
  TrainingLog log;
};

/// Splits the shapes by aspect ratio (one group when the split is
/// degenerate), builds a box-frame model per group and trains one shared
/// detector per mode.
ShapeTraining train_shape(std::span<const data::Sample> samples, const RunConfig& cfg);

}  // namespace shapeseg::pipeline

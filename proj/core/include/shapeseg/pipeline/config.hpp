#pragma once

#include "shapeseg/data/augment.hpp"
#include "shapeseg/data/synthetic.hpp"
#include "shapeseg/modes/hypotheses.hpp"
#include "shapeseg/nn/classifier.hpp"
#include "shapeseg/space/line.hpp"
#include "shapeseg/space/orientation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace shapeseg::pipeline {

/// Every tunable of a run. Built-in defaults follow the published settings
/// where they exist (r=7, q=15, top_n=10, 0.0017 rad orientation step,
/// 0.017/0.034 rad bands, 95% energy, learning rates 0.001 pre-training /
/// 0.1 fine-tuning, batch 1000, 100 epochs).
struct RunConfig {
  std::uint64_t seed = 0;
  int jobs = 1;

  int image_width = 2048;
  int image_height = 2048;
  int bit_depth = 12;

  data::SyntheticSpec synth;

  int r = 7;
  int space_top_n = 10;
  space::LineLabelRule line_rule;
  int line_neg_multiple = 3;
  space::OrientationRule orientation_rule;
  space::OrientationScan scan;
  int orientation_positives = 3;
  int orientation_neg_multiple = 3;
  nn::DetectorConfig line_net;
  nn::DetectorConfig orientation_net;

  double energy_fraction = 0.95;
  int modes = -1;  // detectors to train / modes to use; -1 = all model modes
  modes::ModeConfig mode;
  nn::DetectorConfig mode_net;
  std::optional<double> group_threshold;  // empty: fit by EM
  int calibration_iterations = 5;

  data::AugmentConfig augment;

  int folds = 2;

  /// Throws DataError on out-of-range settings.
  void validate() const;
};

RunConfig paper_preset();
/// 256x256 images, 16 landmarks per side (M=32), q=9, K=5 and narrow
/// networks with SGD settings that converge at that scale.
RunConfig desk_preset();
/// "desk" or "paper"; throws DataError otherwise.
RunConfig preset(const std::string& name);

nlohmann::json config_to_json(const RunConfig& cfg);
/// Overlays `patch` (same layout as config_to_json, any subset of keys) on
/// `base`. Unknown keys are rejected with DataError.
RunConfig apply_config_json(const RunConfig& base, const nlohmann::json& patch);
RunConfig load_config_file(const RunConfig& base, const std::filesystem::path& path);

/// Sets one value by dotted key, e.g. "space.r"; the value is parsed as
/// JSON when possible and taken as a string otherwise.
RunConfig set_config_value(const RunConfig& base, const std::string& dotted_key, const std::string& value);

/// Command-line exposure of a configuration entry.
struct ParamInfo {
  std::string flag;               // without leading dashes
  std::vector<std::string> keys;  // dotted keys written by the flag
  std::string module;             // consuming module
  std::string help;
  std::vector<std::string> commands;  // commands offering the flag
};

const std::vector<ParamInfo>& parameter_table();

/// Value at a dotted key rendered as compact JSON.
std::string config_value_string(const RunConfig& cfg, const std::string& dotted_key);

}  // namespace shapeseg::pipeline

#include "shapeseg/pipeline/config.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/json_io.hpp"

namespace shapeseg::pipeline {

using nlohmann::json;

void RunConfig::validate() const {
  if (jobs < 1) throw DataError("jobs must be at least 1");
  if (image_width < 1 || image_height < 1) throw DataError("image dims must be positive");
  if (bit_depth < 1 || bit_depth > 16) throw DataError("bit depth must lie in [1, 16]");
  synth.validate();
  if (r < 1) throw DataError("r must be at least 1");
  if (space_top_n < 1) throw DataError("space top_n must be at least 1");
  if (!(line_rule.positive_within >= 0.0 && line_rule.negative_from > line_rule.positive_within)) {
    throw DataError("line label bands must satisfy 0 <= positive < negative");
  }
  if (!(orientation_rule.positive_within >= 0.0 &&
        orientation_rule.negative_from > orientation_rule.positive_within)) {
    throw DataError("orientation label bands must satisfy 0 <= positive < negative");
  }
  scan.grid();
  if (scan.crop_side < 4 || !(scan.crop_margin > 0.0)) throw DataError("invalid orientation crop settings");
  if (orientation_positives < 1) throw DataError("orientation_positives must be at least 1");
  if (!(energy_fraction > 0.0 && energy_fraction <= 1.0)) throw DataError("energy fraction must lie in (0, 1]");
  if (modes < -1) throw DataError("modes must be -1 (all) or non-negative");
  mode.validate();
  for (const auto* net : {&line_net, &orientation_net, &mode_net}) {
    if (net->hidden.empty()) throw DataError("every detector needs at least one hidden layer");
    for (auto h : net->hidden) {
      if (h < 1) throw DataError("hidden widths must be positive");
    }
    net->pretrain.validate();
    net->finetune.validate();
  }
  if (group_threshold && !(*group_threshold > 0.0)) throw DataError("group threshold must be positive");
  if (calibration_iterations < 1) throw DataError("calibration_iterations must be at least 1");
  if (augment.intensity_components < 0 || augment.intensity_side < 4 || augment.intensity_copies < 0) {
    throw DataError("invalid augmentation settings");
  }
  if (folds < 2) throw DataError("cross-validation needs at least 2 folds");
}

RunConfig paper_preset() {
  RunConfig c;
  c.synth.width = 2048;
  c.synth.height = 2048;
  c.synth.landmarks_per_side = 72;
  c.synth.spacing = 0.17;
  c.line_net.hidden = {800, 400};
  c.orientation_net.hidden = {800, 400};
  c.mode_net.hidden = {1600, 800};
  for (auto* net : {&c.line_net, &c.orientation_net, &c.mode_net}) {
    net->pretrain = {0.001, 1000, 100, 0.25, 0};
    net->finetune = {0.1, 1000, 100, 0.0, 0};
  }
  return c;
}

RunConfig desk_preset() {
  RunConfig c = paper_preset();
  c.image_width = 256;
  c.image_height = 256;
  c.synth.width = 256;
  c.synth.height = 256;
  c.synth.landmarks_per_side = 16;
  c.synth.spacing = 1.36;
  c.modes = 5;
  c.energy_fraction = 0.98;
  c.mode.q = 9;
  c.line_net.hidden = {64, 32};
  c.orientation_net.hidden = {64, 32};
  c.mode_net.hidden = {128, 64};
  for (auto* net : {&c.line_net, &c.orientation_net, &c.mode_net}) {
    net->pretrain = {0.05, 16, 10, 0.25, 0};
    net->finetune = {0.1, 16, 40, 0.0, 0};
  }
  c.mode_net.finetune.epochs = 80;
  // Many near-truth positives and few negatives per image sharpen the
  // orientation peak at this resolution.
  c.orientation_positives = 10;
  c.orientation_neg_multiple = 1;
  return c;
}

RunConfig preset(const std::string& name) {
  if (name == "paper") return paper_preset();
  if (name == "desk") return desk_preset();
  throw DataError("unknown preset '" + name + "' (expected desk or paper)");
}

namespace {

json train_json(const nn::TrainConfig& t, bool with_corruption) {
  json j = {{"learning_rate", t.learning_rate}, {"batch_size", t.batch_size}, {"epochs", t.epochs}};
  if (with_corruption) j["corruption_rate"] = t.corruption_rate;
  return j;
}

nn::TrainConfig train_from(const json& j, bool with_corruption) {
  nn::TrainConfig t;
  t.learning_rate = j.at("learning_rate").get<double>();
  t.batch_size = j.at("batch_size").get<int>();
  t.epochs = j.at("epochs").get<int>();
  t.corruption_rate = with_corruption ? j.at("corruption_rate").get<double>() : 0.0;
  return t;
}

json net_json(const nn::DetectorConfig& d) {
  return {{"hidden", d.hidden}, {"pretrain", train_json(d.pretrain, true)}, {"finetune", train_json(d.finetune, false)}};
}

nn::DetectorConfig net_from(const json& j) {
  nn::DetectorConfig d;
  d.hidden = j.at("hidden").get<std::vector<Eigen::Index>>();
  d.pretrain = train_from(j.at("pretrain"), true);
  d.finetune = train_from(j.at("finetune"), false);
  return d;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.jobs = j.at("jobs").get<int>();
  const json& d = j.at("data");
  c.image_width = d.at("width").get<int>();
  c.image_height = d.at("height").get<int>();
  c.bit_depth = d.at("bit_depth").get<int>();
  c.synth = data::synthetic_spec_from_json(j.at("synth"));
  const json& s = j.at("space");
  c.r = s.at("r").get<int>();
  c.space_top_n = s.at("top_n").get<int>();
  c.line_rule.positive_within = s.at("line_positive_within").get<double>();
  c.line_rule.negative_from = s.at("line_negative_from").get<double>();
  c.line_neg_multiple = s.at("line_neg_multiple").get<int>();
  c.scan.step = s.at("theta_step").get<double>();
  c.scan.range = s.at("theta_range").get<double>();
  c.orientation_rule.positive_within = s.at("theta_positive_within").get<double>();
  c.orientation_rule.negative_from = s.at("theta_negative_from").get<double>();
  c.scan.crop_side = s.at("crop_side").get<int>();
  c.scan.crop_margin = s.at("crop_margin").get<double>();
  c.orientation_positives = s.at("orientation_positives").get<int>();
  c.orientation_neg_multiple = s.at("orientation_neg_multiple").get<int>();
  c.line_net = net_from(s.at("line_net"));
  c.orientation_net = net_from(s.at("orientation_net"));
  const json& sh = j.at("shape");
  c.energy_fraction = sh.at("energy_fraction").get<double>();
  c.modes = sh.at("modes").get<int>();
  c.mode.q = sh.at("q").get<int>();
  c.mode.range = sh.at("range").get<double>();
  c.mode.grid_step = sh.at("grid_step").get<double>();
  c.mode.exclusion = sh.at("exclusion").get<double>();
  c.mode.scan_step = sh.at("scan_step").get<double>();
  c.mode.top_n = sh.at("top_n").get<int>();
  c.mode.synthesized_positive = sh.at("synthesized_positive").get<bool>();
  if (!sh.at("group_threshold").is_null()) c.group_threshold = sh.at("group_threshold").get<double>();
  c.calibration_iterations = sh.at("calibration_iterations").get<int>();
  c.mode_net = net_from(sh.at("mode_net"));
  const json& a = j.at("augment");
  c.augment.horizontal_flip = a.at("horizontal_flip").get<bool>();
  c.augment.vertical_flip = a.at("vertical_flip").get<bool>();
  c.augment.intensity_copies = a.at("intensity_copies").get<int>();
  c.augment.intensity_components = a.at("intensity_components").get<int>();
  c.augment.intensity_side = a.at("intensity_side").get<int>();
  c.augment.alpha_sigma = a.at("alpha_sigma").get<double>();
  c.folds = j.at("eval").at("folds").get<int>();
  c.augment.seed = c.seed;
  return c;
}

void reject_unknown(const json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) return;
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.is_object() || !base.contains(it.key())) throw DataError("unknown configuration key '" + key + "'");
    const json& b = base.at(it.key());
    if (b.is_object()) reject_unknown(b, it.value(), key);
  }
}

json* find_key(json& doc, const std::string& dotted) {
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

}  // namespace

json config_to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"jobs", c.jobs},
          {"data", {{"width", c.image_width}, {"height", c.image_height}, {"bit_depth", c.bit_depth}}},
          {"synth", data::synthetic_spec_to_json(c.synth)},
          {"space",
           {{"r", c.r},
            {"top_n", c.space_top_n},
            {"line_positive_within", c.line_rule.positive_within},
            {"line_negative_from", c.line_rule.negative_from},
            {"line_neg_multiple", c.line_neg_multiple},
            {"theta_step", c.scan.step},
            {"theta_range", c.scan.range},
            {"theta_positive_within", c.orientation_rule.positive_within},
            {"theta_negative_from", c.orientation_rule.negative_from},
            {"crop_side", c.scan.crop_side},
            {"crop_margin", c.scan.crop_margin},
            {"orientation_positives", c.orientation_positives},
            {"orientation_neg_multiple", c.orientation_neg_multiple},
            {"line_net", net_json(c.line_net)},
            {"orientation_net", net_json(c.orientation_net)}}},
          {"shape",
           {{"energy_fraction", c.energy_fraction},
            {"modes", c.modes},
            {"q", c.mode.q},
            {"range", c.mode.range},
            {"grid_step", c.mode.grid_step},
            {"exclusion", c.mode.exclusion},
            {"scan_step", c.mode.scan_step},
            {"top_n", c.mode.top_n},
            {"synthesized_positive", c.mode.synthesized_positive},
            {"group_threshold", c.group_threshold ? json(*c.group_threshold) : json(nullptr)},
            {"calibration_iterations", c.calibration_iterations},
            {"mode_net", net_json(c.mode_net)}}},
          {"augment",
           {{"horizontal_flip", c.augment.horizontal_flip},
            {"vertical_flip", c.augment.vertical_flip},
            {"intensity_copies", c.augment.intensity_copies},
            {"intensity_components", c.augment.intensity_components},
            {"intensity_side", c.augment.intensity_side},
            {"alpha_sigma", c.augment.alpha_sigma}}},
          {"eval", {{"folds", c.folds}}}};
}

RunConfig apply_config_json(const RunConfig& base, const json& patch) {
  if (!patch.is_object()) throw DataError("configuration must be a JSON object");
  json doc = config_to_json(base);
  reject_unknown(doc, patch, "");
  doc.merge_patch(patch);
  // merge_patch deletes keys set to null; restore the nullable threshold.
  if (!doc["shape"].contains("group_threshold")) doc["shape"]["group_threshold"] = nullptr;
  try {
    RunConfig c = config_from_json(doc);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid configuration: ") + e.what());
  }
}

RunConfig load_config_file(const RunConfig& base, const std::filesystem::path& path) {
  return apply_config_json(base, read_json_file(path));
}

RunConfig set_config_value(const RunConfig& base, const std::string& dotted_key, const std::string& value) {
  json doc = config_to_json(base);
  json* node = find_key(doc, dotted_key);
  if (node == nullptr) throw DataError("unknown configuration key '" + dotted_key + "'");
  json parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(value) : parsed;
  try {
    RunConfig c = config_from_json(doc);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw DataError("invalid value '" + value + "' for " + dotted_key + ": " + e.what());
  }
}

std::string config_value_string(const RunConfig& cfg, const std::string& dotted_key) {
  json doc = config_to_json(cfg);
  const json* node = find_key(doc, dotted_key);
  if (node == nullptr) throw DataError("unknown configuration key '" + dotted_key + "'");
  return node->dump();
}

const std::vector<ParamInfo>& parameter_table() {
  static const std::vector<ParamInfo> table = {
      {"dims", {"synth.width", "synth.height", "data.width", "data.height"}, "data-pipeline",
       "square image side in pixels (synthetic output and network input)", {"synth", "train"}},
      {"count", {"synth.count"}, "data-pipeline", "number of synthetic images", {"synth"}},
      {"landmarks-per-side", {"synth.landmarks_per_side"}, "data-pipeline", "landmarks per side (M/2)", {"synth"}},
      {"noise", {"synth.noise_sigma"}, "data-pipeline", "Gaussian noise sigma of synthetic images", {"synth"}},
      {"bit-depth", {"data.bit_depth"}, "data-pipeline", "intensity divisor exponent (raw / 2^bits)",
       {"train", "segment", "eval"}},
      {"r", {"space.r"}, "space-learning", "line strip half-width in pixels", {"train"}},
      {"top-n", {"space.top_n", "shape.top_n"}, "space-learning, shape-learning",
       "candidates averaged by every detector", {"train"}},
      {"line-neg-multiple", {"space.line_neg_multiple"}, "space-learning", "line negatives per positive", {"train"}},
      {"theta-step", {"space.theta_step"}, "space-learning", "orientation scan step (rad)", {"train"}},
      {"theta-range", {"space.theta_range"}, "space-learning", "orientation scan half-range (rad)", {"train"}},
      {"dtheta-pos", {"space.theta_positive_within"}, "space-learning", "orientation positive band (rad)",
       {"train"}},
      {"dtheta-neg", {"space.theta_negative_from"}, "space-learning", "orientation negative bound (rad)",
       {"train"}},
      {"energy", {"shape.energy_fraction"}, "shape-model", "retained eigenvalue energy fraction", {"train"}},
      {"modes", {"shape.modes"}, "shape-learning", "mode detectors to train / modes to apply (-1 = all)",
       {"train", "segment"}},
      {"q", {"shape.q"}, "shape-learning", "landmark patch side (odd)", {"train"}},
      {"mode-scan-step", {"shape.scan_step"}, "shape-learning", "test-time mode scan step (stddev units)",
       {"train"}},
      {"mode-exclusion", {"shape.exclusion"}, "shape-learning", "negative mode offset bound (stddev units)",
       {"train"}},
      {"group-threshold", {"shape.group_threshold"}, "shape-model",
       "fixed aspect-ratio cut (null fits a two-component mixture; published value 1.22)", {"train"}},
      {"sdae-lr",
       {"space.line_net.pretrain.learning_rate", "space.orientation_net.pretrain.learning_rate",
        "shape.mode_net.pretrain.learning_rate"},
       "nn-engine", "SdAE pre-training learning rate", {"train"}},
      {"dnn-lr",
       {"space.line_net.finetune.learning_rate", "space.orientation_net.finetune.learning_rate",
        "shape.mode_net.finetune.learning_rate"},
       "nn-engine", "fine-tuning learning rate", {"train"}},
      {"batch",
       {"space.line_net.pretrain.batch_size", "space.line_net.finetune.batch_size",
        "space.orientation_net.pretrain.batch_size", "space.orientation_net.finetune.batch_size",
        "shape.mode_net.pretrain.batch_size", "shape.mode_net.finetune.batch_size"},
       "nn-engine", "mini-batch size", {"train"}},
      {"epochs",
       {"space.line_net.pretrain.epochs", "space.line_net.finetune.epochs", "space.orientation_net.pretrain.epochs",
        "space.orientation_net.finetune.epochs", "shape.mode_net.pretrain.epochs", "shape.mode_net.finetune.epochs"},
       "nn-engine", "training epochs", {"train"}},
      {"corruption",
       {"space.line_net.pretrain.corruption_rate", "space.orientation_net.pretrain.corruption_rate",
        "shape.mode_net.pretrain.corruption_rate"},
       "nn-engine", "dAE masking-noise rate", {"train"}},
      {"alpha-sigma", {"augment.alpha_sigma"}, "data-pipeline", "intensity augmentation alpha stddev", {"train"}},
      {"folds", {"eval.folds"}, "evaluation", "cross-validation folds", {"eval"}},
  };
  return table;
}

}  // namespace shapeseg::pipeline

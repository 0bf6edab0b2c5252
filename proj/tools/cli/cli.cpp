#include "cli.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/json_io.hpp"
#include "shapeseg/common/log.hpp"
#include "shapeseg/data/image_io.hpp"
#include "shapeseg/data/manifest.hpp"
#include "shapeseg/data/raster.hpp"
#include "shapeseg/data/synthetic.hpp"
#include "shapeseg/eval/crossval.hpp"
#include "shapeseg/eval/report.hpp"
#include "shapeseg/modes/bundle.hpp"
#include "shapeseg/pipeline/config.hpp"
#include "shapeseg/pipeline/segmenter.hpp"
#include "shapeseg/pipeline/training.hpp"
#include "shapeseg/shape/io.hpp"
#include "shapeseg/space/bundle.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <set>

namespace shapeseg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string preset = "paper";
  std::vector<std::string> sets;
  std::map<std::string, std::string> params;
};

void set_dotted(json& doc, const std::string& key, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = key.find('.', start);
    if (dot == std::string::npos) {
      (*node)[key.substr(start)] = value;
      return;
    }
    node = &(*node)[key.substr(start, dot - start)];
    start = dot + 1;
  }
}

json parse_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  return v.is_discarded() ? json(text) : v;
}

// Precedence: preset < config file < --set < named flags < --seed/--jobs.
pipeline::RunConfig effective_config(const Globals& g) {
  pipeline::RunConfig cfg = pipeline::preset(g.preset);
  if (g.config) cfg = pipeline::load_config_file(cfg, *g.config);
  json patch = json::object();
  for (const auto& s : g.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects KEY=VALUE, got '" + s + "'");
    set_dotted(patch, s.substr(0, eq), parse_value(s.substr(eq + 1)));
  }
  for (const auto& [flag, value] : g.params) {
    for (const auto& info : pipeline::parameter_table()) {
      if (info.flag != flag) continue;
      for (const auto& key : info.keys) set_dotted(patch, key, parse_value(value));
    }
  }
  if (g.seed) {
    patch["seed"] = *g.seed;
    patch["synth"]["seed"] = *g.seed;
  }
  if (g.jobs) patch["jobs"] = *g.jobs;
  return pipeline::apply_config_json(cfg, patch);
}

void add_param_flags(CLI::App* cmd, const std::string& name, Globals& g) {
  static const pipeline::RunConfig defaults = pipeline::paper_preset();
  for (const auto& info : pipeline::parameter_table()) {
    if (std::find(info.commands.begin(), info.commands.end(), name) == info.commands.end()) continue;
    std::string* slot = &g.params[info.flag];
    auto* opt = cmd->add_option_function<std::string>(
        "--" + info.flag, [slot](const std::string& v) { *slot = v; }, info.help + " (" + info.module + ")");
    opt->type_name("VALUE");
    opt->default_str(pipeline::config_value_string(defaults, info.keys.front()));
  }
}

// Only flags that were actually given end up in Globals::params.
void prune_params(Globals& g, const std::set<std::string>& given) {
  for (auto it = g.params.begin(); it != g.params.end();) {
    it = given.count(it->first) ? std::next(it) : g.params.erase(it);
  }
}

data::DatasetManifest load_for_training(const fs::path& path, const pipeline::RunConfig& cfg) {
  data::DatasetManifest m = data::load_manifest(path);
  if (!m.target_dims) m.target_dims = std::make_pair(cfg.image_width, cfg.image_height);
  return m;
}

json provenance(const pipeline::RunConfig& cfg, const std::string& stage) {
  return {{"stage", stage}, {"config", pipeline::config_to_json(cfg)}};
}

int cmd_synth(const pipeline::RunConfig& cfg, const fs::path& out) {
  const fs::path manifest = data::write_synthetic_dataset(out, cfg.synth, cfg.jobs);
  std::cout << manifest.string() << "\n";
  return 0;
}

int cmd_train(const pipeline::RunConfig& cfg, const fs::path& manifest_path, const std::string& stage,
              const fs::path& out) {
  const data::DatasetManifest manifest = load_for_training(manifest_path, cfg);
  const std::vector<data::Sample> samples = data::load_samples(manifest, cfg.jobs);
  for (const auto& s : samples) {
    if (!s.landmarks) throw DataError("training sample '" + s.id + "' has no landmarks");
  }
  fs::create_directories(out);
  if (stage == "space" || stage == "all") {
    std::cerr << "training space detectors on " << samples.size() << " images\n";
    const auto t = pipeline::train_space(samples, cfg);
    space::save_space_bundle(out / "space", t.set, provenance(cfg, "space"));
    write_json_file(out / "training_log_space.json", t.log.to_json());
    if (t.log.violation_count() > 0) throw DataError("hypothesis audit failed; see training_log_space.json");
  }
  if (stage == "shape" || stage == "all") {
    std::cerr << "training shape models and mode detectors on " << samples.size() << " images\n";
    const auto t = pipeline::train_shape(samples, cfg);
    modes::save_shape_bundle(out / "shape", t.bundle, provenance(cfg, "shape"));
    write_json_file(out / "training_log_shape.json", t.log.to_json());
    if (t.log.violation_count() > 0) throw DataError("hypothesis audit failed; see training_log_shape.json");
  }
  std::cout << out.string() << "\n";
  return 0;
}

struct SegmentInputs {
  std::optional<fs::path> model;
  std::optional<fs::path> space;
  std::optional<fs::path> shape;
  std::optional<fs::path> manifest;
  std::vector<fs::path> images;
  fs::path out;
  bool mask = false;
  bool overlay = false;
};

int cmd_segment(const pipeline::RunConfig& cfg, const SegmentInputs& in) {
  const fs::path space_dir = in.space ? *in.space : (in.model ? *in.model / "space" : fs::path());
  const fs::path shape_dir = in.shape ? *in.shape : (in.model ? *in.model / "shape" : fs::path());
  if (space_dir.empty() || shape_dir.empty()) throw UsageError("give --model DIR or both --space and --shape");
  if (!in.manifest && in.images.empty()) throw UsageError("give --manifest or at least one --image");

  const space::SpaceDetectorSet space_set = space::load_space_bundle(space_dir);
  const modes::ShapeBundle shapes = modes::load_shape_bundle(shape_dir);
  const int available = shapes.detectors.modes();
  if (cfg.modes > available) {
    throw DataError(std::to_string(cfg.modes) + " modes requested but " + shape_dir.string() +
                    " only holds detectors for modes 1.." + std::to_string(available) + " (mode_" +
                    std::to_string(available + 1) + " is missing)");
  }

  data::DatasetManifest inputs;
  if (in.manifest) {
    inputs = data::load_manifest(*in.manifest);
  } else {
    inputs.bit_depth = space_set.bit_depth;
    for (const auto& p : in.images) inputs.entries.push_back({fs::absolute(p), {}, {}, {}, {}});
  }

  data::DatasetManifest preds;
  preds.bit_depth = inputs.bit_depth;
  preds.target_dims = std::make_pair(space_set.image_width, space_set.image_height);
  fs::create_directories(in.out / "landmarks");
  fs::create_directories(in.out / "segmentations");
  if (in.mask) fs::create_directories(in.out / "masks");
  if (in.overlay) fs::create_directories(in.out / "overlays");
  for (std::size_t i = 0; i < inputs.entries.size(); ++i) {
    const data::Sample s = data::load_sample(inputs, i);
    const pipeline::Segmentation seg = pipeline::segment_image(s.image, space_set, shapes, cfg.modes, cfg.jobs);
    const fs::path lm = fs::path("landmarks") / (s.id + ".json");
    shape::LandmarkRecord rec;
    rec.image_path = inputs.entries[i].image_path.string();
    rec.group = seg.group;
    rec.landmarks = seg.final_shape();
    shape::save_landmarks(in.out / lm, rec);
    write_json_file(in.out / "segmentations" / (s.id + ".json"), pipeline::segmentation_to_json(seg, s.id));
    if (in.mask || in.overlay) {
      const data::Mask m = data::rasterize_shape(seg.final_shape(), s.image.width, s.image.height, true);
      if (in.mask) {
        data::RawImage raw{m.width, m.height, 255, {}};
        for (auto v : m.values) raw.values.push_back(v ? 255 : 0);
        data::write_pgm(in.out / "masks" / (s.id + ".pgm"), raw);
      }
      if (in.overlay) {
        const data::Mask gt = s.landmarks ? data::rasterize_shape(*s.landmarks, s.image.width, s.image.height)
                                          : data::Mask{s.image.width, s.image.height,
                                                       std::vector<std::uint8_t>(m.values.size(), 0)};
        eval::write_overlay_png(in.out / "overlays" / (s.id + ".png"), s.image, gt, m);
      }
    }
    data::ManifestEntry e;
    e.image_path = inputs.entries[i].image_path;
    e.landmark_path = lm;
    e.spacing = s.image.spacing;
    preds.entries.push_back(e);
  }
  write_json_file(in.out / "manifest.json", data::manifest_to_json(preds));
  std::cout << (in.out / "manifest.json").string() << "\n";
  return 0;
}

int cmd_eval_pairs(const pipeline::RunConfig& cfg, const fs::path& pred_path, const fs::path& gt_path,
                   const fs::path& stem) {
  const data::DatasetManifest pred = data::load_manifest(pred_path);
  data::DatasetManifest gt = data::load_manifest(gt_path);
  if (!gt.target_dims && pred.target_dims) gt.target_dims = pred.target_dims;

  std::map<std::string, std::size_t> gt_index;
  for (std::size_t i = 0; i < gt.entries.size(); ++i) gt_index[gt.entries[i].id()] = i;
  std::vector<std::string> unmatched;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < pred.entries.size(); ++i) {
    const auto it = gt_index.find(pred.entries[i].id());
    if (it == gt_index.end()) {
      unmatched.push_back("prediction " + pred.entries[i].id());
    } else {
      pairs.emplace_back(i, it->second);
      seen.insert(it->first);
    }
  }
  for (const auto& [id, i] : gt_index) {
    if (!seen.count(id)) unmatched.push_back("ground truth " + id);
  }
  if (pairs.empty()) throw DataError("prediction and ground-truth manifests share no image ids");
  if (!unmatched.empty()) {
    std::string msg = "unmatched entries:";
    for (const auto& u : unmatched) msg += "\n  " + u;
    throw DataError(msg);
  }

  eval::EvalReport report;
  report.seed = cfg.seed;
  report.config = pipeline::config_to_json(cfg);
  for (const auto& [p, g] : pairs) {
    const data::Sample s = data::load_sample(gt, g);
    if (!s.landmarks) throw DataError("ground truth '" + s.id + "' has no landmarks");
    if (!pred.entries[p].landmark_path) throw DataError("prediction '" + s.id + "' has no landmark file");
    const shape::Shape predicted = shape::load_landmarks(*pred.entries[p].landmark_path).landmarks;
    if (pred.target_dims && (pred.target_dims->first != s.image.width || pred.target_dims->second != s.image.height)) {
      throw DataError("prediction grid " + std::to_string(pred.target_dims->first) + "x" +
                      std::to_string(pred.target_dims->second) + " differs from ground-truth grid " +
                      std::to_string(s.image.width) + "x" + std::to_string(s.image.height));
    }
    const eval::ShapeScores sc =
        eval::score_shapes(*s.landmarks, predicted, s.image.width, s.image.height, s.image.spacing);
    eval::ImageResult r;
    r.id = s.id;
    r.dsc = sc.dsc;
    r.jaccard = sc.jaccard;
    r.acd_mm = sc.acd_mm;
    report.images.push_back(std::move(r));
  }
  report.aggregate();
  eval::write_report(stem, report);
  std::cout << report.table();
  return 0;
}

int cmd_eval_crossval(const pipeline::RunConfig& cfg, const fs::path& manifest_path, const fs::path& stem) {
  const data::DatasetManifest manifest = load_for_training(manifest_path, cfg);
  const std::vector<data::Sample> samples = data::load_samples(manifest, cfg.jobs);
  const auto run = eval::crossval(samples, cfg, [](const std::string& msg) { std::cerr << msg << "\n"; });
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  eval::write_report(stem, run.report);
  json logs = json::array();
  for (const auto& l : run.logs) logs.push_back(l.to_json());
  fs::path log_path = stem;
  log_path += "_training.json";
  write_json_file(log_path, logs);
  for (std::size_t f = 0; f < run.train_seconds.size(); ++f) {
    std::cerr << "fold " << f << ": train " << run.train_seconds[f] << " s, test " << run.test_seconds[f] << " s\n";
  }
  std::cout << run.report.table();
  std::size_t violations = 0;
  for (const auto& l : run.logs) violations += l.violation_count();
  if (violations > 0) throw DataError("hypothesis audit failed; see " + log_path.string());
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Deformable shape segmentation: space learning, marginal shape learning and evaluation", "shapeseg"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON configuration file overlaid on the preset")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed for every stage")->default_str("0");
  app.add_option("--jobs", g.jobs, "worker thread cap")->default_str("1");
  app.add_option("--preset", g.preset, "parameter preset")->check(CLI::IsMember({"desk", "paper"}))->capture_default_str();
  app.add_option("--set", g.sets, "override any configuration entry, e.g. --set space.r=5")->type_name("KEY=VALUE");

  fs::path synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
  synth->add_option("--out", synth_out, "output directory")->required();
  add_param_flags(synth, "synth", g);

  fs::path train_manifest, train_out;
  std::string stage = "all";
  auto* train = app.add_subcommand("train", "train space detectors, shape models and mode detectors");
  train->add_option("--manifest", train_manifest, "training manifest")->required()->check(CLI::ExistingFile);
  train->add_option("--stage", stage, "what to train")->check(CLI::IsMember({"space", "shape", "all"}))
      ->capture_default_str();
  train->add_option("--out", train_out, "bundle directory (space/ and shape/ are created inside)")->required();
  add_param_flags(train, "train", g);

  SegmentInputs seg_in;
  auto* segment = app.add_subcommand("segment", "segment images with trained bundles");
  segment->add_option("--model", seg_in.model, "directory holding space/ and shape/ bundles");
  segment->add_option("--space", seg_in.space, "space detector bundle directory");
  segment->add_option("--shape", seg_in.shape, "shape bundle directory");
  segment->add_option("--manifest", seg_in.manifest, "manifest of images to segment")->check(CLI::ExistingFile);
  segment->add_option("--image", seg_in.images, "image file (PGM or PNG); repeatable")->check(CLI::ExistingFile);
  segment->add_option("--out", seg_in.out, "output directory")->required();
  segment->add_flag("--mask", seg_in.mask, "also write binary mask PGMs");
  segment->add_flag("--overlay", seg_in.overlay, "also write overlay PNGs (truth green, result red, overlap blue)");
  add_param_flags(segment, "segment", g);

  fs::path pred_manifest, gt_manifest, cv_manifest, eval_out;
  bool do_crossval = false;
  auto* evalc = app.add_subcommand("eval", "score predictions against ground truth, or cross-validate");
  evalc->add_option("--pred", pred_manifest, "prediction manifest written by segment")->check(CLI::ExistingFile);
  evalc->add_option("--gt", gt_manifest, "ground-truth manifest")->check(CLI::ExistingFile);
  evalc->add_flag("--crossval", do_crossval, "train and test on folds of --manifest");
  evalc->add_option("--manifest", cv_manifest, "dataset manifest for --crossval")->check(CLI::ExistingFile);
  evalc->add_option("--out", eval_out, "report stem (writes STEM.json and STEM.txt)")->required();
  add_param_flags(evalc, "eval", g);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::set<std::string> given;
    for (auto* cmd : {synth, train, segment, evalc}) {
      for (const auto* opt : cmd->get_options()) {
        if (opt->count() > 0) given.insert(opt->get_name().substr(2));
      }
    }
    prune_params(g, given);
    if (const auto it = g.params.find("count"); it != g.params.end()) {
      const json v = parse_value(it->second);
      if (!v.is_number_integer() || v.get<long long>() < 1) throw UsageError("--count must be a positive integer");
    }
    const pipeline::RunConfig cfg = effective_config(g);
    if (synth->parsed()) return cmd_synth(cfg, synth_out);
    if (train->parsed()) return cmd_train(cfg, train_manifest, stage, train_out);
    if (segment->parsed()) return cmd_segment(cfg, seg_in);
    if (do_crossval) {
      if (cv_manifest.empty()) throw UsageError("--crossval needs --manifest");
      return cmd_eval_crossval(cfg, cv_manifest, eval_out);
    }
    if (pred_manifest.empty() || gt_manifest.empty()) throw UsageError("eval needs --pred and --gt, or --crossval");
    return cmd_eval_pairs(cfg, pred_manifest, gt_manifest, eval_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace shapeseg::cli

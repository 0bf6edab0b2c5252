#include "shapeseg/modes/bundle.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/json_io.hpp"
#include "shapeseg/nn/serialize.hpp"
#include "shapeseg/shape/io.hpp"

namespace shapeseg::modes {
namespace fs = std::filesystem;

int ShapeBundle::group_for(double aspect_ratio) const {
  if (models.empty()) throw DataError("shape bundle holds no models");
  if (!split || models.size() == 1) return models.front().group_id;
  return split->group_of(aspect_ratio);
}

const shape::ShapeModel& ShapeBundle::model_for(double aspect_ratio) const {
  if (models.empty()) throw DataError("shape bundle holds no models");
  if (!split || models.size() == 1) return models.front();
  return shape::select_model(aspect_ratio, *split, models);
}

void save_shape_bundle(const fs::path& dir, const ShapeBundle& bundle, const nlohmann::json& provenance) {
  if (bundle.models.empty()) throw DataError("shape bundle holds no models");
  bundle.detectors.cfg.validate();
  fs::create_directories(dir);
  nlohmann::json model_refs = nlohmann::json::array();
  for (const auto& m : bundle.models) {
    const std::string name = "model_g" + std::to_string(m.group_id) + ".json";
    shape::save_shape_model(dir / name, m);
    model_refs.push_back(name);
  }
  nlohmann::json files = nlohmann::json::array();
  for (int k = 1; k <= bundle.detectors.modes(); ++k) {
    const std::string name = "mode_" + std::to_string(k) + ".json";
    nn::save_network(dir / name, bundle.detectors.detectors[static_cast<std::size_t>(k - 1)]);
    files.push_back(name);
  }
  const ModeConfig& c = bundle.detectors.cfg;
  nlohmann::json manifest = {{"version", 1},
                             {"q", c.q},
                             {"scan_step", c.scan_step},
                             {"top_n", c.top_n},
                             {"K", bundle.detectors.modes()},
                             {"range", c.range},
                             {"grid_step", c.grid_step},
                             {"exclusion", c.exclusion},
                             {"synthesized_positive", c.synthesized_positive},
                             {"units", "stddev"},
                             {"model_refs", model_refs},
                             {"files", files}};
  if (bundle.split) {
    write_json_file(dir / "group_split.json", shape::group_split_to_json(*bundle.split));
    manifest["group_split"] = "group_split.json";
  }
  if (!provenance.is_null()) manifest["config"] = provenance;
  write_json_file(dir / "manifest.json", manifest);
}

ShapeBundle load_shape_bundle(const fs::path& dir) {
  const nlohmann::json m = read_json_file(dir / "manifest.json");
  ShapeBundle b;
  try {
    if (m.at("version").get<int>() != 1) throw DataError("unsupported shape bundle version");
    if (m.at("units").get<std::string>() != "stddev") throw DataError("shape bundle uses unknown weight units");
    ModeConfig& c = b.detectors.cfg;
    c.q = m.at("q").get<int>();
    c.scan_step = m.at("scan_step").get<double>();
    c.top_n = m.at("top_n").get<int>();
    c.range = m.at("range").get<double>();
    c.grid_step = m.at("grid_step").get<double>();
    c.exclusion = m.at("exclusion").get<double>();
    c.synthesized_positive = m.at("synthesized_positive").get<bool>();
    c.validate();
    for (const auto& ref : m.at("model_refs")) b.models.push_back(shape::load_shape_model(dir / ref.get<std::string>()));
    const int k = m.at("K").get<int>();
    const auto& files = m.at("files");
    if (static_cast<int>(files.size()) != k) throw DataError("shape bundle lists " + std::to_string(files.size()) +
                                                             " detector files for K=" + std::to_string(k));
    for (int i = 0; i < k; ++i) {
      const fs::path p = dir / files[static_cast<std::size_t>(i)].get<std::string>();
      if (!fs::exists(p)) throw DataError("shape bundle is missing the mode " + std::to_string(i + 1) + " detector (" +
                                          p.string() + ")");
      b.detectors.detectors.push_back(nn::load_network(p));
    }
    if (m.contains("group_split")) {
      b.split = shape::group_split_from_json(read_json_file(dir / m.at("group_split").get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed shape bundle manifest in " + dir.string() + ": " + e.what());
  }
  for (std::size_t g = 0; g < b.models.size(); ++g) {
    if (b.models[g].group_id != static_cast<int>(g)) throw DataError("shape bundle models must be ordered by group id");
  }
  return b;
}

}  // namespace shapeseg::modes

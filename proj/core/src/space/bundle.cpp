#include "shapeseg/space/bundle.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/json_io.hpp"
#include "shapeseg/nn/serialize.hpp"

namespace shapeseg::space {
namespace fs = std::filesystem;

void save_space_bundle(const fs::path& dir, const SpaceDetectorSet& set, const nlohmann::json& provenance) {
  set.validate();
  fs::create_directories(dir);
  nlohmann::json files = nlohmann::json::object();
  for (int l = 1; l <= 4; ++l) {
    const std::string name = "line_" + std::to_string(l) + ".json";
    nn::save_network(dir / name, set.lines[static_cast<std::size_t>(l - 1)]);
    files["line_" + std::to_string(l)] = name;
  }
  nn::save_network(dir / "orientation.json", set.orientation);
  files["orientation"] = "orientation.json";
  nlohmann::json manifest = {
      {"version", 1},
      {"r", set.r},
      {"top_n", set.top_n},
      {"step", set.scan.step},
      {"range", set.scan.range},
      {"crop_side", set.scan.crop_side},
      {"crop_margin", set.scan.crop_margin},
      {"image_dims", {set.image_width, set.image_height}},
      {"normalization", {{"bit_depth", set.bit_depth}, {"divisor", 1 << set.bit_depth}}},
      {"files", files}};
  if (!provenance.is_null()) manifest["config"] = provenance;
  write_json_file(dir / "manifest.json", manifest);
}

SpaceDetectorSet load_space_bundle(const fs::path& dir) {
  const nlohmann::json m = read_json_file(dir / "manifest.json");
  SpaceDetectorSet set;
  try {
    if (m.at("version").get<int>() != 1) throw DataError("unsupported space bundle version");
    set.r = m.at("r").get<int>();
    set.top_n = m.at("top_n").get<int>();
    set.scan.step = m.at("step").get<double>();
    set.scan.range = m.at("range").get<double>();
    set.scan.crop_side = m.at("crop_side").get<int>();
    set.scan.crop_margin = m.at("crop_margin").get<double>();
    const auto dims = m.at("image_dims").get<std::vector<int>>();
    if (dims.size() != 2) throw DataError("image_dims must have two entries");
    set.image_width = dims[0];
    set.image_height = dims[1];
    set.bit_depth = m.at("normalization").at("bit_depth").get<int>();
    const auto& files = m.at("files");
    for (int l = 1; l <= 4; ++l) {
      const fs::path p = dir / files.at("line_" + std::to_string(l)).get<std::string>();
      if (!fs::exists(p)) throw DataError("space bundle is missing " + p.string());
      set.lines[static_cast<std::size_t>(l - 1)] = nn::load_network(p);
    }
    const fs::path op = dir / files.at("orientation").get<std::string>();
    if (!fs::exists(op)) throw DataError("space bundle is missing " + op.string());
    set.orientation = nn::load_network(op);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed space bundle manifest in " + dir.string() + ": " + e.what());
  }
  set.validate();
  return set;
}

}  // namespace shapeseg::space

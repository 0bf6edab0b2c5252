#include "shapeseg/data/manifest.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/json_io.hpp"
#include "shapeseg/common/parallel.hpp"
#include "shapeseg/data/image_io.hpp"

#include <cmath>

namespace shapeseg::data {
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path) {
  const nlohmann::json doc = read_json_file(path);
  DatasetManifest m;
  m.base_dir = path.parent_path();
  try {
    m.bit_depth = doc.value("bit_depth", 12);
    m.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("target_dims") && !doc.at("target_dims").is_null()) {
      const auto dims = doc.at("target_dims").get<std::vector<int>>();
      if (dims.size() != 2 || dims[0] <= 0 || dims[1] <= 0) throw DataError("target_dims must be two positive ints");
      m.target_dims = std::make_pair(dims[0], dims[1]);
    }
    for (const auto& e : doc.at("entries")) {
      ManifestEntry entry;
      entry.image_path = resolve(m.base_dir, e.at("image_path").get<std::string>());
      if (e.contains("landmark_path")) entry.landmark_path = resolve(m.base_dir, e.at("landmark_path").get<std::string>());
      if (e.contains("truth_path")) entry.truth_path = resolve(m.base_dir, e.at("truth_path").get<std::string>());
      if (e.contains("group") && !e.at("group").is_null()) entry.group = e.at("group").get<int>();
      if (e.contains("spacing")) {
        const auto s = e.at("spacing").get<std::vector<double>>();
        if (s.size() != 2 || !(s[0] > 0.0 && s[1] > 0.0)) throw DataError("spacing must be two positive reals");
        entry.spacing = Eigen::Vector2d(s[0], s[1]);
      }
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (m.entries.empty()) throw DataError("manifest " + path.string() + " lists no entries");
  return m;
}

nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json j = {{"image_path", e.image_path.string()}};
    if (e.landmark_path) j["landmark_path"] = e.landmark_path->string();
    if (e.truth_path) j["truth_path"] = e.truth_path->string();
    if (e.group) j["group"] = *e.group;
    if (e.spacing) j["spacing"] = {e.spacing->x(), e.spacing->y()};
    entries.push_back(std::move(j));
  }
  nlohmann::json doc = {{"version", 1}, {"bit_depth", m.bit_depth}, {"seed", m.seed}, {"entries", entries}};
  if (m.target_dims) doc["target_dims"] = {m.target_dims->first, m.target_dims->second};
  return doc;
}

TruthRecord load_truth(const fs::path& path) {
  const nlohmann::json doc = read_json_file(path);
  TruthRecord t;
  try {
    if (doc.contains("space_params")) t.space = shape::space_params_from_json(doc.at("space_params"));
    t.theta = doc.contains("theta") ? doc.at("theta").get<double>() : (t.space ? t.space->theta : 0.0);
    if (doc.contains("group") && !doc.at("group").is_null()) t.group = doc.at("group").get<int>();
    if (doc.contains("box")) t.box = shape::box_from_json(doc.at("box"));
    t.weights = doc.value("shape_weights", std::vector<double>{});
    t.model_ref = doc.value("model_ref", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed truth file " + path.string() + ": " + e.what());
  }
  return t;
}

Sample load_sample(const DatasetManifest& manifest, std::size_t index) {
  if (index >= manifest.entries.size()) throw DataError("manifest index out of range");
  const ManifestEntry& e = manifest.entries[index];
  Sample s;
  s.id = e.id();
  s.image = load_and_normalize(e.image_path, manifest.bit_depth);
  if (e.spacing) s.image.spacing = *e.spacing;
  if (e.landmark_path) {
    const shape::LandmarkRecord rec = shape::load_landmarks(*e.landmark_path);
    s.landmarks = rec.landmarks;
    s.group = rec.group;
  }
  if (e.truth_path) {
    s.truth = load_truth(*e.truth_path);
    if (s.truth->group) s.group = s.truth->group;
  }
  if (e.group) s.group = e.group;

  if (manifest.target_dims && (manifest.target_dims->first != s.image.width ||
                               manifest.target_dims->second != s.image.height)) {
    const double fx = static_cast<double>(manifest.target_dims->first) / s.image.width;
    const double fy = static_cast<double>(manifest.target_dims->second) / s.image.height;
    s.image = resize_image(s.image, manifest.target_dims->first, manifest.target_dims->second);
    auto map = [&](const shape::Point& p) { return shape::Point((p.x() + 0.5) * fx - 0.5, (p.y() + 0.5) * fy - 0.5); };
    if (s.landmarks) {
      Eigen::VectorXd c = s.landmarks->coords();
      for (Eigen::Index i = 0; i < s.landmarks->landmark_count(); ++i) {
        const shape::Point q = map(s.landmarks->point(i));
        c(2 * i) = q.x();
        c(2 * i + 1) = q.y();
      }
      s.landmarks = shape::Shape(c, s.landmarks->sides());
    }
    if (s.truth) {
      // Anisotropic resampling changes angles; the truth geometry is only
      // kept where it maps exactly.
      if (s.truth->box) {
        s.truth->box->center = map(s.truth->box->center);
        s.truth->box->size = {s.truth->box->size.x() * fx, s.truth->box->size.y() * fy};
      }
      s.truth->space.reset();
      if (fx != fy) s.truth->theta = std::atan2(fy * std::sin(s.truth->theta), fx * std::cos(s.truth->theta));
    }
  }
  return s;
}

std::vector<Sample> load_samples(const DatasetManifest& manifest, int jobs) {
  std::vector<Sample> out(manifest.entries.size());
  parallel_for(out.size(), jobs, [&](std::size_t i) { out[i] = load_sample(manifest, i); });
  return out;
}

}  // namespace shapeseg::data

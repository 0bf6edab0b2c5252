#include "shapeseg/shape/io.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/json_io.hpp"

namespace shapeseg::shape {
namespace {

template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed ") + what + ": " + e.what());
  }
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json shape_model_to_json(const ShapeModel& model) {
  model.validate();
  std::vector<double> vecs(model.eigvecs.data(), model.eigvecs.data() + model.eigvecs.size());
  return {{"version", kShapeModelFormatVersion},
          {"M", model.landmark_count()},
          {"sides", model.sides},
          {"mean", to_vector(model.mean)},
          {"eigvecs", std::move(vecs)},
          {"eigvals", to_vector(model.eigvals)},
          {"energy_fraction", model.energy_fraction},
          {"group_id", model.group_id}};
}

ShapeModel shape_model_from_json(const nlohmann::json& doc) {
  return guarded("shape model", [&] {
    if (doc.at("version").get<int>() != kShapeModelFormatVersion) throw DataError("unsupported shape model version");
    ShapeModel m;
    m.mean = to_eigen(doc.at("mean").get<std::vector<double>>());
    if (doc.at("M").get<Eigen::Index>() * 2 != m.mean.size()) throw DataError("shape model M does not match mean");
    m.sides = doc.value("sides", 1);
    m.eigvals = to_eigen(doc.at("eigvals").get<std::vector<double>>());
    const auto vecs = doc.at("eigvecs").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(vecs.size()) != m.mean.size() * m.eigvals.size()) {
      throw DataError("shape model eigvecs have wrong size");
    }
    m.eigvecs = Eigen::Map<const Eigen::MatrixXd>(vecs.data(), m.mean.size(), m.eigvals.size());
    m.energy_fraction = doc.at("energy_fraction").get<double>();
    m.group_id = doc.at("group_id").get<int>();
    m.validate();
    return m;
  });
}

void save_shape_model(const std::filesystem::path& path, const ShapeModel& model) {
  write_json_file(path, shape_model_to_json(model), -1);
}

ShapeModel load_shape_model(const std::filesystem::path& path) { return shape_model_from_json(read_json_file(path)); }

nlohmann::json points_to_json(std::span<const Point> points) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : points) arr.push_back({p.x(), p.y()});
  return arr;
}

std::vector<Point> points_from_json(const nlohmann::json& doc) {
  std::vector<Point> out;
  for (const auto& p : doc) {
    if (p.size() != 2) throw DataError("points must be [x, y] pairs");
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

nlohmann::json landmarks_to_json(const LandmarkRecord& r) {
  nlohmann::json doc = {{"image_path", r.image_path},
                        {"primary", points_to_json(r.primary)},
                        {"landmarks", points_to_json(r.landmarks.points())},
                        {"sides", r.landmarks.sides()}};
  if (r.group) doc["group"] = *r.group;
  return doc;
}

LandmarkRecord landmarks_from_json(const nlohmann::json& doc) {
  return guarded("landmark file", [&] {
    LandmarkRecord r;
    r.image_path = doc.at("image_path").get<std::string>();
    if (doc.contains("group") && !doc.at("group").is_null()) r.group = doc.at("group").get<int>();
    if (doc.contains("primary")) r.primary = points_from_json(doc.at("primary"));
    const auto pts = points_from_json(doc.at("landmarks"));
    if (pts.empty()) throw DataError("landmark file has no landmarks");
    r.landmarks = Shape::from_points(pts, doc.value("sides", 1));
    return r;
  });
}

void save_landmarks(const std::filesystem::path& path, const LandmarkRecord& record) {
  write_json_file(path, landmarks_to_json(record));
}

LandmarkRecord load_landmarks(const std::filesystem::path& path) { return landmarks_from_json(read_json_file(path)); }

nlohmann::json space_params_to_json(const SpaceParams& sp) {
  return {{"T", {sp.translation.x(), sp.translation.y()}},
          {"theta", sp.theta},
          {"S", {sp.scale.x(), sp.scale.y()}}};
}

SpaceParams space_params_from_json(const nlohmann::json& doc) {
  return guarded("space parameters", [&] {
    SpaceParams sp;
    sp.translation = {doc.at("T").at(0).get<double>(), doc.at("T").at(1).get<double>()};
    sp.theta = doc.at("theta").get<double>();
    sp.scale = {doc.at("S").at(0).get<double>(), doc.at("S").at(1).get<double>()};
    return sp;
  });
}

nlohmann::json box_to_json(const Box& box) {
  return {{"T", {box.center.x(), box.center.y()}}, {"S", {box.size.x(), box.size.y()}}};
}

Box box_from_json(const nlohmann::json& doc) {
  return guarded("box", [&] {
    Box b;
    b.center = {doc.at("T").at(0).get<double>(), doc.at("T").at(1).get<double>()};
    b.size = {doc.at("S").at(0).get<double>(), doc.at("S").at(1).get<double>()};
    return b;
  });
}

nlohmann::json group_split_to_json(const GroupSplit& s) {
  return {{"threshold", s.threshold}, {"assignments", s.assignments}, {"fitted", s.fitted},
          {"means", s.means},         {"stddevs", s.stddevs},         {"weights", s.weights}};
}

GroupSplit group_split_from_json(const nlohmann::json& doc) {
  return guarded("group split", [&] {
    GroupSplit s;
    s.threshold = doc.at("threshold").get<double>();
    s.assignments = doc.value("assignments", std::vector<int>{});
    s.fitted = doc.value("fitted", false);
    if (doc.contains("means")) s.means = doc.at("means").get<std::array<double, 2>>();
    if (doc.contains("stddevs")) s.stddevs = doc.at("stddevs").get<std::array<double, 2>>();
    if (doc.contains("weights")) s.weights = doc.at("weights").get<std::array<double, 2>>();
    return s;
  });
}

}  // namespace shapeseg::shape

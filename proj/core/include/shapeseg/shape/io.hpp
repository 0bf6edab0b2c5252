#pragma once

#include "shapeseg/shape/groups.hpp"
#include "shapeseg/shape/shape.hpp"
#include "shapeseg/shape/ssm.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace shapeseg::shape {

inline constexpr int kShapeModelFormatVersion = 1;

/// {version, M, sides, mean, eigvecs (column-major), eigvals, energy_fraction, group_id}
nlohmann::json shape_model_to_json(const ShapeModel& model);
ShapeModel shape_model_from_json(const nlohmann::json& doc);
void save_shape_model(const std::filesystem::path& path, const ShapeModel& model);
ShapeModel load_shape_model(const std::filesystem::path& path);

/// Per-image landmark annotation. Coordinates are pixels, origin at the
/// top-left pixel center, x to the right and y downward.
struct LandmarkRecord {
  std::string image_path;
  std::optional<int> group;
  std::vector<Point> primary;
  Shape landmarks;
};

nlohmann::json landmarks_to_json(const LandmarkRecord& record);
LandmarkRecord landmarks_from_json(const nlohmann::json& doc);
void save_landmarks(const std::filesystem::path& path, const LandmarkRecord& record);
LandmarkRecord load_landmarks(const std::filesystem::path& path);

nlohmann::json points_to_json(std::span<const Point> points);
std::vector<Point> points_from_json(const nlohmann::json& doc);

nlohmann::json space_params_to_json(const SpaceParams& sp);
SpaceParams space_params_from_json(const nlohmann::json& doc);
nlohmann::json box_to_json(const Box& box);
Box box_from_json(const nlohmann::json& doc);

nlohmann::json group_split_to_json(const GroupSplit& split);
GroupSplit group_split_from_json(const nlohmann::json& doc);

}  // namespace shapeseg::shape

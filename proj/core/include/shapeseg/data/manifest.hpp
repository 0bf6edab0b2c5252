#pragma once

#include "shapeseg/data/image.hpp"
#include "shapeseg/shape/io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace shapeseg::data {

struct ManifestEntry {
  std::filesystem::path image_path;
  std::optional<std::filesystem::path> landmark_path;
  std::optional<std::filesystem::path> truth_path;
  std::optional<int> group;
  std::optional<Eigen::Vector2d> spacing;

  /// File stem of the image; used to match predictions with ground truth.
  std::string id() const { return image_path.stem().string(); }
};

/// Dataset listing. Relative paths are resolved against the manifest's
/// directory when loaded.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::optional<std::pair<int, int>> target_dims;  // (width, height)
  int bit_depth = 12;
  std::uint64_t seed = 0;
  std::filesystem::path base_dir;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
nlohmann::json manifest_to_json(const DatasetManifest& manifest);

/// Optional ground truth written next to synthetic images.
struct TruthRecord {
  double theta = 0.0;
  std::optional<int> group;
  std::optional<shape::SpaceParams> space;
  std::optional<shape::Box> box;
  std::vector<double> weights;
  std::string model_ref;
};

TruthRecord load_truth(const std::filesystem::path& path);

struct Sample {
  std::string id;
  GrayImage image;
  std::optional<shape::Shape> landmarks;
  std::optional<TruthRecord> truth;
  std::optional<int> group;
};

/// Loads, normalizes and (when target_dims differ) resamples the image,
/// mapping landmarks and truth geometry onto the resampled grid.
Sample load_sample(const DatasetManifest& manifest, std::size_t index);

std::vector<Sample> load_samples(const DatasetManifest& manifest, int jobs = 1);

}  // namespace shapeseg::data

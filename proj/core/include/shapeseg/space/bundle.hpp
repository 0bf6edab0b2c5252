#pragma once

#include "shapeseg/space/estimate.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace shapeseg::space {

/// Writes line_1.json .. line_4.json, orientation.json and manifest.json
/// {version, r, top_n, step, range, image_dims, normalization, ...}.
/// `provenance` (typically the effective run config) is copied into the
/// manifest verbatim.
void save_space_bundle(const std::filesystem::path& dir, const SpaceDetectorSet& set,
                       const nlohmann::json& provenance = nullptr);

SpaceDetectorSet load_space_bundle(const std::filesystem::path& dir);

}  // namespace shapeseg::space

#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>

namespace shapeseg {

/// Reads and parses a JSON document; throws DataError naming the path.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Writes `doc` with a trailing newline. indent < 0 writes compact JSON.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc, int indent = 2);

}  // namespace shapeseg

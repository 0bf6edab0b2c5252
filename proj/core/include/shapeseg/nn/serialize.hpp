#pragma once

#include "shapeseg/nn/network.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace shapeseg::nn {

inline constexpr int kNetworkFormatVersion = 1;

/// {version, layer_dims, weights, biases, activation, train_config, seed}.
/// Weight matrices are stored as flat row-major arrays. Doubles are written
/// in shortest round-trip form, so load(save(m)) is bit-identical.
nlohmann::json network_to_json(const NetworkModel& model);
NetworkModel network_from_json(const nlohmann::json& doc);

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& doc);

void save_network(const std::filesystem::path& path, const NetworkModel& model);
NetworkModel load_network(const std::filesystem::path& path);

}  // namespace shapeseg::nn

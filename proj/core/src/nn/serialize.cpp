#include "shapeseg/nn/serialize.hpp"

#include "shapeseg/common/error.hpp"
#include "shapeseg/common/json_io.hpp"

#include <string>

namespace shapeseg::nn {

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"corruption_rate", cfg.corruption_rate},
          {"seed", cfg.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& doc) {
  TrainConfig cfg;
  cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
  cfg.batch_size = doc.value("batch_size", cfg.batch_size);
  cfg.epochs = doc.value("epochs", cfg.epochs);
  cfg.corruption_rate = doc.value("corruption_rate", cfg.corruption_rate);
  cfg.seed = doc.value("seed", cfg.seed);
  return cfg;
}

nlohmann::json network_to_json(const NetworkModel& model) {
  model.validate();
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const auto& w = model.weights[l];
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    weights.push_back(std::move(flat));
    const auto& b = model.biases[l];
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  return {{"version", kNetworkFormatVersion},
          {"layer_dims", model.layer_dims},
          {"weights", std::move(weights)},
          {"biases", std::move(biases)},
          {"activation", "sigmoid"},
          {"train_config", train_config_to_json(model.train_config)},
          {"seed", model.seed}};
}

NetworkModel network_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != kNetworkFormatVersion) {
      throw DataError("unsupported network format version " + doc.at("version").dump());
    }
    if (doc.at("activation").get<std::string>() != "sigmoid") throw DataError("only sigmoid networks are supported");
    NetworkModel model;
    model.layer_dims = doc.at("layer_dims").get<std::vector<Eigen::Index>>();
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.train_config = train_config_from_json(doc.at("train_config"));
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (model.layer_dims.size() < 2 || weights.size() != model.layer_dims.size() - 1 ||
        biases.size() != weights.size()) {
      throw DataError("network document has inconsistent layer counts");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const auto flat = weights[l].get<std::vector<double>>();
      const Eigen::Index rows = model.layer_dims[l + 1];
      const Eigen::Index cols = model.layer_dims[l];
      if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
        throw DataError("weight array " + std::to_string(l) + " has wrong size");
      }
      model.weights.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          flat.data(), rows, cols));
      const auto b = biases[l].get<std::vector<double>>();
      model.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed network document: ") + e.what());
  }
}

void save_network(const std::filesystem::path& path, const NetworkModel& model) {
  write_json_file(path, network_to_json(model), -1);
}

NetworkModel load_network(const std::filesystem::path& path) { return network_from_json(read_json_file(path)); }

}  // namespace shapeseg::nn

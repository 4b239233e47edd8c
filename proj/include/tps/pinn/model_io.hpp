#pragma once

#include <string>

#include <json.hpp>

#include "tps/pinn/network.hpp"

namespace tps::pinn {

inline constexpr int kModelFormatVersion = 1;

/// Trained surrogate with the scenario it was trained for.
struct NetworkModel {
  NetworkParameters params;
  NormalizationSpec norm;
  ThermalScenario scenario;
};

nlohmann::json model_to_json(const NetworkModel& model);
/// Strict: unknown keys, shape mismatches and other versions are ConfigErrors.
NetworkModel model_from_json(const nlohmann::json& doc);

void save_model(const std::string& path, const NetworkModel& model);
NetworkModel load_model(const std::string& path);

}  // namespace tps::pinn

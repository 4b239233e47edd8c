#include "tps/pinn/model_io.hpp"

#include <array>
#include <vector>

#include "tps/error.hpp"
#include "tps/io/json_reader.hpp"

namespace tps::pinn {

namespace {

constexpr std::array<const char*, kInputDim> kInputNames{"x", "t", "rho", "k", "cp"};

}  // namespace

nlohmann::json model_to_json(const NetworkModel& model) {
  using io::Json;
  const NetworkParameters& p = model.params;
  Json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["architecture"] = {{"input_dim", kInputDim},
                         {"hidden", p.architecture().hidden},
                         {"activation", "tanh"},
                         {"output_dim", 1}};
  Json ranges = Json::object();
  for (std::size_t i = 0; i < kInputDim; ++i) {
    ranges[kInputNames[i]] = {model.norm.inputs[i].lo, model.norm.inputs[i].hi};
  }
  doc["normalization"] = {{"inputs", ranges},
                          {"initial_temp", model.norm.initial_temp},
                          {"temp_scale", model.norm.temp_scale}};
  const ThermalScenario& s = model.scenario;
  doc["scenario"] = {{"thickness", s.thickness},     {"heat_flux", s.heat_flux}, {"duration", s.duration},
                     {"initial_temp", s.initial_temp}, {"threshold", s.threshold}, {"eval_time", s.eval_time}};
  Json layers = Json::array();
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    const LayerShape& shape = p.layer(l);
    const double* w = p.flat().data() + shape.weight_offset;
    const double* b = p.flat().data() + shape.bias_offset;
    layers.push_back({{"rows", shape.rows},
                      {"cols", shape.cols},
                      {"weights", std::vector<double>(w, w + shape.rows * shape.cols)},
                      {"bias", std::vector<double>(b, b + shape.rows)}});
  }
  doc["layers"] = layers;
  return doc;
}

NetworkModel model_from_json(const nlohmann::json& doc) {
  io::ObjectReader root(doc, "");
  const int version = root.require<int>("format_version");
  if (version != kModelFormatVersion) {
    throw ConfigError("format_version: unsupported model format " + std::to_string(version));
  }

  NetworkArchitecture arch;
  {
    io::ObjectReader a = root.child("architecture");
    if (a.require<std::size_t>("input_dim") != kInputDim) throw ConfigError("architecture.input_dim: must be 5");
    arch.hidden = a.require<std::vector<int>>("hidden");
    if (a.require<std::string>("activation") != "tanh") throw ConfigError("architecture.activation: must be tanh");
    if (a.require<int>("output_dim") != 1) throw ConfigError("architecture.output_dim: must be 1");
    a.finish();
    try {
      arch.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("architecture.hidden: ") + e.what());
    }
  }

  NormalizationSpec norm;
  {
    io::ObjectReader n = root.child("normalization");
    io::ObjectReader in = n.child("inputs");
    for (std::size_t i = 0; i < kInputDim; ++i) {
      const auto r = in.require<std::vector<double>>(kInputNames[i]);
      if (r.size() != 2) throw ConfigError(in.path_of(kInputNames[i]) + ": expected [lo, hi]");
      norm.inputs[i] = {r[0], r[1]};
    }
    in.finish();
    norm.initial_temp = n.require<double>("initial_temp");
    norm.temp_scale = n.require<double>("temp_scale");
    n.finish();
    try {
      norm.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("normalization: ") + e.what());
    }
  }

  ThermalScenario scenario;
  {
    io::ObjectReader s = root.child("scenario");
    scenario.thickness = s.require<double>("thickness");
    scenario.heat_flux = s.require<double>("heat_flux");
    scenario.duration = s.require<double>("duration");
    scenario.initial_temp = s.require<double>("initial_temp");
    scenario.threshold = s.require<double>("threshold");
    scenario.eval_time = s.require<double>("eval_time");
    s.finish();
  }

  NetworkParameters params(arch);
  const io::Json* layers = root.raw("layers");
  if (layers == nullptr || !layers->is_array()) throw ConfigError("layers: expected an array");
  if (layers->size() != params.layer_count()) {
    throw ConfigError("layers: expected " + std::to_string(params.layer_count()) + " layers");
  }
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    const std::string path = "layers[" + std::to_string(l) + "]";
    io::ObjectReader lr((*layers)[l], path);
    const LayerShape& shape = params.layer(l);
    if (lr.require<Eigen::Index>("rows") != shape.rows || lr.require<Eigen::Index>("cols") != shape.cols) {
      throw ConfigError(path + ": shape does not match the architecture");
    }
    const auto w = lr.require<std::vector<double>>("weights");
    const auto b = lr.require<std::vector<double>>("bias");
    lr.finish();
    if (static_cast<Eigen::Index>(w.size()) != shape.rows * shape.cols) {
      throw ConfigError(path + ".weights: expected " + std::to_string(shape.rows * shape.cols) + " entries");
    }
    if (static_cast<Eigen::Index>(b.size()) != shape.rows) {
      throw ConfigError(path + ".bias: expected " + std::to_string(shape.rows) + " entries");
    }
    std::copy(w.begin(), w.end(), params.flat().data() + shape.weight_offset);
    std::copy(b.begin(), b.end(), params.flat().data() + shape.bias_offset);
  }
  root.finish();
  if (!params.all_finite()) throw ConfigError("layers: non-finite parameter");
  return {std::move(params), norm, scenario};
}

void save_model(const std::string& path, const NetworkModel& model) { io::write_json_file(path, model_to_json(model)); }

NetworkModel load_model(const std::string& path) { return model_from_json(io::read_json_file(path)); }

}  // namespace tps::pinn

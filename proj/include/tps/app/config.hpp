#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "tps/pinn/loss.hpp"
#include "tps/pinn/network.hpp"
#include "tps/pinn/train.hpp"
#include "tps/thermal/types.hpp"
#include "tps/uq/mcmc.hpp"
#include "tps/uq/posterior.hpp"
#include "tps/uq/smc.hpp"

namespace tps::app {

struct NetworkConfig {
  pinn::NetworkArchitecture architecture{};
  double temp_scale{2000.0};
  /// Parameter boxes; absent ranges default to the prior mean +- 3 std.
  std::optional<pinn::Range> rho, k, cp;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

enum class SamplerMethod { mh, smc };

struct SamplerConfig {
  SamplerMethod method{SamplerMethod::mh};
  uq::MhSettings mh{};
  std::optional<uq::ParamVector> proposal_std;
  uq::SmcSettings smc{};
  std::size_t max_fd{200};  ///< cross-verification subsample
  bool flat_prior{false};

  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

struct LikelihoodConfig {
  double sigma{10.0};
  double reliability{0.95};

  friend bool operator==(const LikelihoodConfig&, const LikelihoodConfig&) = default;
};

struct RunConfig {
  thermal::ThermalScenario scenario{};
  thermal::GridSpec grid{};
  uq::PriorSpec prior{};
  LikelihoodConfig likelihood{};
  NetworkConfig network{};
  pinn::LossWeights loss_weights{};
  pinn::TrainingConfig training{};
  SamplerConfig sampler{};
  std::uint64_t seed{1234};
  std::size_t threads{1};

  /// Throws ConfigError naming the offending field path.
  void validate() const;

  pinn::NormalizationSpec normalization() const;
  uq::LikelihoodSpec likelihood_spec() const;
  uq::PriorSpec prior_spec() const;  ///< honours sampler.flat_prior

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Training defaults sized for a single-core desk budget.
pinn::TrainingConfig default_training();

RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::string& path);

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace tps::app

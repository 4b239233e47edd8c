#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tps/uq/posterior.hpp"

namespace tps::uq {

struct MhSettings {
  std::size_t n_samples{20000};  ///< retained after burn-in
  std::size_t burn_in{5000};
  /// During burn-in, every `tune_every` steps all proposal std are doubled when
  /// the window acceptance is above 0.5 and halved when below 0.2.
  std::size_t tune_every{500};
  bool tune{true};

  void validate() const;

  friend bool operator==(const MhSettings&, const MhSettings&) = default;
};

/// Log-density of a state; may write an auxiliary value carried with the state.
using LogTarget = std::function<double(std::span<const double> x, double& aux)>;

struct RandomWalkResult {
  std::vector<double> samples;  ///< row-major, n_samples x dim
  std::vector<double> log_density;
  std::vector<double> aux;
  std::size_t dim{};
  double acceptance_rate{};        ///< over retained steps
  std::vector<double> proposal_std;  ///< after tuning
};

/// Random-walk Metropolis with independent Gaussian proposals per coordinate.
/// Throws InvalidInput if the initial state has -inf density or a proposal
/// std is not positive.
RandomWalkResult metropolis_random_walk(const LogTarget& target, std::vector<double> init,
                                        std::vector<double> proposal_std, const MhSettings& settings,
                                        std::uint64_t seed);

struct ChainSample {
  MaterialProperties q;
  double log_posterior{};
  double interface_temp{};
};

struct Chain {
  std::vector<ChainSample> samples;
  double acceptance_rate{};
  ParamVector proposal_std{};
  std::uint64_t seed{};
  std::size_t burn_in{};
};

/// Default starting scale: a tenth of each prior std.
ParamVector default_proposal_std(const PriorSpec& prior);

Chain mh_sample(const PosteriorEvaluator& evaluator, const MaterialProperties& init, const ParamVector& proposal_std,
                const MhSettings& settings, std::uint64_t seed);

}  // namespace tps::uq

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tps/uq/posterior.hpp"

namespace tps::uq {

struct SmcSettings {
  std::size_t n_particles{1000};
  double ess_fraction{0.5};  ///< tempering target ESS as a fraction of N
  std::size_t move_steps{3};
  std::size_t max_stages{500};

  void validate() const;

  friend bool operator==(const SmcSettings&, const SmcSettings&) = default;
};

struct ParticleEnsemble {
  std::vector<MaterialProperties> particles;
  std::vector<double> weights;          ///< normalized
  std::vector<double> log_likelihood;   ///< untempered
  std::vector<double> interface_temp;
  double beta{};
  std::vector<double> betas;            ///< exponent after each stage
  std::vector<double> ess_history;      ///< ESS after each reweighting, before resampling
  std::size_t resample_count{};
  double move_acceptance{};             ///< over all move steps
  std::uint64_t seed{};
};

/// Likelihood-tempered SMC from the prior. Each stage picks the next exponent
/// by bisection so the reweighted ESS hits ess_fraction * N (or jumps to 1 if
/// it can), resamples systematically, then applies `move_steps` random-walk
/// moves with the weighted particle covariance scaled by 2.38^2 / d. Model
/// calls are batched over the ensemble. Throws NumericalError when the
/// ensemble collapses to a single distinct particle.
ParticleEnsemble smc_sample(const PosteriorEvaluator& evaluator, const SmcSettings& settings, std::uint64_t seed);

/// Weighted mean per parameter.
ParamVector ensemble_mean(const ParticleEnsemble& ensemble);

}  // namespace tps::uq

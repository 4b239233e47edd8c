#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tps/uq/posterior.hpp"

namespace tps::uq {

struct ReliabilityReport {
  std::size_t n{};     ///< samples evaluated
  std::size_t n_ok{};  ///< strictly below the threshold
  double r_hat{};      ///< percent
  std::string model;
  std::vector<double> temperatures;
  std::size_t population{};  ///< samples offered; > n when subsampled
  bool subsampled{false};
  std::vector<std::size_t> indices;  ///< positions of the evaluated samples in the input
};

/// 100 * #(T < threshold) / N; InvalidInput when empty.
ReliabilityReport reliability_of_temperatures(std::span<const double> temperatures, double threshold,
                                              std::string model_name);

ReliabilityReport reliability(std::span<const MaterialProperties> samples, const InterfaceModel& model,
                              double threshold);

/// Reliability with the finite-difference model. When more than `max_fd`
/// samples are given a seeded uniform subsample (without replacement) of
/// size `max_fd` is evaluated instead.
ReliabilityReport cross_verify(std::span<const MaterialProperties> samples, const thermal::ThermalScenario& scenario,
                               const thermal::GridSpec& grid, double threshold, std::size_t max_fd,
                               std::uint64_t seed);

}  // namespace tps::uq

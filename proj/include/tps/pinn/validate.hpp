#pragma once

#include <vector>

#include "tps/pinn/network.hpp"
#include "tps/thermal/types.hpp"

namespace tps::pinn {

struct SampleValidation {
  MaterialProperties props;
  double max_abs_error{};  ///< over the space-time probe lattice [K]
  double worst_x{};
  double worst_t{};
  double poi_error{};      ///< |T_hat - T_fd| at x = 0, t = t_eval [K]
  double poi_surrogate{};
  double poi_reference{};
  bool clamped{false};     ///< properties fell outside the normalization box
};

struct ValidationReport {
  std::vector<SampleValidation> samples;
  double max_abs_error{};  ///< worst lattice error over all samples
  double max_poi_error{};
  double mean_poi_error{};
  std::size_t lattice{};   ///< probes per axis
};

/// Compares the surrogate against solve_fd for each property sample on a
/// lattice x lattice grid covering [0, L] x [0, t_end] (the finite-difference
/// field is interpolated linearly between its nodes and steps). Reports only;
/// large errors are not an error condition.
ValidationReport validate_against_fd(const NetworkParameters& params, const NormalizationSpec& norm,
                                     const ThermalScenario& scenario, const std::vector<MaterialProperties>& samples,
                                     const thermal::GridSpec& grid, std::size_t lattice = 51);

}  // namespace tps::pinn

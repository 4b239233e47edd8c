#include "tps/pinn/validate.hpp"

#include <algorithm>
#include <cmath>

#include "tps/error.hpp"
#include "tps/thermal/solver.hpp"

namespace tps::pinn {

ValidationReport validate_against_fd(const NetworkParameters& params, const NormalizationSpec& norm,
                                     const ThermalScenario& scenario, const std::vector<MaterialProperties>& samples,
                                     const thermal::GridSpec& grid, std::size_t lattice) {
  if (lattice < 2) throw InvalidInput("validation lattice needs at least 2 probes per axis");
  ValidationReport report;
  report.lattice = lattice;

  const double step = 1.0 / static_cast<double>(lattice - 1);
  std::vector<QueryPoint> probes;
  probes.reserve(lattice * lattice);

  for (const MaterialProperties& q : samples) {
    const thermal::TemperatureField field = thermal::solve_fd(scenario, q, grid);
    probes.clear();
    for (std::size_t i = 0; i < lattice; ++i) {
      for (std::size_t j = 0; j < lattice; ++j) {
        probes.push_back({scenario.thickness * static_cast<double>(i) * step,
                          scenario.duration * static_cast<double>(j) * step, q});
      }
    }
    std::size_t clamped = 0;
    const std::vector<double> predicted = predict_batch(params, norm, probes, &clamped);

    SampleValidation sv;
    sv.props = q;
    sv.clamped = clamped > 0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const double err = std::abs(predicted[p] - field.sample(probes[p].x, probes[p].t));
      if (err > sv.max_abs_error || p == 0) {
        sv.max_abs_error = err;
        sv.worst_x = probes[p].x;
        sv.worst_t = probes[p].t;
      }
    }
    sv.poi_reference = field.at(0, field.nearest_step(scenario.eval_time));
    sv.poi_surrogate = forward(params, norm, 0.0, scenario.eval_time, q);
    sv.poi_error = std::abs(sv.poi_surrogate - sv.poi_reference);

    report.max_abs_error = std::max(report.max_abs_error, sv.max_abs_error);
    report.max_poi_error = std::max(report.max_poi_error, sv.poi_error);
    report.mean_poi_error += sv.poi_error;
    report.samples.push_back(sv);
  }
  if (!samples.empty()) report.mean_poi_error /= static_cast<double>(samples.size());
  return report;
}

}  // namespace tps::pinn

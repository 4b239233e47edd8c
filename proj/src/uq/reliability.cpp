#include "tps/uq/reliability.hpp"

#include <algorithm>
#include <numeric>

#include "tps/error.hpp"
#include "tps/rng.hpp"

namespace tps::uq {

ReliabilityReport reliability_of_temperatures(std::span<const double> temperatures, double threshold,
                                              std::string model_name) {
  if (temperatures.empty()) throw InvalidInput("reliability needs at least one sample");
  ReliabilityReport r;
  r.model = std::move(model_name);
  r.n = temperatures.size();
  r.population = r.n;
  r.temperatures.assign(temperatures.begin(), temperatures.end());
  r.n_ok = static_cast<std::size_t>(
      std::count_if(temperatures.begin(), temperatures.end(), [threshold](double t) { return t < threshold; }));
  r.r_hat = 100.0 * static_cast<double>(r.n_ok) / static_cast<double>(r.n);
  return r;
}

ReliabilityReport reliability(std::span<const MaterialProperties> samples, const InterfaceModel& model,
                              double threshold) {
  if (samples.empty()) throw InvalidInput("reliability needs at least one sample");
  const std::vector<double> temps = model.predict_batch(samples);
  return reliability_of_temperatures(temps, threshold, model.name());
}

ReliabilityReport cross_verify(std::span<const MaterialProperties> samples, const thermal::ThermalScenario& scenario,
                               const thermal::GridSpec& grid, double threshold, std::size_t max_fd,
                               std::uint64_t seed) {
  if (samples.empty()) throw InvalidInput("cross verification needs at least one sample");
  if (max_fd == 0) throw InvalidInput("max_fd must be > 0");
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (samples.size() > max_fd) {
    // partial Fisher-Yates, sorted afterwards so the order follows the input
    Rng rng(seed);
    for (std::size_t i = 0; i < max_fd; ++i) {
      const std::size_t j = i + rng.below(idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(max_fd);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<MaterialProperties> chosen;
  chosen.reserve(idx.size());
  for (std::size_t i : idx) chosen.push_back(samples[i]);
  const FdModel model(scenario, grid);
  ReliabilityReport r = reliability(chosen, model, threshold);
  r.population = samples.size();
  r.subsampled = chosen.size() < samples.size();
  r.indices = std::move(idx);
  return r;
}

}  // namespace tps::uq

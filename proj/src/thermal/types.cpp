#include "tps/thermal/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tps/error.hpp"

namespace tps::thermal {

namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InvalidInput(std::string(name) + " must be finite and > 0, got " + std::to_string(v));
  }
}

}  // namespace

void MaterialProperties::validate() const {
  require_positive(rho, "rho");
  require_positive(k, "k");
  require_positive(cp, "cp");
  if (!std::isfinite(alpha()) || alpha() <= 0.0) throw InvalidInput("diffusivity k/(rho cp) is not finite");
}

void ThermalScenario::validate() const {
  require_positive(thickness, "thickness");
  require_positive(duration, "duration");
  require_positive(eval_time, "eval_time");
  if (eval_time > duration) throw InvalidInput("eval_time must not exceed duration");
  if (!std::isfinite(heat_flux) || heat_flux < 0.0) throw InvalidInput("heat_flux must be finite and >= 0");
  if (!std::isfinite(initial_temp)) throw InvalidInput("initial_temp must be finite");
  if (!std::isfinite(threshold)) throw InvalidInput("threshold must be finite");
}

void GridSpec::validate() const {
  if (nx < 3) throw InvalidInput("nx must be >= 3");
  require_positive(dt, "dt");
}

std::size_t GridSpec::steps_for(double duration) const {
  const double ratio = duration / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio)) {
    throw InvalidInput("dt = " + std::to_string(dt) + " does not divide the duration " + std::to_string(duration));
  }
  return static_cast<std::size_t>(rounded);
}

TemperatureField::TemperatureField(ThermalScenario scenario, GridSpec grid, std::size_t steps)
    : scenario_(scenario), grid_(grid), steps_(steps), values_(grid.nx * (steps + 1), scenario.initial_temp) {}

std::size_t TemperatureField::nearest_step(double t) const {
  const double n = std::round(t / grid_.dt);
  if (n <= 0.0) return 0;
  return std::min(steps_, static_cast<std::size_t>(n));
}

double TemperatureField::sample(double x, double t) const {
  const double fx = std::clamp(x / dx(), 0.0, static_cast<double>(grid_.nx - 1));
  const double ft = std::clamp(t / grid_.dt, 0.0, static_cast<double>(steps_));
  const auto i0 = std::min(static_cast<std::size_t>(fx), grid_.nx - 2);
  const auto n0 = std::min(static_cast<std::size_t>(ft), steps_ == 0 ? 0 : steps_ - 1);
  const double wx = fx - static_cast<double>(i0);
  if (steps_ == 0) return (1.0 - wx) * at(i0, 0) + wx * at(i0 + 1, 0);
  const double wt = ft - static_cast<double>(n0);
  const double lo = (1.0 - wx) * at(i0, n0) + wx * at(i0 + 1, n0);
  const double hi = (1.0 - wx) * at(i0, n0 + 1) + wx * at(i0 + 1, n0 + 1);
  return (1.0 - wt) * lo + wt * hi;
}

}  // namespace tps::thermal

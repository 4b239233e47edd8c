#pragma once

#include <cstddef>
#include <vector>

namespace tps::thermal {

/// One material sample q = (rho, k, cp), SI units.
struct MaterialProperties {
  double rho{200.0};  ///< mass density [kg/m^3]
  double k{1.0};      ///< thermal conductivity [W/(m K)]
  double cp{800.0};   ///< specific heat capacity [J/(kg K)]

  /// Thermal diffusivity k / (rho cp) [m^2/s].
  double alpha() const { return k / (rho * cp); }

  /// Throws InvalidInput unless every field is finite and positive.
  void validate() const;

  friend bool operator==(const MaterialProperties&, const MaterialProperties&) = default;
};

/// Film geometry and loading. Temperatures are carried in degrees Celsius.
///
/// Node 0 / x = 0 is the adiabatic film-substrate interface; x = L is the
/// outer surface receiving the constant heat flux for the whole duration.
struct ThermalScenario {
  double thickness{0.05};      ///< L [m]
  double heat_flux{40000.0};   ///< q_s [W/m^2]
  double duration{200.0};      ///< t_end [s]
  double initial_temp{25.0};   ///< T0 [C]
  double threshold{450.0};     ///< T_th [C]
  double eval_time{150.0};     ///< t_eval [s]

  void validate() const;

  friend bool operator==(const ThermalScenario&, const ThermalScenario&) = default;
};

struct GridSpec {
  std::size_t nx{201};  ///< spatial node count
  double dt{0.05};      ///< time step [s]

  void validate() const;
  /// Number of time steps covering [0, duration]; throws if dt does not divide duration.
  std::size_t steps_for(double duration) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// T[i][n] on a uniform grid; row-major by time step.
class TemperatureField {
 public:
  TemperatureField(ThermalScenario scenario, GridSpec grid, std::size_t steps);

  const ThermalScenario& scenario() const { return scenario_; }
  const GridSpec& grid() const { return grid_; }
  std::size_t nodes() const { return grid_.nx; }
  std::size_t steps() const { return steps_; }  ///< nt; times are n * dt for n in [0, nt]

  double dx() const { return scenario_.thickness / static_cast<double>(grid_.nx - 1); }
  double x(std::size_t i) const { return static_cast<double>(i) * dx(); }
  double time(std::size_t n) const { return static_cast<double>(n) * grid_.dt; }

  double at(std::size_t i, std::size_t n) const { return values_[n * grid_.nx + i]; }
  double& at(std::size_t i, std::size_t n) { return values_[n * grid_.nx + i]; }

  /// Nearest time step to t, clamped to the stored range.
  std::size_t nearest_step(double t) const;

  /// Linear interpolation in space and time.
  double sample(double x, double t) const;

  const std::vector<double>& values() const { return values_; }

 private:
  ThermalScenario scenario_;
  GridSpec grid_;
  std::size_t steps_;
  std::vector<double> values_;
};

}  // namespace tps::thermal

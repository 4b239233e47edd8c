#pragma once

#include <utility>
#include <vector>

#include "tps/thermal/types.hpp"

namespace tps::thermal {

/// Crank-Nicolson finite-difference solution of dT/dt = alpha d2T/dx2 on [0, L]
/// with ghost-node Neumann conditions: dT/dx = 0 at x = 0, k dT/dx = q_s at x = L.
///
/// The first step is resolved with finer sub-steps, the leading one taken as two
/// implicit-Euler halves (Rannacher start-up). This damps the high-frequency
/// content created by switching the flux on against a uniform initial state.
TemperatureField solve_fd(const ThermalScenario& scenario, const MaterialProperties& props, const GridSpec& grid);

/// Same scheme, marching only to `t_stop` and returning the interface (node 0)
/// temperature there. No field is stored.
double interface_temperature_at(const ThermalScenario& scenario, const MaterialProperties& props,
                                const GridSpec& grid, double t_stop);

struct InterfaceSeries {
  std::vector<std::pair<double, double>> points;  ///< (t, T) at node 0
  double max_temp{};
  double at_eval{};  ///< value at the step nearest t_eval
};

InterfaceSeries interface_series(const TemperatureField& field);

/// |rho cp int (T(.,t) - T0) dx - q_s t| / max(q_s t, eps), trapezoidal in x and
/// linear in t between stored steps. With q_s = 0 the absolute residual
/// rho cp int (T - T0) dx [J/m^2] is returned instead.
double enthalpy_balance(const TemperatureField& field, const MaterialProperties& props,
                        const ThermalScenario& scenario, double t);

/// Starting from `initial`, doubles the interval count and halves dt until the
/// interface temperature at t_eval moves by less than `target_tol` [K] under one
/// more refinement; returns the coarser grid of that converged pair.
/// Throws NumericalError once nx would exceed `max_nodes`.
GridSpec refine_until(const ThermalScenario& scenario, const MaterialProperties& props, double target_tol,
                      const GridSpec& initial = GridSpec{}, std::size_t max_nodes = 10000);

}  // namespace tps::thermal

#include "tps/thermal/analytic.hpp"

#include "tps/error.hpp"

namespace tps::thermal {

double analytic_slab_flux(const ThermalScenario& scenario, const MaterialProperties& props, double x, double t,
                          int n_terms) {
  scenario.validate();
  props.validate();
  if (!(x >= 0.0 && x <= scenario.thickness)) throw InvalidInput("x outside [0, L]");
  if (!(t >= 0.0 && t <= scenario.duration)) throw InvalidInput("t outside [0, t_end]");
  if (n_terms < 1) throw InvalidInput("n_terms must be >= 1");
  return slab_flux_series<double>(scenario, x, t, props.rho, props.k, props.cp, n_terms);
}

}  // namespace tps::thermal

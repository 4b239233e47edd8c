#pragma once

#include <cmath>
#include <numbers>

#include "tps/thermal/types.hpp"

namespace tps::thermal {

inline constexpr int kDefaultSeriesTerms = 50;

/// Classical cosine-series solution for a slab insulated at x = 0 and heated by
/// a constant flux at x = L, starting from a uniform temperature.
///
/// Generic over the scalar type so that forward-mode dual numbers can flow
/// through it (the series then doubles as a manufactured solution for residual
/// tests). `Scalar` must support +, -, *, / with doubles, and exp/cos via ADL.
template <class Scalar>
Scalar slab_flux_series(const ThermalScenario& scenario, const Scalar& x, const Scalar& t, const Scalar& rho,
                        const Scalar& k, const Scalar& cp, int n_terms) {
  using std::cos;
  using std::exp;
  const double length = scenario.thickness;
  const Scalar fourier = (k / (rho * cp)) * t / (length * length);
  const Scalar amplitude = scenario.heat_flux * length / k;
  Scalar series = 0.0 * x;
  constexpr double pi = std::numbers::pi;
  for (int n = 1; n <= n_terms; ++n) {
    const double nd = static_cast<double>(n);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    series = series + (sign / (nd * nd)) * exp(-(nd * nd * pi * pi) * fourier) * cos((nd * pi / length) * x);
  }
  const Scalar shape = (3.0 * x * x - length * length) / (6.0 * length * length);
  return scenario.initial_temp + amplitude * (fourier + shape - (2.0 / (pi * pi)) * series);
}

/// Checked evaluation of the series; throws InvalidInput for x outside [0, L],
/// t outside [0, t_end] or n_terms < 1.
double analytic_slab_flux(const ThermalScenario& scenario, const MaterialProperties& props, double x, double t,
                          int n_terms = kDefaultSeriesTerms);

}  // namespace tps::thermal

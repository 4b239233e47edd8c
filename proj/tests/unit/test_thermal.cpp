#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tps/error.hpp"
#include "tps/thermal/analytic.hpp"
#include "tps/thermal/solver.hpp"

using namespace tps::thermal;

namespace {

double oracle_at(const ThermalScenario& s, const MaterialProperties& q, double x, double t, int terms = 100) {
  return oracle::slab(x, t, s.thickness, s.heat_flux, s.initial_temp, q.rho, q.k, q.cp, terms);
}

}  // namespace

TEST_CASE("interface temperature at the evaluation time matches the series") {
  const ThermalScenario s;
  const MaterialProperties q;
  const double expected = oracle_at(s, q, 0.0, 150.0);
  CHECK(expected == doctest::Approx(451.67).epsilon(2e-5));
  const TemperatureField f = solve_fd(s, q, GridSpec{});
  CHECK(std::abs(f.at(0, f.nearest_step(150.0)) - expected) < 0.5);
  CHECK(std::abs(interface_temperature_at(s, q, GridSpec{}, 150.0) - f.at(0, f.nearest_step(150.0))) < 1e-12);
}

TEST_CASE("max space-time error against the 100-term series stays below 0.5 K") {
  const ThermalScenario s;
  const MaterialProperties q;
  const TemperatureField f = solve_fd(s, q, GridSpec{});
  double worst = 0.0;
  for (std::size_t n = 0; n <= f.steps(); n += 5) {
    for (std::size_t i = 0; i < f.nodes(); i += 4) {
      const double ref = n == 0 ? s.initial_temp : oracle_at(s, q, f.x(i), f.time(n));
      worst = std::max(worst, std::abs(f.at(i, n) - ref));
    }
  }
  CHECK(worst < 0.5);
}

TEST_CASE("no flux leaves the slab at the initial temperature") {
  ThermalScenario s;
  s.heat_flux = 0.0;
  const TemperatureField f = solve_fd(s, {150.0, 0.8, 900.0}, GridSpec{51, 0.5});
  for (double v : f.values()) CHECK(v == 25.0);
  const InterfaceSeries series = interface_series(f);
  CHECK(series.max_temp == 25.0);
  CHECK(enthalpy_balance(f, {150.0, 0.8, 900.0}, s, 100.0) == 0.0);
}

TEST_CASE("stored energy equals the applied flux integral") {
  const ThermalScenario s;
  const MaterialProperties q;
  const TemperatureField f = solve_fd(s, q, GridSpec{});
  // rho cp int (T - T0) dx by trapezoid, computed here independently
  const std::size_t n = f.nearest_step(150.0);
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < f.nodes(); ++i) integral += 0.5 * (f.at(i, n) + f.at(i + 1, n) - 2.0 * 25.0) * f.dx();
  CHECK(q.rho * q.cp * integral == doctest::Approx(6.0e6).epsilon(0.005));
  for (double t : {50.0, 100.0, 150.0, 200.0}) CHECK(enthalpy_balance(f, q, s, t) < 0.005);
  CHECK(enthalpy_balance(f, q, s, 0.0) == 0.0);
}

TEST_CASE("enthalpy is conserved to rounding on coarse grids too") {
  const ThermalScenario s;
  const MaterialProperties q;
  for (std::size_t nx : {11u, 21u, 41u}) {
    const TemperatureField f = solve_fd(s, q, GridSpec{nx, 0.5});
    CHECK(enthalpy_balance(f, q, s, 150.0) < 1e-10);
  }
}

TEST_CASE("heating is monotone in time and increasing toward the heated face") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.7, 1.3);
  for (int trial = 0; trial < 4; ++trial) {
    const MaterialProperties q{200.0 * u(rng), 1.0 * u(rng), 800.0 * u(rng)};
    const TemperatureField f = solve_fd(ThermalScenario{}, q, GridSpec{});
    bool time_ok = true;
    bool space_ok = true;
    for (std::size_t n = 0; n < f.steps(); ++n) {
      for (std::size_t i = 0; i < f.nodes(); ++i) {
        time_ok = time_ok && f.at(i, n + 1) >= f.at(i, n) - 1e-9;
        if (i + 1 < f.nodes()) space_ok = space_ok && f.at(i + 1, n + 1) >= f.at(i, n + 1) - 1e-9;
      }
    }
    CHECK(time_ok);
    CHECK(space_ok);
  }
}

TEST_CASE("solution depends on the properties only through diffusivity and q L / k") {
  const ThermalScenario s;
  const TemperatureField a = solve_fd(s, {200.0, 1.0, 800.0}, GridSpec{});
  const TemperatureField b = solve_fd(s, {400.0, 1.0, 400.0}, GridSpec{});
  double gap = 0.0;
  for (std::size_t j = 0; j < a.values().size(); ++j) gap = std::max(gap, std::abs(a.values()[j] - b.values()[j]));
  CHECK(gap < 1e-9);
}

TEST_CASE("interface series") {
  const ThermalScenario s;
  const TemperatureField f = solve_fd(s, {}, GridSpec{});
  const InterfaceSeries series = interface_series(f);
  CHECK(series.points.size() == f.steps() + 1);
  double max_to_eval = -INFINITY;
  for (const auto& [t, v] : series.points) {
    if (t <= 150.0 + 1e-9) max_to_eval = std::max(max_to_eval, v);
  }
  CHECK(max_to_eval == series.at_eval);

  ThermalScenario one = s;
  one.duration = 0.05;
  one.eval_time = 0.05;
  const TemperatureField g = solve_fd(one, {}, GridSpec{21, 0.05});
  CHECK(interface_series(g).points.size() == 2);
}

TEST_CASE("analytic series values") {
  const ThermalScenario s;
  const MaterialProperties q;
  CHECK(analytic_slab_flux(s, q, 0.0, 150.0, 50) == doctest::Approx(451.67).epsilon(2e-5));
  CHECK(analytic_slab_flux(s, q, 0.05, 150.0, 50) == doctest::Approx(1431.66).epsilon(4e-5));
  CHECK(analytic_slab_flux(s, q, 0.0, 150.0, 50) == doctest::Approx(oracle_at(s, q, 0.0, 150.0, 50)).epsilon(1e-13));
  // at t = 0 the partial sum is only as good as its tail
  for (double x : {0.0, 0.01, 0.025, 0.04, 0.05}) {
    CHECK(std::abs(analytic_slab_flux(s, q, x, 0.0, 50) - 25.0) <= oracle::slab_tail_bound(0.05, 40000.0, 1.0, 50));
  }
  CHECK_THROWS_AS(analytic_slab_flux(s, q, -0.01, 10.0), tps::InvalidInput);
  CHECK_THROWS_AS(analytic_slab_flux(s, q, 0.01, 201.0), tps::InvalidInput);
  CHECK_THROWS_AS(analytic_slab_flux(s, q, 0.01, 10.0, 0), tps::InvalidInput);
}

TEST_CASE("grid refinement") {
  const ThermalScenario s;
  const MaterialProperties q;
  const GridSpec g = refine_until(s, q, 0.1);
  CHECK(std::abs(interface_temperature_at(s, q, g, 150.0) - oracle_at(s, q, 0.0, 150.0)) < 0.2);
  CHECK(refine_until(s, q, 1000.0) == GridSpec{});
  CHECK_THROWS_AS(refine_until(s, q, 0.0), tps::NumericalError);
}

TEST_CASE("input validation") {
  const ThermalScenario s;
  CHECK_THROWS_AS(solve_fd(s, {-1.0, 1.0, 800.0}, GridSpec{}), tps::InvalidInput);
  CHECK_THROWS_AS(solve_fd(s, {200.0, NAN, 800.0}, GridSpec{}), tps::InvalidInput);
  CHECK_THROWS_AS(solve_fd(s, {}, GridSpec{2, 0.05}), tps::InvalidInput);
  CHECK_THROWS_AS(solve_fd(s, {}, GridSpec{21, 0.03}), tps::InvalidInput);
  ThermalScenario late = s;
  late.eval_time = 300.0;
  CHECK_THROWS_AS(late.validate(), tps::InvalidInput);
}

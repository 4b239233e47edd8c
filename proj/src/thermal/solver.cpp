#include "tps/thermal/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "tps/error.hpp"

namespace tps::thermal {

namespace {

// Semi-discrete operator dT/dt = c * (M T) + f with ghost-node Neumann rows:
//   row 0:      -2 T0 + 2 T1
//   interior:   T_{i-1} - 2 T_i + T_{i+1}
//   row nx-1:   2 T_{nx-2} - 2 T_{nx-1}   (+ flux source)
// One theta-scheme step of size h solves
//   (I - theta h c M) T+ = (I + (1 - theta) h c M) T + h f.
class ThetaStepper {
 public:
  ThetaStepper(std::size_t nx, double coeff, double source, double h, double theta)
      : nx_(nx), source_(source), h_(h), explicit_(coeff * h * (1.0 - theta)),
        lower_(nx), diag_(nx), upper_(nx), cprime_(nx), inv_denom_(nx), rhs_(nx) {
    const double implicit = coeff * h * theta;
    for (std::size_t i = 0; i < nx; ++i) {
      diag_[i] = 1.0 + 2.0 * implicit;
      lower_[i] = -implicit;
      upper_[i] = -implicit;
    }
    upper_[0] = -2.0 * implicit;
    lower_[nx - 1] = -2.0 * implicit;
    // Thomas factorization; the matrix is strictly diagonally dominant for h > 0.
    double denom = diag_[0];
    for (std::size_t i = 0; i < nx; ++i) {
      if (i > 0) denom = diag_[i] - lower_[i] * cprime_[i - 1];
      if (!std::isfinite(denom) || std::abs(denom) < std::numeric_limits<double>::min()) {
        throw NumericalError("tridiagonal factorization broke down at row " + std::to_string(i));
      }
      inv_denom_[i] = 1.0 / denom;
      cprime_[i] = upper_[i] * inv_denom_[i];
    }
  }

  void step(std::span<const double> in, std::span<double> out) {
    const std::size_t last = nx_ - 1;
    rhs_[0] = in[0] + explicit_ * (2.0 * in[1] - 2.0 * in[0]);
    for (std::size_t i = 1; i < last; ++i) {
      rhs_[i] = in[i] + explicit_ * (in[i - 1] - 2.0 * in[i] + in[i + 1]);
    }
    rhs_[last] = in[last] + explicit_ * (2.0 * in[last - 1] - 2.0 * in[last]) + h_ * source_;

    // forward sweep, back substitution
    rhs_[0] *= inv_denom_[0];
    for (std::size_t i = 1; i < nx_; ++i) {
      rhs_[i] = (rhs_[i] - lower_[i] * rhs_[i - 1]) * inv_denom_[i];
    }
    out[last] = rhs_[last];
    for (std::size_t i = last; i-- > 0;) {
      out[i] = rhs_[i] - cprime_[i] * out[i + 1];
    }
    if (!std::isfinite(out[0]) || !std::isfinite(out[last])) {
      throw NumericalError("non-finite temperature produced by the tridiagonal solve");
    }
  }

 private:
  std::size_t nx_;
  double source_;
  double h_;
  double explicit_;
  std::vector<double> lower_, diag_, upper_, cprime_, inv_denom_, rhs_;
};

// The flux switching on against a uniform state gives a sqrt(t) boundary layer
// that a single dt cannot resolve at the heated face.
constexpr int kStartupSubsteps = 20;

struct Marcher {
  Marcher(const ThermalScenario& scenario, const MaterialProperties& props, const GridSpec& grid)
      : nx(grid.nx),
        dx(scenario.thickness / static_cast<double>(grid.nx - 1)),
        coeff(props.alpha() / (dx * dx)),
        source(2.0 * props.alpha() * scenario.heat_flux / (props.k * dx)),
        damping(nx, coeff, source, grid.dt / (2.0 * kStartupSubsteps), 1.0),
        startup(nx, coeff, source, grid.dt / kStartupSubsteps, 0.5),
        crank(nx, coeff, source, grid.dt, 0.5),
        scratch(nx) {}

  // Advances by one dt. The first dt is resolved with kStartupSubsteps
  // sub-steps, the leading one split into two implicit-Euler halves.
  void advance(std::span<const double> in, std::span<double> out, std::size_t step_index) {
    if (step_index == 0) {
      damping.step(in, scratch);
      damping.step(scratch, out);
      for (int j = 1; j < kStartupSubsteps; ++j) {
        startup.step(out, scratch);
        std::copy(scratch.begin(), scratch.end(), out.begin());
      }
    } else {
      crank.step(in, out);
    }
  }

  std::size_t nx;
  double dx;
  double coeff;
  double source;
  ThetaStepper damping;
  ThetaStepper startup;
  ThetaStepper crank;
  std::vector<double> scratch;
};

void check_inputs(const ThermalScenario& scenario, const MaterialProperties& props, const GridSpec& grid) {
  scenario.validate();
  props.validate();
  grid.validate();
}

}  // namespace

TemperatureField solve_fd(const ThermalScenario& scenario, const MaterialProperties& props, const GridSpec& grid) {
  check_inputs(scenario, props, grid);
  const std::size_t steps = grid.steps_for(scenario.duration);
  TemperatureField field(scenario, grid, steps);
  if (scenario.heat_flux == 0.0) return field;  // uniform initial state stays put

  Marcher marcher(scenario, props, grid);
  const std::vector<double>& values = field.values();
  for (std::size_t n = 0; n < steps; ++n) {
    std::span<const double> in(values.data() + n * grid.nx, grid.nx);
    std::span<double> out(&field.at(0, n + 1), grid.nx);
    marcher.advance(in, out, n);
  }
  return field;
}

double interface_temperature_at(const ThermalScenario& scenario, const MaterialProperties& props,
                                const GridSpec& grid, double t_stop) {
  check_inputs(scenario, props, grid);
  if (!(t_stop >= 0.0 && t_stop <= scenario.duration)) throw InvalidInput("t_stop outside [0, t_end]");
  const std::size_t steps = static_cast<std::size_t>(std::llround(t_stop / grid.dt));
  if (scenario.heat_flux == 0.0 || steps == 0) return scenario.initial_temp;

  Marcher marcher(scenario, props, grid);
  std::vector<double> a(grid.nx, scenario.initial_temp);
  std::vector<double> b(grid.nx);
  for (std::size_t n = 0; n < steps; ++n) {
    marcher.advance(a, b, n);
    a.swap(b);
  }
  return a[0];
}

InterfaceSeries interface_series(const TemperatureField& field) {
  InterfaceSeries out;
  out.points.reserve(field.steps() + 1);
  out.max_temp = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n <= field.steps(); ++n) {
    const double value = field.at(0, n);
    out.points.emplace_back(field.time(n), value);
    out.max_temp = std::max(out.max_temp, value);
  }
  out.at_eval = field.at(0, field.nearest_step(field.scenario().eval_time));
  return out;
}

namespace {

double stored_enthalpy(const TemperatureField& field, std::size_t n) {
  const double t0 = field.scenario().initial_temp;
  const std::size_t last = field.nodes() - 1;
  double sum = 0.5 * ((field.at(0, n) - t0) + (field.at(last, n) - t0));
  for (std::size_t i = 1; i < last; ++i) sum += field.at(i, n) - t0;
  return sum * field.dx();
}

}  // namespace

double enthalpy_balance(const TemperatureField& field, const MaterialProperties& props,
                        const ThermalScenario& scenario, double t) {
  const double t_max = field.time(field.steps());
  if (!(t >= 0.0 && t <= t_max * (1.0 + 1e-12))) throw InvalidInput("t outside the stored time range");
  const double pos = std::min(t / field.grid().dt, static_cast<double>(field.steps()));
  const auto n0 = std::min(static_cast<std::size_t>(pos), field.steps() == 0 ? 0 : field.steps() - 1);
  const double w = field.steps() == 0 ? 0.0 : pos - static_cast<double>(n0);
  double integral = (1.0 - w) * stored_enthalpy(field, n0);
  if (w > 0.0) integral += w * stored_enthalpy(field, n0 + 1);

  const double stored = props.rho * props.cp * integral;
  const double supplied = scenario.heat_flux * t;
  if (scenario.heat_flux == 0.0) return std::abs(stored);
  return std::abs(stored - supplied) / std::max(supplied, 1e-300);
}

GridSpec refine_until(const ThermalScenario& scenario, const MaterialProperties& props, double target_tol,
                      const GridSpec& initial, std::size_t max_nodes) {
  if (!(target_tol > 0.0)) {
    throw NumericalError("refinement cannot reach a tolerance of " + std::to_string(target_tol) + " K");
  }
  GridSpec coarse = initial;
  double coarse_value = interface_temperature_at(scenario, props, coarse, scenario.eval_time);
  while (true) {
    const GridSpec fine{2 * (coarse.nx - 1) + 1, 0.5 * coarse.dt};
    if (fine.nx > max_nodes) {
      throw NumericalError("grid refinement did not converge to " + std::to_string(target_tol) +
                           " K before nx exceeded " + std::to_string(max_nodes));
    }
    const double fine_value = interface_temperature_at(scenario, props, fine, scenario.eval_time);
    if (std::abs(fine_value - coarse_value) < target_tol) return coarse;
    coarse = fine;
    coarse_value = fine_value;
  }
}

}  // namespace tps::thermal

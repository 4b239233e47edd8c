#include "tps/ad/input_derivs.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tps/error.hpp"

namespace tps::ad {

namespace {

Dual2 evaluate_along(const ScalarField& field, std::span<const double> point, std::size_t seeded) {
  std::vector<Dual2> inputs(point.begin(), point.end());
  inputs[seeded] = Dual2::variable(point[seeded]);
  return field(inputs);
}

double evaluate_plain(const ScalarField& field, std::span<const double> point) {
  std::vector<Dual2> inputs(point.begin(), point.end());
  return field(inputs).v;
}

double relative_gap(double exact, double approx) {
  return std::abs(exact - approx) / std::max({std::abs(exact), std::abs(approx), 1.0});
}

}  // namespace

InputDerivs eval_with_input_derivs(const ScalarField& field, std::span<const double> point) {
  if (point.size() < 2) throw InvalidInput("a field point needs at least (x, t)");
  const Dual2 along_x = evaluate_along(field, point, 0);
  const Dual2 along_t = evaluate_along(field, point, 1);
  return {along_x.v, along_t.d1, along_x.d1, along_x.d2};
}

double fd_check(const ScalarField& field, std::span<const double> point, double h) {
  if (!(h > 0.0)) throw InvalidInput("finite-difference step must be > 0");
  const InputDerivs exact = eval_with_input_derivs(field, point);
  std::vector<double> p(point.begin(), point.end());

  auto shifted = [&](std::size_t axis, double delta) {
    std::vector<double> q = p;
    q[axis] += delta;
    return evaluate_plain(field, q);
  };
  const double center = evaluate_plain(field, p);
  const double xp = shifted(0, h);
  const double xm = shifted(0, -h);
  const double tp = shifted(1, h);
  const double tm = shifted(1, -h);

  const double fd_dx = (xp - xm) / (2.0 * h);
  const double fd_dxx = (xp - 2.0 * center + xm) / (h * h);
  const double fd_dt = (tp - tm) / (2.0 * h);
  return std::max({relative_gap(exact.dx, fd_dx), relative_gap(exact.dxx, fd_dxx), relative_gap(exact.dt, fd_dt)});
}

}  // namespace tps::ad

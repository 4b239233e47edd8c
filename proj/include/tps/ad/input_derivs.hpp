#pragma once

#include <functional>
#include <span>

#include "tps/ad/dual.hpp"

namespace tps::ad {

/// Scalar field of (x, t, extra inputs...). Component 0 is x, component 1 is t.
using ScalarField = std::function<Dual2(std::span<const Dual2>)>;

struct InputDerivs {
  double value{};
  double dt{};   ///< dF/dt
  double dx{};   ///< dF/dx
  double dxx{};  ///< d2F/dx2
};

/// Exact (to rounding) value, dF/dt, dF/dx and d2F/dx2 of `field` at `point`,
/// from two forward passes: a second-order pass seeded along x and a first-order
/// pass seeded along t. Throws InvalidInput if `point` has fewer than 2 entries.
InputDerivs eval_with_input_derivs(const ScalarField& field, std::span<const double> point);

/// Largest relative discrepancy between eval_with_input_derivs and central
/// differences of step `h` for dF/dt, dF/dx and d2F/dx2. Each discrepancy is
/// scaled by max(|ad|, |fd|, 1).
double fd_check(const ScalarField& field, std::span<const double> point, double h);

}  // namespace tps::ad

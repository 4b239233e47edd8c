#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

namespace tps::pinn::detail {

/// f(x) with its gradient written into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOutcome {
  std::size_t iterations{};
  std::size_t evaluations{};
  double value{};
  bool stalled{false};  ///< line search could not make progress
};

/// Limited-memory BFGS with a strong-Wolfe line search (c1 = 1e-4, c2 = 0.9).
/// `on_iteration` receives the accepted value after every iteration.
LbfgsOutcome lbfgs_minimize(const Objective& f, Eigen::VectorXd& x, std::size_t iterations, std::size_t memory,
                            std::size_t max_line_search,
                            const std::function<void(std::size_t, double)>& on_iteration);

}  // namespace tps::pinn::detail

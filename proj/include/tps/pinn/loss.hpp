#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "tps/ad/input_derivs.hpp"
#include "tps/pinn/network.hpp"

namespace tps::pinn {

struct LossWeights {
  double pde{1.0};
  double ic{10.0};
  double bc_interface{10.0};
  double bc_surface{10.0};

  void validate() const;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// Physical collocation points, one column per point with rows (x, t, rho, k, cp).
struct CollocationSet {
  Eigen::MatrixXd interior;   ///< x in [0, L], t in [0, t_end]
  Eigen::MatrixXd initial;    ///< t = 0
  Eigen::MatrixXd interface;  ///< x = 0
  Eigen::MatrixXd surface;    ///< x = L
};

struct CollocationCounts {
  std::size_t interior{20000};
  std::size_t initial{4000};
  std::size_t interface{4000};
  std::size_t surface{4000};

  friend bool operator==(const CollocationCounts&, const CollocationCounts&) = default;
};

/// Uniform draws over the normalization box with the category constraint set
/// exactly; deterministic in `seed`.
CollocationSet sample_collocation(const NormalizationSpec& norm, const CollocationCounts& counts, std::uint64_t seed);

/// Unweighted mean-square residuals and the weighted total.
struct LossBreakdown {
  double pde{};
  double ic{};
  double bc_interface{};
  double bc_surface{};
  double total{};
};

struct LossResult {
  LossBreakdown loss;
  Eigen::VectorXd gradient;  ///< d total / d flat parameters
};

struct LossOptions {
  std::size_t chunk_size{1024};  ///< points per tape
  int threads{1};                ///< chunks are reduced in a fixed order regardless of this
};

/// PDE residual r = dT/dt - alpha d2T/dx2 [K/s] of a field over physical
/// (x, t, ...) at `point`.
double pde_residual(const ad::ScalarField& field, std::span<const double> point, double alpha);

/// Residual of the surrogate itself at physical (x, t, q); alpha from q.
double pde_residual(const NetworkParameters& params, const NormalizationSpec& norm, double x, double t,
                    const MaterialProperties& q);

/// Weighted, nondimensional training loss
///   w_pde  mean((r t_end / T_scale)^2)
/// + w_ic   mean(((T - T0) / T_scale)^2)
/// + w_bc0  mean((L dT/dx|_0 / T_scale)^2)
/// + w_bcL  mean(((k dT/dx|_L - q_s) / q_s)^2)
/// evaluated point by point for any differentiable field of (x, t, rho, k, cp).
/// This is the slow reference path; loss_and_grad is the training path.
LossBreakdown field_loss(const ad::ScalarField& field, const NormalizationSpec& norm, const LossWeights& weights,
                         const CollocationSet& colloc, const ThermalScenario& scenario);

/// Same loss for the network, with the reverse-mode gradient over its flat
/// parameters. Throws ConfigError if q_s = 0 while w_bcL > 0, InvalidInput if a
/// weighted category has no points, NonFiniteError naming the offending term.
LossResult loss_and_grad(const NetworkParameters& params, const NormalizationSpec& norm, const LossWeights& weights,
                         const CollocationSet& colloc, const ThermalScenario& scenario, const LossOptions& options = {});

}  // namespace tps::pinn

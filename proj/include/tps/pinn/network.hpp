#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tps/ad/input_derivs.hpp"
#include "tps/thermal/types.hpp"

namespace tps::pinn {

using thermal::MaterialProperties;
using thermal::ThermalScenario;

/// Input order of the network: x, t, rho, k, cp.
inline constexpr std::size_t kInputDim = 5;

struct NetworkArchitecture {
  std::vector<int> hidden{32, 32, 32, 32};  ///< tanh hidden layer widths; the output layer is linear, width 1

  void validate() const;
  /// Layer sizes including input (5) and output (1).
  std::vector<int> layer_sizes() const;
  std::size_t parameter_count() const;

  friend bool operator==(const NetworkArchitecture&, const NetworkArchitecture&) = default;
};

/// Closed interval used for the affine map onto [-1, 1].
struct Range {
  double lo{};
  double hi{};

  double width() const { return hi - lo; }
  double normalize(double v) const { return 2.0 * (v - lo) / (hi - lo) - 1.0; }
  double denormalize(double u) const { return lo + 0.5 * (u + 1.0) * (hi - lo); }
  bool contains(double v) const { return v >= lo && v <= hi; }

  friend bool operator==(const Range&, const Range&) = default;
};

/// [mean - 3 std, mean + 3 std] with the lower end kept positive.
Range three_sigma_range(double mean, double std);

/// Input normalization and output scaling: T = T0 + temp_scale * net(normalized inputs).
struct NormalizationSpec {
  std::array<Range, kInputDim> inputs{};  ///< x, t, rho, k, cp
  double initial_temp{25.0};
  double temp_scale{2000.0};

  /// x over [0, L], t over [0, t_end], properties over the given boxes.
  static NormalizationSpec for_scenario(const ThermalScenario& scenario, Range rho, Range k, Range cp,
                                        double temp_scale = 2000.0);

  void validate() const;
  std::array<double, kInputDim> normalize(const std::array<double, kInputDim>& physical) const;
  std::array<double, kInputDim> denormalize(const std::array<double, kInputDim>& normalized) const;
  /// Clamps each input onto its range; returns true if anything moved.
  bool clamp(std::array<double, kInputDim>& physical) const;

  friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

struct LayerShape {
  Eigen::Index rows{};  ///< fan-out
  Eigen::Index cols{};  ///< fan-in
  Eigen::Index weight_offset{};
  Eigen::Index bias_offset{};
};

/// Weights and biases in one flat vector, laid out per layer as the row-major
/// weight matrix followed by its bias.
class NetworkParameters {
 public:
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit NetworkParameters(NetworkArchitecture arch = {});
  NetworkParameters(NetworkArchitecture arch, Eigen::VectorXd flat);

  const NetworkArchitecture& architecture() const { return arch_; }
  std::size_t layer_count() const { return layers_.size(); }
  const LayerShape& layer(std::size_t i) const { return layers_.at(i); }

  Eigen::Map<const RowMajor> weight(std::size_t i) const;
  Eigen::Map<RowMajor> weight(std::size_t i);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t i) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t i);

  const Eigen::VectorXd& flat() const { return flat_; }
  Eigen::VectorXd& flat() { return flat_; }

  bool all_finite() const { return flat_.allFinite(); }
  /// Throws NumericalError on NaN/Inf entries.
  void require_finite() const;

 private:
  NetworkArchitecture arch_;
  std::vector<LayerShape> layers_;
  Eigen::VectorXd flat_;
};

/// Glorot-uniform weights, zero biases; deterministic in `seed`.
NetworkParameters init_params(const NetworkArchitecture& arch, std::uint64_t seed);

/// Surrogate temperature [C] at one point. Inputs outside the normalization box
/// are clamped onto it; `clamped` (if given) reports whether that happened.
double forward(const NetworkParameters& params, const NormalizationSpec& norm, double x, double t,
               const MaterialProperties& q, bool* clamped = nullptr);

struct QueryPoint {
  double x{};
  double t{};
  MaterialProperties q{};
};

/// Batched forward pass, one GEMM per layer over all points. `clamped_count`
/// (if given) receives how many points had to be clamped.
std::vector<double> predict_batch(const NetworkParameters& params, const NormalizationSpec& norm,
                                  std::span<const QueryPoint> points, std::size_t* clamped_count = nullptr);

/// The surrogate as a differentiable field of physical (x, t, rho, k, cp), for
/// use with ad::eval_with_input_derivs. No clamping is applied.
ad::ScalarField network_field(const NetworkParameters& params, const NormalizationSpec& norm);

}  // namespace tps::pinn

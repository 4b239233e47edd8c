#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tps/pinn/network.hpp"
#include "tps/rng.hpp"
#include "tps/thermal/types.hpp"

namespace tps::uq {

using thermal::MaterialProperties;

inline constexpr std::size_t kParamDim = 3;  // rho, k, cp
using ParamVector = std::array<double, kParamDim>;

inline ParamVector to_vector(const MaterialProperties& q) { return {q.rho, q.k, q.cp}; }
inline MaterialProperties from_vector(const ParamVector& v) { return {v[0], v[1], v[2]}; }

/// Normal N(mean, std) restricted to [lo, hi].
struct TruncatedNormal {
  double mean{};
  double std{};
  double lo{};
  double hi{};

  /// Truncation at [mean / 2, 3 mean / 2].
  static TruncatedNormal half_width(double mean, double std) { return {mean, std, 0.5 * mean, 1.5 * mean}; }

  bool contains(double v) const { return v >= lo && v <= hi; }
  /// Throws InvalidInput naming `name` on a violated invariant.
  void validate(const std::string& name) const;

  friend bool operator==(const TruncatedNormal&, const TruncatedNormal&) = default;
};

struct PriorSpec {
  TruncatedNormal rho = TruncatedNormal::half_width(200.0, 20.0);
  TruncatedNormal k = TruncatedNormal::half_width(1.0, 0.1);
  TruncatedNormal cp = TruncatedNormal::half_width(800.0, 80.0);
  /// Uniform over the truncation box instead of the normal shape.
  bool flat{false};

  const TruncatedNormal& operator[](std::size_t i) const;
  bool contains(const MaterialProperties& q) const;
  void validate() const;

  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// -inf outside the box; otherwise the unnormalized log-density (0 at the means,
/// 0 everywhere inside for a flat prior).
double log_prior(const MaterialProperties& q, const PriorSpec& prior);

/// Draw from the (truncated) prior by rejection.
MaterialProperties sample_prior(const PriorSpec& prior, Rng& rng);

struct LikelihoodSpec {
  double threshold{450.0};
  double sigma{10.0};
  double reliability{0.95};
  double mu{};  ///< threshold - z(reliability) sigma
  /// Constant likelihood (the posterior equals the prior).
  bool flat{false};
};

/// Throws InvalidInput unless sigma > 0 and 0 < R < 1.
LikelihoodSpec make_likelihood(double threshold, double sigma, double reliability);

/// -(T - mu)^2 / (2 sigma^2), or 0 for a flat likelihood.
double log_likelihood_of(double interface_temp, const LikelihoodSpec& lik);

/// Interface temperature at t_eval as a function of the material properties.
class InterfaceModel {
 public:
  virtual ~InterfaceModel() = default;
  virtual double predict(const MaterialProperties& q) const = 0;
  virtual std::vector<double> predict_batch(std::span<const MaterialProperties> qs) const;
  virtual std::string name() const = 0;
};

class SurrogateModel final : public InterfaceModel {
 public:
  SurrogateModel(pinn::NetworkParameters params, pinn::NormalizationSpec norm, thermal::ThermalScenario scenario);
  double predict(const MaterialProperties& q) const override;
  std::vector<double> predict_batch(std::span<const MaterialProperties> qs) const override;
  std::string name() const override { return "surrogate"; }

 private:
  pinn::NetworkParameters params_;
  pinn::NormalizationSpec norm_;
  thermal::ThermalScenario scenario_;
};

class FdModel final : public InterfaceModel {
 public:
  FdModel(thermal::ThermalScenario scenario, thermal::GridSpec grid);
  double predict(const MaterialProperties& q) const override;
  std::string name() const override { return "fd"; }

 private:
  thermal::ThermalScenario scenario_;
  thermal::GridSpec grid_;
};

struct PosteriorPoint {
  double log_prior{};
  double log_likelihood{};
  double log_posterior{};
  double interface_temp{};  ///< NaN when the model was not called
};

/// Unnormalized log-posterior. The model is only called for in-box points.
class PosteriorEvaluator {
 public:
  PosteriorEvaluator(const InterfaceModel& model, PriorSpec prior, LikelihoodSpec lik);

  double log_prior(const MaterialProperties& q) const { return uq::log_prior(q, prior_); }
  double log_likelihood(const MaterialProperties& q) const;
  double log_posterior(const MaterialProperties& q) const { return evaluate(q).log_posterior; }

  PosteriorPoint evaluate(const MaterialProperties& q) const;
  /// One model batch call for all in-box points.
  std::vector<PosteriorPoint> evaluate_batch(std::span<const MaterialProperties> qs) const;

  const PriorSpec& prior() const { return prior_; }
  const LikelihoodSpec& likelihood() const { return lik_; }
  const InterfaceModel& model() const { return *model_; }

 private:
  const InterfaceModel* model_;
  PriorSpec prior_;
  LikelihoodSpec lik_;
};

}  // namespace tps::uq

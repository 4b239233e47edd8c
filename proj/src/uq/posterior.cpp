#include "tps/uq/posterior.hpp"

#include <cmath>
#include <limits>

#include "tps/error.hpp"
#include "tps/thermal/solver.hpp"
#include "tps/uq/stats.hpp"

namespace tps::uq {

void TruncatedNormal::validate(const std::string& name) const {
  if (!std::isfinite(std) || !(std > 0.0)) throw InvalidInput(name + ".std must be > 0");
  if (!std::isfinite(lo) || !(lo > 0.0)) throw InvalidInput(name + ".lo must be > 0");
  if (!std::isfinite(mean) || !std::isfinite(hi) || !(lo < mean && mean < hi)) {
    throw InvalidInput(name + " needs lo < mean < hi");
  }
}

const TruncatedNormal& PriorSpec::operator[](std::size_t i) const {
  switch (i) {
    case 0: return rho;
    case 1: return k;
    case 2: return cp;
    default: throw InvalidInput("prior index out of range");
  }
}

bool PriorSpec::contains(const MaterialProperties& q) const {
  return rho.contains(q.rho) && k.contains(q.k) && cp.contains(q.cp);
}

void PriorSpec::validate() const {
  rho.validate("rho");
  k.validate("k");
  cp.validate("cp");
}

double log_prior(const MaterialProperties& q, const PriorSpec& prior) {
  if (!prior.contains(q)) return -std::numeric_limits<double>::infinity();
  if (prior.flat) return 0.0;
  const ParamVector v = to_vector(q);
  double lp = 0.0;
  for (std::size_t i = 0; i < kParamDim; ++i) {
    const double z = (v[i] - prior[i].mean) / prior[i].std;
    lp -= 0.5 * z * z;
  }
  return lp;
}

MaterialProperties sample_prior(const PriorSpec& prior, Rng& rng) {
  ParamVector v{};
  for (std::size_t i = 0; i < kParamDim; ++i) {
    const TruncatedNormal& d = prior[i];
    do {
      v[i] = prior.flat ? d.lo + (d.hi - d.lo) * rng.uniform() : d.mean + d.std * rng.normal();
    } while (!d.contains(v[i]));
  }
  return from_vector(v);
}

LikelihoodSpec make_likelihood(double threshold, double sigma, double reliability) {
  if (!std::isfinite(threshold)) throw InvalidInput("threshold must be finite");
  if (!std::isfinite(sigma) || !(sigma > 0.0)) throw InvalidInput("sigma must be > 0");
  if (!(reliability > 0.0 && reliability < 1.0)) throw InvalidInput("reliability must lie in (0, 1)");
  LikelihoodSpec lik;
  lik.threshold = threshold;
  lik.sigma = sigma;
  lik.reliability = reliability;
  lik.mu = threshold - z_quantile(reliability) * sigma;
  return lik;
}

double log_likelihood_of(double interface_temp, const LikelihoodSpec& lik) {
  if (lik.flat) return 0.0;
  const double r = (interface_temp - lik.mu) / lik.sigma;
  return -0.5 * r * r;
}

std::vector<double> InterfaceModel::predict_batch(std::span<const MaterialProperties> qs) const {
  std::vector<double> out;
  out.reserve(qs.size());
  for (const MaterialProperties& q : qs) out.push_back(predict(q));
  return out;
}

SurrogateModel::SurrogateModel(pinn::NetworkParameters params, pinn::NormalizationSpec norm,
                               thermal::ThermalScenario scenario)
    : params_(std::move(params)), norm_(norm), scenario_(scenario) {
  params_.require_finite();
  norm_.validate();
}

double SurrogateModel::predict(const MaterialProperties& q) const {
  return pinn::forward(params_, norm_, 0.0, scenario_.eval_time, q);
}

std::vector<double> SurrogateModel::predict_batch(std::span<const MaterialProperties> qs) const {
  std::vector<pinn::QueryPoint> points;
  points.reserve(qs.size());
  for (const MaterialProperties& q : qs) points.push_back({0.0, scenario_.eval_time, q});
  return pinn::predict_batch(params_, norm_, points);
}

FdModel::FdModel(thermal::ThermalScenario scenario, thermal::GridSpec grid) : scenario_(scenario), grid_(grid) {
  scenario_.validate();
  grid_.validate();
}

double FdModel::predict(const MaterialProperties& q) const {
  return thermal::interface_temperature_at(scenario_, q, grid_, scenario_.eval_time);
}

PosteriorEvaluator::PosteriorEvaluator(const InterfaceModel& model, PriorSpec prior, LikelihoodSpec lik)
    : model_(&model), prior_(prior), lik_(lik) {
  prior_.validate();
}

double PosteriorEvaluator::log_likelihood(const MaterialProperties& q) const {
  return log_likelihood_of(model_->predict(q), lik_);
}

PosteriorPoint PosteriorEvaluator::evaluate(const MaterialProperties& q) const {
  PosteriorPoint p;
  p.log_prior = log_prior(q);
  p.interface_temp = std::numeric_limits<double>::quiet_NaN();
  if (!std::isfinite(p.log_prior)) {
    p.log_likelihood = -std::numeric_limits<double>::infinity();
    p.log_posterior = p.log_prior;
    return p;
  }
  p.interface_temp = model_->predict(q);
  p.log_likelihood = log_likelihood_of(p.interface_temp, lik_);
  p.log_posterior = p.log_prior + p.log_likelihood;
  return p;
}

std::vector<PosteriorPoint> PosteriorEvaluator::evaluate_batch(std::span<const MaterialProperties> qs) const {
  std::vector<PosteriorPoint> out(qs.size());
  std::vector<MaterialProperties> inside;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    out[i].log_prior = log_prior(qs[i]);
    out[i].interface_temp = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(out[i].log_prior)) {
      inside.push_back(qs[i]);
      where.push_back(i);
    } else {
      out[i].log_likelihood = -std::numeric_limits<double>::infinity();
      out[i].log_posterior = out[i].log_prior;
    }
  }
  if (!inside.empty()) {
    const std::vector<double> temps = model_->predict_batch(inside);
    for (std::size_t j = 0; j < where.size(); ++j) {
      PosteriorPoint& p = out[where[j]];
      p.interface_temp = temps[j];
      p.log_likelihood = log_likelihood_of(temps[j], lik_);
      p.log_posterior = p.log_prior + p.log_likelihood;
    }
  }
  return out;
}

}  // namespace tps::uq

#include "tps/uq/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <fmt/format.h>

#include "tps/error.hpp"
#include "tps/rng.hpp"
#include "tps/uq/stats.hpp"

namespace tps::uq {

void SmcSettings::validate() const {
  if (n_particles < 10) throw InvalidInput("n_particles must be >= 10");
  if (!(ess_fraction > 0.0 && ess_fraction < 1.0)) throw InvalidInput("ess_fraction must lie in (0, 1)");
  if (max_stages == 0) throw InvalidInput("max_stages must be > 0");
}

namespace {

double ess_for_increment(const std::vector<double>& log_w, const std::vector<double>& ll, double delta,
                         std::vector<double>& scratch_log, std::vector<double>& scratch_w) {
  for (std::size_t i = 0; i < ll.size(); ++i) scratch_log[i] = log_w[i] + delta * ll[i];
  normalize_log_weights(scratch_log, scratch_w);
  return effective_sample_size(scratch_w);
}

}  // namespace

ParticleEnsemble smc_sample(const PosteriorEvaluator& evaluator, const SmcSettings& settings, std::uint64_t seed) {
  settings.validate();
  const std::size_t n = settings.n_particles;
  const double target_ess = settings.ess_fraction * static_cast<double>(n);
  Rng root(seed);

  ParticleEnsemble ens;
  ens.seed = seed;
  Rng init_rng = root.split(0);
  ens.particles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ens.particles.push_back(sample_prior(evaluator.prior(), init_rng));
  {
    const auto pts = evaluator.evaluate_batch(ens.particles);
    for (const PosteriorPoint& p : pts) {
      ens.log_likelihood.push_back(p.log_likelihood);
      ens.interface_temp.push_back(p.interface_temp);
    }
  }
  ens.weights.assign(n, 1.0 / static_cast<double>(n));
  std::vector<double> log_w(n, 0.0);
  std::vector<double> scratch_log(n), scratch_w(n);

  std::size_t proposed = 0;
  std::size_t accepted = 0;

  for (std::size_t stage = 1; ens.beta < 1.0; ++stage) {
    if (stage > settings.max_stages) {
      throw NumericalError(fmt::format("SMC did not reach beta = 1 within {} stages (beta = {})", settings.max_stages,
                                       ens.beta));
    }
    // next exponent
    const double room = 1.0 - ens.beta;
    double delta = room;
    if (ess_for_increment(log_w, ens.log_likelihood, room, scratch_log, scratch_w) < target_ess) {
      double lo = 0.0;
      double hi = room;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ess_for_increment(log_w, ens.log_likelihood, mid, scratch_log, scratch_w) >= target_ess) lo = mid;
        else hi = mid;
      }
      delta = lo > 0.0 ? lo : hi;
    }
    const double next_beta = delta >= room ? 1.0 : ens.beta + delta;
    for (std::size_t i = 0; i < n; ++i) log_w[i] += (next_beta - ens.beta) * ens.log_likelihood[i];
    normalize_log_weights(log_w, ens.weights);
    ens.beta = next_beta;
    ens.betas.push_back(next_beta);
    ens.ess_history.push_back(effective_sample_size(ens.weights));

    // proposal covariance from the weighted ensemble
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const ParamVector v = to_vector(ens.particles[i]);
      mean += ens.weights[i] * Eigen::Vector3d(v[0], v[1], v[2]);
    }
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const ParamVector v = to_vector(ens.particles[i]);
      const Eigen::Vector3d d = Eigen::Vector3d(v[0], v[1], v[2]) - mean;
      cov += ens.weights[i] * d * d.transpose();
    }
    cov *= 2.38 * 2.38 / static_cast<double>(kParamDim);
    // keep the factorization defined for a nearly collapsed ensemble
    for (int d = 0; d < 3; ++d) cov(d, d) += 1e-12 * std::max(1.0, mean(d) * mean(d));
    const Eigen::Matrix3d chol = cov.llt().matrixL();

    // resample
    Rng stage_rng = root.split(stage);
    const auto idx = systematic_resample(ens.weights, stage_rng.uniform());
    ++ens.resample_count;
    {
      std::vector<MaterialProperties> p(n);
      std::vector<double> ll(n), tt(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = ens.particles[idx[i]];
        ll[i] = ens.log_likelihood[idx[i]];
        tt[i] = ens.interface_temp[idx[i]];
      }
      ens.particles.swap(p);
      ens.log_likelihood.swap(ll);
      ens.interface_temp.swap(tt);
    }
    std::fill(log_w.begin(), log_w.end(), 0.0);
    std::fill(ens.weights.begin(), ens.weights.end(), 1.0 / static_cast<double>(n));

    // move
    std::vector<MaterialProperties> props(n);
    for (std::size_t m = 0; m < settings.move_steps; ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        const ParamVector v = to_vector(ens.particles[i]);
        const Eigen::Vector3d z(stage_rng.normal(), stage_rng.normal(), stage_rng.normal());
        const Eigen::Vector3d step = chol * z;
        props[i] = {v[0] + step(0), v[1] + step(1), v[2] + step(2)};
      }
      const auto pts = evaluator.evaluate_batch(props);
      for (std::size_t i = 0; i < n; ++i) {
        const double log_u = std::log(stage_rng.uniform());
        ++proposed;
        if (!std::isfinite(pts[i].log_prior)) continue;
        const double current = evaluator.log_prior(ens.particles[i]) + ens.beta * ens.log_likelihood[i];
        const double candidate = pts[i].log_prior + ens.beta * pts[i].log_likelihood;
        if (candidate >= current || log_u < candidate - current) {
          ens.particles[i] = props[i];
          ens.log_likelihood[i] = pts[i].log_likelihood;
          ens.interface_temp[i] = pts[i].interface_temp;
          ++accepted;
        }
      }
    }

    std::set<std::array<double, 3>> distinct;
    for (const MaterialProperties& q : ens.particles) {
      distinct.insert(to_vector(q));
      if (distinct.size() > 1) break;
    }
    if (distinct.size() <= 1) {
      throw NumericalError(fmt::format("SMC ensemble degenerated at stage {} (beta = {}, ESS before resampling = {})",
                                       stage, ens.beta, ens.ess_history.back()));
    }
  }
  ens.move_acceptance = proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  return ens;
}

ParamVector ensemble_mean(const ParticleEnsemble& ensemble) {
  ParamVector m{};
  for (std::size_t i = 0; i < ensemble.particles.size(); ++i) {
    const ParamVector v = to_vector(ensemble.particles[i]);
    for (std::size_t d = 0; d < kParamDim; ++d) m[d] += ensemble.weights[i] * v[d];
  }
  return m;
}

}  // namespace tps::uq

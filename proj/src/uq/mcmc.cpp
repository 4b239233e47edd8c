#include "tps/uq/mcmc.hpp"

#include <cmath>
#include <limits>

#include "tps/error.hpp"
#include "tps/rng.hpp"

namespace tps::uq {

void MhSettings::validate() const {
  if (n_samples == 0) throw InvalidInput("n_samples must be > 0");
  if (tune && tune_every == 0) throw InvalidInput("tune_every must be > 0");
}

RandomWalkResult metropolis_random_walk(const LogTarget& target, std::vector<double> init,
                                        std::vector<double> proposal_std, const MhSettings& settings,
                                        std::uint64_t seed) {
  settings.validate();
  const std::size_t dim = init.size();
  if (dim == 0 || proposal_std.size() != dim) throw InvalidInput("proposal std must match the state dimension");
  for (double s : proposal_std) {
    if (!std::isfinite(s) || !(s > 0.0)) throw InvalidInput("proposal std must be > 0");
  }

  Rng rng(seed);
  std::vector<double> current = std::move(init);
  double current_aux = std::numeric_limits<double>::quiet_NaN();
  double current_lp = target(current, current_aux);
  if (!(current_lp > -std::numeric_limits<double>::infinity()) || std::isnan(current_lp)) {
    throw InvalidInput("initial state has zero posterior density");
  }

  RandomWalkResult out;
  out.dim = dim;
  out.samples.reserve(settings.n_samples * dim);
  out.log_density.reserve(settings.n_samples);
  out.aux.reserve(settings.n_samples);

  std::vector<double> proposal(dim);
  std::size_t window_accepted = 0;
  std::size_t window_steps = 0;
  std::size_t retained_accepted = 0;
  const std::size_t total = settings.burn_in + settings.n_samples;

  for (std::size_t step = 0; step < total; ++step) {
    for (std::size_t d = 0; d < dim; ++d) proposal[d] = current[d] + proposal_std[d] * rng.normal();
    double aux = std::numeric_limits<double>::quiet_NaN();
    const double lp = target(proposal, aux);
    const double log_u = std::log(rng.uniform());
    bool accepted = false;
    // a -inf proposal is never accepted; equal densities always are
    if (lp > -std::numeric_limits<double>::infinity() && (lp >= current_lp || log_u < lp - current_lp)) {
      current.swap(proposal);
      current_lp = lp;
      current_aux = aux;
      accepted = true;
    }

    if (step < settings.burn_in) {
      window_accepted += accepted;
      ++window_steps;
      if (settings.tune && window_steps == settings.tune_every) {
        const double rate = static_cast<double>(window_accepted) / static_cast<double>(window_steps);
        const double factor = rate > 0.5 ? 2.0 : (rate < 0.2 ? 0.5 : 1.0);
        for (double& s : proposal_std) s *= factor;
        window_accepted = 0;
        window_steps = 0;
      }
      continue;
    }
    retained_accepted += accepted;
    out.samples.insert(out.samples.end(), current.begin(), current.end());
    out.log_density.push_back(current_lp);
    out.aux.push_back(current_aux);
  }
  out.acceptance_rate = static_cast<double>(retained_accepted) / static_cast<double>(settings.n_samples);
  out.proposal_std = std::move(proposal_std);
  return out;
}

ParamVector default_proposal_std(const PriorSpec& prior) {
  return {0.1 * prior.rho.std, 0.1 * prior.k.std, 0.1 * prior.cp.std};
}

Chain mh_sample(const PosteriorEvaluator& evaluator, const MaterialProperties& init, const ParamVector& proposal_std,
                const MhSettings& settings, std::uint64_t seed) {
  const LogTarget target = [&evaluator](std::span<const double> x, double& aux) {
    const PosteriorPoint p = evaluator.evaluate({x[0], x[1], x[2]});
    aux = p.interface_temp;
    return p.log_posterior;
  };
  const ParamVector start = to_vector(init);
  RandomWalkResult rw = metropolis_random_walk(target, {start.begin(), start.end()},
                                               {proposal_std.begin(), proposal_std.end()}, settings, seed);
  Chain chain;
  chain.seed = seed;
  chain.burn_in = settings.burn_in;
  chain.acceptance_rate = rw.acceptance_rate;
  for (std::size_t d = 0; d < kParamDim; ++d) chain.proposal_std[d] = rw.proposal_std[d];
  chain.samples.reserve(rw.log_density.size());
  for (std::size_t i = 0; i < rw.log_density.size(); ++i) {
    const double* x = rw.samples.data() + i * kParamDim;
    chain.samples.push_back({{x[0], x[1], x[2]}, rw.log_density[i], rw.aux[i]});
  }
  return chain;
}

}  // namespace tps::uq

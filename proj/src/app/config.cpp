#include "tps/app/config.hpp"

#include <fmt/format.h>

#include "tps/error.hpp"
#include "tps/io/json_reader.hpp"

namespace tps::app {

using io::Json;
using io::ObjectReader;

pinn::TrainingConfig default_training() {
  pinn::TrainingConfig t;
  t.iterations = 2000;
  t.learning_rate = 1e-3;
  t.lr_decay = 0.5;
  t.lr_decay_every = 1000;
  t.resample_every = 1000;
  t.collocation = {4000, 800, 800, 800};
  t.lbfgs.iterations = 30000;
  t.lbfgs.resample_every = 2000;
  return t;
}

namespace {

template <class F>
void with_prefix(const std::string& prefix, F&& check) {
  try {
    check();
  } catch (const InvalidInput& e) {
    throw ConfigError(prefix + "." + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + "." + e.what());
  }
}

void read_truncated(ObjectReader& r, const std::string& key, uq::TruncatedNormal& d) {
  if (!r.has(key)) {
    r.child(key);
    return;
  }
  ObjectReader c = r.child(key);
  c.read("mean", d.mean);
  c.read("std", d.std);
  d.lo = 0.5 * d.mean;
  d.hi = 1.5 * d.mean;
  c.read("lo", d.lo);
  c.read("hi", d.hi);
  c.finish();
}

std::optional<pinn::Range> read_range(ObjectReader& r, const std::string& key) {
  if (!r.has(key)) return std::nullopt;
  const auto v = r.require<std::vector<double>>(key);
  if (v.size() != 2) throw ConfigError(r.path_of(key) + ": expected [lo, hi]");
  return pinn::Range{v[0], v[1]};
}

Json truncated_json(const uq::TruncatedNormal& d) {
  return {{"mean", d.mean}, {"std", d.std}, {"lo", d.lo}, {"hi", d.hi}};
}

}  // namespace

void RunConfig::validate() const {
  with_prefix("scenario", [&] { scenario.validate(); });
  with_prefix("grid", [&] {
    grid.validate();
    grid.steps_for(scenario.duration);
    grid.steps_for(scenario.eval_time);
  });
  with_prefix("prior", [&] { prior.validate(); });
  with_prefix("likelihood", [&] { uq::make_likelihood(scenario.threshold, likelihood.sigma, likelihood.reliability); });
  with_prefix("network", [&] {
    network.architecture.validate();
    if (!(network.temp_scale > 0.0) || !std::isfinite(network.temp_scale)) {
      throw InvalidInput("temp_scale must be > 0");
    }
  });
  with_prefix("network.ranges", [&] { normalization(); });
  with_prefix("training.loss_weights", [&] { loss_weights.validate(); });
  with_prefix("training", [&] { training.validate(); });
  with_prefix("sampler", [&] {
    sampler.mh.validate();
    sampler.smc.validate();
    if (sampler.max_fd == 0) throw InvalidInput("max_fd must be > 0");
    if (sampler.proposal_std) {
      for (double s : *sampler.proposal_std) {
        if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("proposal_std entries must be > 0");
      }
    }
  });
  if (threads == 0) throw ConfigError("threads must be >= 1");
}

pinn::NormalizationSpec RunConfig::normalization() const {
  const auto pick = [](const std::optional<pinn::Range>& r, const uq::TruncatedNormal& d) {
    return r ? *r : pinn::three_sigma_range(d.mean, d.std);
  };
  return pinn::NormalizationSpec::for_scenario(scenario, pick(network.rho, prior.rho), pick(network.k, prior.k),
                                               pick(network.cp, prior.cp), network.temp_scale);
}

uq::LikelihoodSpec RunConfig::likelihood_spec() const {
  return uq::make_likelihood(scenario.threshold, likelihood.sigma, likelihood.reliability);
}

uq::PriorSpec RunConfig::prior_spec() const {
  uq::PriorSpec p = prior;
  p.flat = sampler.flat_prior;
  return p;
}

RunConfig config_from_json(const Json& doc) {
  RunConfig c;
  c.training = default_training();
  ObjectReader root(doc, "");
  root.read("seed", c.seed);
  root.read("threads", c.threads);
  {
    ObjectReader s = root.child("scenario");
    s.read("thickness", c.scenario.thickness);
    s.read("heat_flux", c.scenario.heat_flux);
    s.read("duration", c.scenario.duration);
    s.read("initial_temp", c.scenario.initial_temp);
    s.read("threshold", c.scenario.threshold);
    s.read("eval_time", c.scenario.eval_time);
    s.finish();
  }
  {
    ObjectReader g = root.child("grid");
    g.read("nx", c.grid.nx);
    g.read("dt", c.grid.dt);
    g.finish();
  }
  {
    ObjectReader p = root.child("prior");
    read_truncated(p, "rho", c.prior.rho);
    read_truncated(p, "k", c.prior.k);
    read_truncated(p, "cp", c.prior.cp);
    p.finish();
  }
  {
    ObjectReader l = root.child("likelihood");
    l.read("sigma", c.likelihood.sigma);
    l.read("reliability", c.likelihood.reliability);
    l.finish();
  }
  {
    ObjectReader n = root.child("network");
    n.read("hidden", c.network.architecture.hidden);
    n.read("temp_scale", c.network.temp_scale);
    ObjectReader r = n.child("ranges");
    c.network.rho = read_range(r, "rho");
    c.network.k = read_range(r, "k");
    c.network.cp = read_range(r, "cp");
    r.finish();
    n.finish();
  }
  {
    pinn::TrainingConfig& t = c.training;
    ObjectReader tr = root.child("training");
    tr.read("learning_rate", t.learning_rate);
    tr.read("lr_decay", t.lr_decay);
    tr.read("lr_decay_every", t.lr_decay_every);
    tr.read("iterations", t.iterations);
    tr.read("resample_every", t.resample_every);
    tr.read("log_every", t.log_every);
    tr.read("chunk_size", t.loss_options.chunk_size);
    ObjectReader a = tr.child("adam");
    a.read("beta1", t.adam.beta1);
    a.read("beta2", t.adam.beta2);
    a.read("epsilon", t.adam.epsilon);
    a.finish();
    ObjectReader lb = tr.child("lbfgs");
    lb.read("iterations", t.lbfgs.iterations);
    lb.read("memory", t.lbfgs.memory);
    lb.read("max_line_search", t.lbfgs.max_line_search);
    lb.read("resample_every", t.lbfgs.resample_every);
    lb.finish();
    ObjectReader co = tr.child("collocation");
    co.read("interior", t.collocation.interior);
    co.read("initial", t.collocation.initial);
    co.read("interface", t.collocation.interface);
    co.read("surface", t.collocation.surface);
    co.finish();
    ObjectReader w = tr.child("loss_weights");
    w.read("pde", c.loss_weights.pde);
    w.read("ic", c.loss_weights.ic);
    w.read("bc_interface", c.loss_weights.bc_interface);
    w.read("bc_surface", c.loss_weights.bc_surface);
    w.finish();
    tr.finish();
  }
  {
    SamplerConfig& sc = c.sampler;
    ObjectReader s = root.child("sampler");
    std::string method = "mh";
    s.read("method", method);
    if (method == "mh") sc.method = SamplerMethod::mh;
    else if (method == "smc") sc.method = SamplerMethod::smc;
    else throw ConfigError("sampler.method: expected \"mh\" or \"smc\"");
    s.read("n_samples", sc.mh.n_samples);
    s.read("burn_in", sc.mh.burn_in);
    s.read("tune_every", sc.mh.tune_every);
    s.read("tune", sc.mh.tune);
    if (s.has("proposal_std")) {
      const auto v = s.require<std::vector<double>>("proposal_std");
      if (v.size() != uq::kParamDim) throw ConfigError("sampler.proposal_std: expected [rho, k, cp]");
      sc.proposal_std = uq::ParamVector{v[0], v[1], v[2]};
    } else {
      s.raw("proposal_std");
    }
    s.read("n_particles", sc.smc.n_particles);
    s.read("ess_fraction", sc.smc.ess_fraction);
    s.read("move_steps", sc.smc.move_steps);
    s.read("max_stages", sc.smc.max_stages);
    s.read("max_fd", sc.max_fd);
    s.read("flat_prior", sc.flat_prior);
    s.finish();
  }
  root.finish();
  c.training.seed = c.seed;
  c.training.loss_options.threads = c.threads;
  c.validate();
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json doc;
  doc["seed"] = c.seed;
  doc["threads"] = c.threads;
  const auto& s = c.scenario;
  doc["scenario"] = {{"thickness", s.thickness},     {"heat_flux", s.heat_flux}, {"duration", s.duration},
                     {"initial_temp", s.initial_temp}, {"threshold", s.threshold}, {"eval_time", s.eval_time}};
  doc["grid"] = {{"nx", c.grid.nx}, {"dt", c.grid.dt}};
  doc["prior"] = {{"rho", truncated_json(c.prior.rho)},
                  {"k", truncated_json(c.prior.k)},
                  {"cp", truncated_json(c.prior.cp)}};
  doc["likelihood"] = {{"sigma", c.likelihood.sigma}, {"reliability", c.likelihood.reliability}};
  Json ranges = Json::object();
  if (c.network.rho) ranges["rho"] = {c.network.rho->lo, c.network.rho->hi};
  if (c.network.k) ranges["k"] = {c.network.k->lo, c.network.k->hi};
  if (c.network.cp) ranges["cp"] = {c.network.cp->lo, c.network.cp->hi};
  doc["network"] = {{"hidden", c.network.architecture.hidden}, {"temp_scale", c.network.temp_scale},
                    {"ranges", ranges}};
  const auto& t = c.training;
  doc["training"] = {
      {"learning_rate", t.learning_rate},
      {"lr_decay", t.lr_decay},
      {"lr_decay_every", t.lr_decay_every},
      {"iterations", t.iterations},
      {"resample_every", t.resample_every},
      {"log_every", t.log_every},
      {"chunk_size", t.loss_options.chunk_size},
      {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}}},
      {"lbfgs",
       {{"iterations", t.lbfgs.iterations}, {"memory", t.lbfgs.memory}, {"max_line_search", t.lbfgs.max_line_search},
                                  {"resample_every", t.lbfgs.resample_every}}},
      {"collocation",
       {{"interior", t.collocation.interior},
        {"initial", t.collocation.initial},
        {"interface", t.collocation.interface},
        {"surface", t.collocation.surface}}},
      {"loss_weights",
       {{"pde", c.loss_weights.pde},
        {"ic", c.loss_weights.ic},
        {"bc_interface", c.loss_weights.bc_interface},
        {"bc_surface", c.loss_weights.bc_surface}}}};
  const auto& sc = c.sampler;
  Json sampler = {{"method", sc.method == SamplerMethod::mh ? "mh" : "smc"},
                  {"n_samples", sc.mh.n_samples},
                  {"burn_in", sc.mh.burn_in},
                  {"tune_every", sc.mh.tune_every},
                  {"tune", sc.mh.tune},
                  {"n_particles", sc.smc.n_particles},
                  {"ess_fraction", sc.smc.ess_fraction},
                  {"move_steps", sc.smc.move_steps},
                  {"max_stages", sc.smc.max_stages},
                  {"max_fd", sc.max_fd},
                  {"flat_prior", sc.flat_prior}};
  if (sc.proposal_std) sampler["proposal_std"] = *sc.proposal_std;
  doc["sampler"] = sampler;
  return doc;
}

RunConfig load_config(const std::string& path) { return config_from_json(io::read_json_file(path)); }

std::string config_hash(const RunConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace tps::app

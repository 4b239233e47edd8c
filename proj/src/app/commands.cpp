#include "tps/app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>

#include <fmt/format.h>

#include "tps/error.hpp"
#include "tps/io/csv.hpp"
#include "tps/io/json_reader.hpp"
#include "tps/pinn/model_io.hpp"
#include "tps/pinn/validate.hpp"
#include "tps/rng.hpp"
#include "tps/thermal/analytic.hpp"
#include "tps/thermal/solver.hpp"
#include "tps/uq/reliability.hpp"
#include "tps/uq/stats.hpp"

namespace tps::app {

namespace fs = std::filesystem;
using io::Json;

namespace {

constexpr std::size_t kMaxFieldRows = 2000;
constexpr std::size_t kValidationSamples = 20;
constexpr int kAnalyticTerms = 100;

// Seed streams per command so that commands sharing one seed draw independently.
enum Stream : std::uint64_t { validate_stream = 11, sample_stream = 12, verify_stream = 13 };

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

RunSummary start(const std::string& command, const RunConfig& config) {
  RunSummary s;
  s.command = command;
  s.config_hash = config_hash(config);
  return s;
}

void finish(RunSummary& summary, const ArtifactPaths& paths) {
  const std::string path = paths.summary(summary.command);
  summary.artifacts.push_back(path);
  io::write_json_file(path, summary.to_json());
}

std::size_t field_stride(std::size_t steps) {
  return std::max<std::size_t>(1, (steps + kMaxFieldRows - 2) / (kMaxFieldRows - 1));
}

// Output time steps: every stride-th step, the last step always included.
std::vector<std::size_t> field_rows(std::size_t steps) {
  std::vector<std::size_t> rows;
  const std::size_t stride = field_stride(steps);
  for (std::size_t n = 0; n <= steps; n += stride) rows.push_back(n);
  if (rows.back() != steps) rows.push_back(steps);
  return rows;
}

std::vector<std::string> field_header(std::size_t nx, double length) {
  std::vector<std::string> header{"t"};
  for (std::size_t i = 0; i < nx; ++i) {
    header.push_back(fmt::format("{}", length * static_cast<double>(i) / static_cast<double>(nx - 1)));
  }
  return header;
}

void require_artifact(const std::string& path, const std::string& producer) {
  if (!fs::exists(path)) throw IoError(fmt::format("{} not found; run `{}` first", path, producer));
}

pinn::NetworkModel load_trained(const RunConfig& config, const ArtifactPaths& paths) {
  require_artifact(paths.model(), "train");
  pinn::NetworkModel model = pinn::load_model(paths.model());
  if (!(model.scenario == config.scenario)) {
    throw ConfigError(paths.model() + " was trained for a different scenario; run `train` again");
  }
  return model;
}

Json props_json(const uq::MaterialProperties& q) { return {{"rho", q.rho}, {"k", q.k}, {"cp", q.cp}}; }

Json vector_json(const uq::ParamVector& v) { return {{"rho", v[0]}, {"k", v[1]}, {"cp", v[2]}}; }

void write_chain(const std::string& path, const std::vector<uq::ChainSample>& samples) {
  io::CsvWriter csv(path, {"rho", "k", "cp", "log_posterior", "T_interface"});
  for (const uq::ChainSample& s : samples) csv.row({s.q.rho, s.q.k, s.q.cp, s.log_posterior, s.interface_temp});
  csv.close();
}

uq::ParamVector sample_mean(const std::vector<uq::ChainSample>& samples) {
  uq::ParamVector m{};
  for (const auto& s : samples) {
    const auto v = uq::to_vector(s.q);
    for (std::size_t d = 0; d < uq::kParamDim; ++d) m[d] += v[d];
  }
  for (double& x : m) x /= static_cast<double>(samples.size());
  return m;
}

}  // namespace

Json RunSummary::to_json() const {
  return {{"command", command}, {"config_hash", config_hash}, {"phases", phases}, {"metrics", metrics},
          {"artifacts", artifacts}};
}

ArtifactPaths::ArtifactPaths(std::string d) : dir(std::move(d)) {
  if (dir.empty()) dir = ".";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

RunSummary cmd_solve(const RunConfig& config, const std::string& out_dir) {
  const ArtifactPaths paths(out_dir);
  RunSummary summary = start("solve", config);
  Stopwatch clock;
  const uq::MaterialProperties props{config.prior.rho.mean, config.prior.k.mean, config.prior.cp.mean};
  const thermal::TemperatureField field = thermal::solve_fd(config.scenario, props, config.grid);
  summary.phases["solve"] = clock.lap();

  io::CsvWriter fcsv(paths.field(), field_header(field.nodes(), config.scenario.thickness));
  std::vector<double> row(field.nodes() + 1);
  for (std::size_t n : field_rows(field.steps())) {
    row[0] = field.time(n);
    for (std::size_t i = 0; i < field.nodes(); ++i) row[i + 1] = field.at(i, n);
    fcsv.row(row);
  }
  fcsv.close();
  const thermal::InterfaceSeries series = thermal::interface_series(field);
  io::CsvWriter icsv(paths.interface(), {"t", "T_interface"});
  for (const auto& [t, temp] : series.points) icsv.row({t, temp});
  icsv.close();
  summary.phases["write"] = clock.lap();

  summary.metrics["properties"] = props_json(props);
  summary.metrics["interface_at_eval"] = series.at_eval;
  summary.metrics["interface_max"] = series.max_temp;
  summary.metrics["surface_at_end"] = field.at(field.nodes() - 1, field.steps());
  summary.metrics["enthalpy_balance_at_end"] = thermal::enthalpy_balance(field, props, config.scenario,
                                                                         config.scenario.duration);
  summary.artifacts = {paths.field(), paths.interface()};
  finish(summary, paths);
  return summary;
}

RunSummary cmd_analytic(const RunConfig& config, const std::string& out_dir) {
  const ArtifactPaths paths(out_dir);
  RunSummary summary = start("analytic", config);
  Stopwatch clock;
  const uq::MaterialProperties props{config.prior.rho.mean, config.prior.k.mean, config.prior.cp.mean};
  const auto& sc = config.scenario;
  const std::size_t steps = config.grid.steps_for(sc.duration);
  const double dx = sc.thickness / static_cast<double>(config.grid.nx - 1);
  // the series converges slowly at t = 0, where the exact value is known
  const auto value = [&](double x, double t) {
    return t == 0.0 ? sc.initial_temp : thermal::analytic_slab_flux(sc, props, x, t, kAnalyticTerms);
  };

  io::CsvWriter fcsv(paths.analytic_field(), field_header(config.grid.nx, sc.thickness));
  std::vector<double> row(config.grid.nx + 1);
  for (std::size_t n : field_rows(steps)) {
    const double t = static_cast<double>(n) * config.grid.dt;
    row[0] = t;
    for (std::size_t i = 0; i < config.grid.nx; ++i) {
      row[i + 1] = value(std::min(static_cast<double>(i) * dx, sc.thickness), t);
    }
    fcsv.row(row);
  }
  fcsv.close();
  io::CsvWriter icsv(paths.analytic_interface(), {"t", "T_interface"});
  for (std::size_t n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * config.grid.dt;
    icsv.row({t, value(0.0, t)});
  }
  icsv.close();
  summary.phases["evaluate"] = clock.lap();
  summary.metrics["properties"] = props_json(props);
  summary.metrics["series_terms"] = kAnalyticTerms;
  summary.metrics["interface_at_eval"] = value(0.0, sc.eval_time);
  summary.artifacts = {paths.analytic_field(), paths.analytic_interface()};
  finish(summary, paths);
  return summary;
}

RunSummary cmd_train(const RunConfig& config, const std::string& out_dir, std::ostream* log) {
  const ArtifactPaths paths(out_dir);
  RunSummary summary = start("train", config);
  const pinn::NormalizationSpec norm = config.normalization();
  pinn::TrainingConfig tc = config.training;
  tc.seed = config.seed;
  tc.loss_options.threads = config.threads;
  const pinn::TrainingObserver observer = [log](const pinn::HistoryEntry& h) {
    if (log == nullptr) return;
    *log << fmt::format("step {:>6}  loss {:.4e}  pde {:.3e}  ic {:.3e}  bc0 {:.3e}  bcL {:.3e}\n", h.step,
                        h.mean.total, h.mean.pde, h.mean.ic, h.mean.bc_interface, h.mean.bc_surface)
         << std::flush;
  };
  pinn::TrainingResult result =
      pinn::train(config.network.architecture, norm, config.loss_weights, tc, config.scenario, observer);
  summary.phases["train"] = result.report.wall_seconds;

  pinn::save_model(paths.model(), {result.params, norm, config.scenario});
  io::CsvWriter csv(paths.history(), {"step", "total", "pde", "ic", "bc_interface", "bc_surface"});
  for (const pinn::HistoryEntry& h : result.report.history) {
    csv.row({static_cast<double>(h.step), h.mean.total, h.mean.pde, h.mean.ic, h.mean.bc_interface,
             h.mean.bc_surface});
  }
  csv.close();

  const auto& f = result.report.final_loss;
  summary.metrics["final_loss"] = {{"total", f.total}, {"pde", f.pde}, {"ic", f.ic},
                                   {"bc_interface", f.bc_interface}, {"bc_surface", f.bc_surface}};
  summary.metrics["adam_iterations"] = tc.iterations;
  summary.metrics["lbfgs_iterations"] = tc.lbfgs.iterations;
  summary.metrics["parameters"] = result.params.flat().size();
  summary.metrics["seed"] = result.report.seed;
  summary.artifacts = {paths.model(), paths.history()};
  finish(summary, paths);
  return summary;
}

RunSummary cmd_validate(const RunConfig& config, const std::string& out_dir) {
  const ArtifactPaths paths(out_dir);
  RunSummary summary = start("validate", config);
  Stopwatch clock;
  const pinn::NetworkModel model = load_trained(config, paths);

  const uq::PriorSpec prior = config.prior;
  std::vector<uq::MaterialProperties> samples{{prior.rho.mean, prior.k.mean, prior.cp.mean}};
  Rng rng = Rng(config.seed).split(validate_stream);
  for (std::size_t i = 0; i < kValidationSamples; ++i) samples.push_back(uq::sample_prior(prior, rng));

  const pinn::ValidationReport report =
      pinn::validate_against_fd(model.params, model.norm, config.scenario, samples, config.grid);
  summary.phases["validate"] = clock.lap();

  io::CsvWriter csv(paths.validation(), {"sample", "rho", "k", "cp", "max_abs_error", "worst_x", "worst_t",
                                         "poi_surrogate", "poi_reference", "poi_error", "clamped"});
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const pinn::SampleValidation& s = report.samples[i];
    csv.row({static_cast<double>(i), s.props.rho, s.props.k, s.props.cp, s.max_abs_error, s.worst_x, s.worst_t,
             s.poi_surrogate, s.poi_reference, s.poi_error, s.clamped ? 1.0 : 0.0});
  }
  csv.close();

  double max_prior = 0.0;
  std::size_t clamped = 0;
  for (std::size_t i = 1; i < report.samples.size(); ++i) {
    max_prior = std::max(max_prior, report.samples[i].max_abs_error);
    clamped += report.samples[i].clamped;
  }
  summary.metrics["poi_error_nominal"] = report.samples[0].poi_error;
  summary.metrics["max_domain_error_nominal"] = report.samples[0].max_abs_error;
  summary.metrics["max_domain_error_prior_samples"] = max_prior;
  summary.metrics["max_poi_error"] = report.max_poi_error;
  summary.metrics["mean_poi_error"] = report.mean_poi_error;
  summary.metrics["prior_samples"] = kValidationSamples;
  summary.metrics["clamped_samples"] = clamped;
  summary.metrics["lattice"] = report.lattice;
  summary.artifacts = {paths.validation()};
  finish(summary, paths);
  return summary;
}

RunSummary cmd_sample(const RunConfig& config, const std::string& out_dir) {
  const ArtifactPaths paths(out_dir);
  RunSummary summary = start("sample", config);
  Stopwatch clock;
  const pinn::NetworkModel model = load_trained(config, paths);
  const uq::SurrogateModel surrogate(model.params, model.norm, config.scenario);
  const uq::PriorSpec prior = config.prior_spec();
  const uq::LikelihoodSpec lik = config.likelihood_spec();
  const uq::PosteriorEvaluator evaluator(surrogate, prior, lik);
  const std::uint64_t seed = derive_seed(config.seed, sample_stream);
  summary.metrics["likelihood_mu"] = lik.mu;
  summary.metrics["flat_prior"] = prior.flat;

  std::vector<uq::ChainSample> samples;
  if (config.sampler.method == SamplerMethod::mh) {
    const uq::ParamVector proposal = config.sampler.proposal_std.value_or(uq::default_proposal_std(prior));
    const uq::Chain chain = uq::mh_sample(evaluator, {prior.rho.mean, prior.k.mean, prior.cp.mean}, proposal,
                                          config.sampler.mh, seed);
    summary.phases["sample"] = clock.lap();
    samples = chain.samples;
    summary.metrics["method"] = "mh";
    summary.metrics["acceptance_rate"] = chain.acceptance_rate;
    summary.metrics["proposal_std"] = vector_json(chain.proposal_std);
    summary.metrics["burn_in"] = chain.burn_in;
  } else {
    const uq::ParticleEnsemble ens = uq::smc_sample(evaluator, config.sampler.smc, seed);
    summary.phases["sample"] = clock.lap();
    summary.metrics["method"] = "smc";
    // after the last resample-move the ensemble is equally weighted
    for (std::size_t i = 0; i < ens.particles.size(); ++i) {
      const double lp = uq::log_prior(ens.particles[i], prior) + ens.log_likelihood[i];
      samples.push_back({ens.particles[i], lp, ens.interface_temp[i]});
    }
    io::CsvWriter csv(paths.smc_stages(), {"stage", "beta", "ess"});
    for (std::size_t s = 0; s < ens.betas.size(); ++s) {
      csv.row({static_cast<double>(s + 1), ens.betas[s], ens.ess_history[s]});
    }
    csv.close();
    summary.metrics["stages"] = ens.betas.size();
    summary.metrics["final_beta"] = ens.beta;
    summary.metrics["final_ess"] = ens.ess_history.back();
    summary.metrics["ess_history"] = ens.ess_history;
    summary.metrics["move_acceptance"] = ens.move_acceptance;
    summary.artifacts.push_back(paths.smc_stages());
  }
  write_chain(paths.chain(), samples);
  summary.artifacts.push_back(paths.chain());

  std::vector<double> temps;
  temps.reserve(samples.size());
  for (const auto& s : samples) temps.push_back(s.interface_temp);
  const uq::ReliabilityReport rel = uq::reliability_of_temperatures(temps, config.scenario.threshold, "surrogate");
  summary.metrics["samples"] = samples.size();
  summary.metrics["posterior_mean"] = vector_json(sample_mean(samples));
  summary.metrics["r_hat_surrogate"] = rel.r_hat;
  summary.phases["write"] = clock.lap();
  finish(summary, paths);
  return summary;
}

RunSummary cmd_verify(const RunConfig& config, const std::string& out_dir) {
  const ArtifactPaths paths(out_dir);
  RunSummary summary = start("verify", config);
  Stopwatch clock;
  require_artifact(paths.chain(), "sample");
  const io::CsvTable table = io::read_csv(paths.chain());
  const std::vector<std::string> expected{"rho", "k", "cp", "log_posterior", "T_interface"};
  if (table.header != expected) throw ConfigError(paths.chain() + ": expected columns rho,k,cp,log_posterior,T_interface");
  if (table.rows.empty()) throw InvalidInput(paths.chain() + " holds no samples");

  std::vector<uq::MaterialProperties> samples;
  std::vector<double> surrogate_temps;
  for (const auto& r : table.rows) {
    samples.push_back({r[0], r[1], r[2]});
    surrogate_temps.push_back(r[4]);
  }
  const uq::ReliabilityReport fd =
      uq::cross_verify(samples, config.scenario, config.grid, config.scenario.threshold, config.sampler.max_fd,
                       derive_seed(config.seed, verify_stream));
  summary.phases["verify"] = clock.lap();

  std::vector<double> paired;
  io::CsvWriter csv(paths.verification(), {"rho", "k", "cp", "T_fd", "T_surrogate", "below_threshold"});
  for (std::size_t j = 0; j < fd.n; ++j) {
    const std::size_t i = fd.indices[j];
    paired.push_back(surrogate_temps[i]);
    const bool ok = fd.temperatures[j] < config.scenario.threshold;
    csv.row({samples[i].rho, samples[i].k, samples[i].cp, fd.temperatures[j], surrogate_temps[i], ok ? 1.0 : 0.0});
  }
  csv.close();
  const uq::ReliabilityReport sur_subset =
      uq::reliability_of_temperatures(paired, config.scenario.threshold, "surrogate");
  double max_gap = 0.0;
  for (std::size_t j = 0; j < fd.n; ++j) max_gap = std::max(max_gap, std::abs(fd.temperatures[j] - paired[j]));

  const uq::ReliabilityReport sur =
      uq::reliability_of_temperatures(surrogate_temps, config.scenario.threshold, "surrogate");
  summary.metrics["n"] = fd.n;
  summary.metrics["population"] = fd.population;
  summary.metrics["subsampled"] = fd.subsampled;
  summary.metrics["r_hat_fd"] = fd.r_hat;
  summary.metrics["r_hat_surrogate"] = sur.r_hat;
  summary.metrics["r_hat_surrogate_subsample"] = sur_subset.r_hat;
  summary.metrics["max_surrogate_gap"] = max_gap;
  summary.metrics["n_ok_fd"] = fd.n_ok;
  summary.artifacts = {paths.verification()};
  finish(summary, paths);
  return summary;
}

RunSummary cmd_bench(const RunConfig& config, const std::string& out_dir) {
  const ArtifactPaths paths(out_dir);
  RunSummary summary = start("bench", config);
  constexpr std::size_t kBatch = 1000;
  constexpr double kMinSeconds = 0.5;

  pinn::NetworkModel model{pinn::init_params(config.network.architecture, config.seed), config.normalization(),
                           config.scenario};
  const bool trained = fs::exists(paths.model());
  if (trained) model = load_trained(config, paths);
  const uq::PriorSpec prior = config.prior_spec();
  const uq::LikelihoodSpec lik = config.likelihood_spec();
  const uq::SurrogateModel surrogate(model.params, model.norm, config.scenario);
  const uq::PosteriorEvaluator fast(surrogate, prior, lik);
  const uq::FdModel fd_model(config.scenario, config.grid);
  const uq::PosteriorEvaluator slow(fd_model, prior, lik);

  Rng rng(config.seed);
  std::vector<uq::MaterialProperties> batch;
  for (std::size_t i = 0; i < kBatch; ++i) batch.push_back(uq::sample_prior(prior, rng));

  // repeat until the timed region is long enough to be meaningful
  const auto time_per_item = [&](auto&& body, std::size_t items_per_call, std::size_t min_calls) {
    std::size_t calls = 0;
    const auto t0 = std::chrono::steady_clock::now();
    double elapsed = 0.0;
    while (calls < min_calls || elapsed < kMinSeconds) {
      body(calls);
      ++calls;
      elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return elapsed / static_cast<double>(calls * items_per_call);
  };

  double sink = 0.0;
  const double surrogate_each = time_per_item(
      [&](std::size_t) {
        const auto pts = fast.evaluate_batch(batch);
        sink += pts.front().log_posterior;
      },
      kBatch, 3);
  const double solve_each = time_per_item(
      [&](std::size_t c) {
        const auto field = thermal::solve_fd(config.scenario, batch[c % kBatch], config.grid);
        sink += field.at(0, field.steps());
      },
      1, 3);
  const double fd_posterior_each = time_per_item(
      [&](std::size_t c) { sink += slow.evaluate(batch[c % kBatch]).log_posterior; }, 1, 3);

  if (!std::isfinite(sink)) throw NumericalError("benchmark produced a non-finite value");
  summary.metrics["trained_model"] = trained;
  summary.metrics["batch_size"] = kBatch;
  summary.metrics["surrogate_seconds_per_sample"] = surrogate_each;
  summary.metrics["solve_fd_seconds_per_sample"] = solve_each;
  summary.metrics["fd_posterior_seconds_per_sample"] = fd_posterior_each;
  summary.metrics["speedup_vs_solve_fd"] = solve_each / surrogate_each;
  summary.metrics["speedup_vs_fd_posterior"] = fd_posterior_each / surrogate_each;
  finish(summary, paths);
  return summary;
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::invalid_input:
      case ErrorKind::config: return 1;
      case ErrorKind::io: return 2;
      case ErrorKind::numerical: return 3;
    }
  }
  return 1;
}

}  // namespace tps::app

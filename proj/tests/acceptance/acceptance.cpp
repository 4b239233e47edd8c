// End-to-end acceptance run on the default scenario. Prints one PASS/FAIL line
// per criterion and exits non-zero if any criterion fails.
//
//   tps_acceptance [out_dir] [--reuse-model]
//
// --reuse-model skips training when out_dir already holds a model trained with
// the default configuration; criterion 3 then reports the stored training time.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "tps/ad/dual.hpp"
#include "tps/ad/input_derivs.hpp"
#include "tps/app/commands.hpp"
#include "tps/app/config.hpp"
#include "tps/io/csv.hpp"
#include "tps/pinn/loss.hpp"
#include "tps/pinn/model_io.hpp"
#include "tps/pinn/validate.hpp"
#include "tps/rng.hpp"
#include "tps/thermal/analytic.hpp"
#include "tps/thermal/solver.hpp"
#include "tps/uq/mcmc.hpp"
#include "tps/uq/stats.hpp"

namespace fs = std::filesystem;
using namespace tps;

namespace {

struct Verdict {
  bool pass{false};
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict solver_fidelity(const app::RunConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const thermal::TemperatureField f = thermal::solve_fd(c.scenario, {}, c.grid);
  const double runtime = seconds_since(t0);
  double worst = 0.0;
  for (std::size_t n = 0; n <= f.steps(); ++n) {
    for (std::size_t i = 0; i < f.nodes(); ++i) {
      const double exact = n == 0 ? c.scenario.initial_temp
                                  : thermal::analytic_slab_flux(c.scenario, {}, f.x(i), f.time(n), 100);
      worst = std::max(worst, std::abs(f.at(i, n) - exact));
    }
  }
  return {worst < 0.5 && runtime < 1.0, fmt::format("max error {:.4f} K, solve {:.3f} s", worst, runtime)};
}

Verdict autodiff(const app::RunConfig& c) {
  double worst_input = 0.0;
  double worst_param = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    pinn::NetworkArchitecture arch;
    arch.hidden = {16, 16};
    const pinn::NormalizationSpec norm = c.normalization();
    const pinn::NetworkParameters p = pinn::init_params(arch, seed);
    // unit box and unit output scale so differencing is not swamped by rounding of the affine maps
    pinn::NormalizationSpec unit_norm;
    unit_norm.inputs.fill(pinn::Range{-1.0, 1.0});
    unit_norm.initial_temp = 0.0;
    unit_norm.temp_scale = 1.0;
    const ad::ScalarField field = pinn::network_field(p, unit_norm);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int k = 0; k < 20; ++k) {
      const std::vector<double> pt{u(rng), u(rng), u(rng), u(rng), u(rng)};
      worst_input = std::max(worst_input, ad::fd_check(field, pt, 1e-4));
    }
    const pinn::CollocationSet colloc = pinn::sample_collocation(norm, {60, 20, 20, 20}, seed + 10);
    const pinn::LossResult r = pinn::loss_and_grad(p, norm, c.loss_weights, colloc, c.scenario);
    for (int k = 0; k < 20; ++k) {
      const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(p.flat().size()));
      const double h = 1e-4;
      pinn::NetworkParameters plus = p, minus = p;
      plus.flat()[i] += h;
      minus.flat()[i] -= h;
      const double fd =
          (pinn::field_loss(pinn::network_field(plus, norm), norm, c.loss_weights, colloc, c.scenario).total -
           pinn::field_loss(pinn::network_field(minus, norm), norm, c.loss_weights, colloc, c.scenario).total) /
          (2 * h);
      worst_param = std::max(worst_param, std::abs(fd - r.gradient[i]) / std::max({std::abs(fd), std::abs(r.gradient[i]), 1e-8}));
    }
  }
  double worst_manufactured = 0.0;
  const double cst = 3.25;
  const ad::ScalarField linear_t = [cst](std::span<const ad::Dual2> p) { return 25.0 + cst * p[1]; };
  const ad::ScalarField half_x2 = [](std::span<const ad::Dual2> p) { return 25.0 + 0.5 * p[0] * p[0]; };
  for (double alpha : {1e-7, 6.25e-6, 1e-3}) {
    const std::vector<double> pt{0.013, 42.0};
    worst_manufactured = std::max(worst_manufactured, std::abs(pinn::pde_residual(linear_t, pt, alpha) - cst) / cst);
    worst_manufactured = std::max(worst_manufactured, std::abs(pinn::pde_residual(half_x2, pt, alpha) + alpha) / alpha);
  }
  return {worst_input < 1e-5 && worst_param < 1e-5 && worst_manufactured <= 1e-12,
          fmt::format("input derivs {:.2e}, parameter gradient {:.2e}, manufactured residuals {:.2e}", worst_input,
                      worst_param, worst_manufactured)};
}

Verdict pinn_validation(const app::RunConfig& c, const std::string& dir, bool reuse) {
  double train_seconds = 0.0;
  const fs::path model = fs::path(dir) / "model.json";
  const fs::path train_summary = fs::path(dir) / "summary_train.json";
  bool reused = false;
  if (reuse && fs::exists(model) && fs::exists(train_summary)) {
    const auto j = nlohmann::json::parse(slurp(train_summary));
    if (j.at("config_hash") == app::config_hash(c)) {
      train_seconds = j.at("phases").at("train").get<double>();
      reused = true;
    }
  }
  if (!reused) {
    const app::RunSummary s = app::cmd_train(c, dir, &std::cerr);
    train_seconds = s.phases.at("train").get<double>();
  }
  const app::RunSummary v = app::cmd_validate(c, dir);
  const double poi = v.metrics.at("poi_error_nominal").get<double>();
  const double worst = v.metrics.at("max_domain_error_prior_samples").get<double>();
  return {poi < 2.0 && worst <= 30.0 && train_seconds <= 1800.0,
          fmt::format("poi error {:.3f} K (< 2), max domain error {:.2f} K over 20 prior samples (<= 30), training "
                      "{:.0f} s (<= 1800){}",
                      poi, worst, train_seconds, reused ? " [stored]" : "")};
}

struct MhOutcome {
  Verdict verdict;
  std::vector<double> means;
};

std::vector<double> chain_means(const std::string& path) {
  const io::CsvTable t = io::read_csv(path);
  std::vector<double> m(3, 0.0);
  for (const auto& row : t.rows) {
    for (std::size_t d = 0; d < 3; ++d) m[d] += row[d] / static_cast<double>(t.rows.size());
  }
  return m;
}

MhOutcome statistical_design(app::RunConfig c, const std::string& dir) {
  c.sampler.method = app::SamplerMethod::mh;
  const auto t0 = std::chrono::steady_clock::now();
  const app::RunSummary s = app::cmd_sample(c, dir);
  const app::RunSummary v = app::cmd_verify(c, dir);
  const double runtime = seconds_since(t0);
  const double r_fd = v.metrics.at("r_hat_fd").get<double>();
  const auto n = s.metrics.at("samples").get<std::size_t>();
  return {{r_fd >= 90.0 && runtime <= 600.0 && n == 20000,
           fmt::format("R_hat FD {:.1f}% on {} of {} samples (>= 90, target 95), surrogate {:.1f}%, acceptance {:.3f}, "
                       "{:.0f} s (<= 600)",
                       r_fd, v.metrics.at("n").get<std::size_t>(), n, v.metrics.at("r_hat_surrogate").get<double>(),
                       s.metrics.at("acceptance_rate").get<double>(), runtime)},
          chain_means((fs::path(dir) / "chain.csv").string())};
}

Verdict smc_agreement(app::RunConfig c, const std::string& dir, const std::vector<double>& mh_means) {
  c.sampler.method = app::SamplerMethod::smc;
  const fs::path smc_dir = fs::path(dir) / "smc";
  fs::create_directories(smc_dir);
  fs::copy_file(fs::path(dir) / "model.json", smc_dir / "model.json", fs::copy_options::overwrite_existing);
  const app::RunSummary s = app::cmd_sample(c, smc_dir.string());
  const std::vector<double> smc = chain_means((smc_dir / "chain.csv").string());
  double worst = 0.0;
  for (std::size_t d = 0; d < 3; ++d) worst = std::max(worst, std::abs(smc[d] - mh_means[d]) / std::abs(mh_means[d]));
  const double ess = s.metrics.at("final_ess").get<double>();
  const double beta = s.metrics.at("final_beta").get<double>();
  const double n = static_cast<double>(c.sampler.smc.n_particles);
  return {worst < 0.05 && ess >= 0.3 * n && beta == 1.0,
          fmt::format("max relative mean gap {:.4f} (< 0.05), final ESS {:.0f} of {:.0f}, beta {}, {} stages", worst, ess,
                      n, beta, s.metrics.at("stages").get<std::size_t>())};
}

Verdict speedup(const app::RunConfig& c, const std::string& dir) {
  const app::RunSummary b = app::cmd_bench(c, dir);
  const double ratio = b.metrics.at("speedup_vs_solve_fd").get<double>();
  return {ratio >= 10.0, fmt::format("surrogate {:.1f}x faster than solve_fd per sample ({:.1f}x vs FD posterior)", ratio,
                                     b.metrics.at("speedup_vs_fd_posterior").get<double>())};
}

Verdict sampler_statistics() {
  const uq::LogTarget target = [](std::span<const double> x, double&) { return -0.5 * x[0] * x[0]; };
  uq::MhSettings s;
  s.n_samples = 50000;
  s.burn_in = 5000;
  const uq::RandomWalkResult r = uq::metropolis_random_walk(target, {0.0}, {1.0}, s, 2024);
  const double mean = std::accumulate(r.samples.begin(), r.samples.end(), 0.0) / static_cast<double>(r.samples.size());
  double var = 0.0;
  for (double v : r.samples) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(r.samples.size()));

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> w(2 + static_cast<std::size_t>(trial % 50));
    for (double& x : w) x = u(rng) < 0.2 ? 0.0 : u(rng);
    w[0] += 1e-3;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    std::vector<std::size_t> counts(w.size(), 0);
    for (std::size_t i : uq::systematic_resample(w, static_cast<std::uint64_t>(trial))) ++counts[i];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double nw = static_cast<double>(w.size()) * w[i];
      const auto k = static_cast<double>(counts[i]);
      if (k < std::floor(nw - 1e-9) || k > std::ceil(nw + 1e-9)) ++violations;
    }
  }
  return {std::abs(mean) <= 0.05 && sd >= 0.95 && sd <= 1.05 && violations == 0,
          fmt::format("1D Gaussian mean {:.4f}, std {:.4f}; resampling bound violations {} in 10000 trials", mean, sd,
                      violations)};
}

Verdict reproducibility(const app::RunConfig& base, const std::string& dir) {
  app::RunConfig c = base;
  c.threads = 1;
  c.training.loss_options.threads = 1;
  c.training.iterations = 200;
  c.training.lbfgs.iterations = 50;
  c.sampler.mh.n_samples = 2000;
  c.sampler.mh.burn_in = 1000;
  c.sampler.smc.n_particles = 200;
  c.sampler.max_fd = 20;
  const std::vector<std::string> files{"field.csv",      "interface.csv",        "analytic_field.csv",
                                       "analytic_interface.csv", "training_history.csv", "validation.csv",
                                       "chain.csv",      "verification.csv",     "smc_stages.csv"};
  std::vector<fs::path> runs{fs::path(dir) / "repro_a", fs::path(dir) / "repro_b"};
  for (const fs::path& d : runs) {
    fs::remove_all(d);
    app::cmd_solve(c, d.string());
    app::cmd_analytic(c, d.string());
    app::cmd_train(c, d.string());
    app::cmd_validate(c, d.string());
    app::RunConfig smc = c;
    smc.sampler.method = app::SamplerMethod::smc;
    app::cmd_sample(smc, d.string());
    app::cmd_sample(c, d.string());
    app::cmd_verify(c, d.string());
  }
  std::vector<std::string> differing;
  for (const std::string& f : files) {
    if (slurp(runs[0] / f) != slurp(runs[1] / f) || slurp(runs[0] / f).empty()) differing.push_back(f);
  }
  std::string list;
  for (const auto& f : differing) list += " " + f;
  return {differing.empty(), differing.empty() ? fmt::format("{} CSV files byte-identical across two runs", files.size())
                                               : "differing:" + list};
}

void report(int id, const char* name, const Verdict& v, int& failures) {
  if (!v.pass) ++failures;
  std::cout << fmt::format("[{}] criterion {} {}: {}", v.pass ? "PASS" : "FAIL", id, name, v.detail) << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  std::string dir = "acceptance_out";
  bool reuse = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--reuse-model") {
      reuse = true;
    } else {
      dir = a;
    }
  }
  fs::create_directories(dir);
  const app::RunConfig c = app::config_from_json(nlohmann::json::object());
  int failures = 0;
  try {
    report(1, "solver fidelity", solver_fidelity(c), failures);
    report(2, "autodiff correctness", autodiff(c), failures);
    report(3, "surrogate validation", pinn_validation(c, dir, reuse), failures);
    const MhOutcome mh = statistical_design(c, dir);
    report(4, "statistical design", mh.verdict, failures);
    report(5, "SMC and MH agreement", smc_agreement(c, dir, mh.means), failures);
    report(6, "surrogate speedup", speedup(c, dir), failures);
    report(7, "sampler statistics", sampler_statistics(), failures);
    report(8, "reproducibility", reproducibility(c, dir), failures);
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance run aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << fmt::format("{} of 8 criteria passed", 8 - failures) << std::endl;
  return failures == 0 ? 0 : 1;
}

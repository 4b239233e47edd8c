#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "tps/app/commands.hpp"
#include "tps/app/config.hpp"
#include "tps/error.hpp"
#include "tps/io/csv.hpp"

namespace fs = std::filesystem;
using namespace tps::app;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tps_app_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const json& doc) {
  try {
    config_from_json(doc);
  } catch (const tps::ConfigError& e) {
    return e.what();
  }
  return "";
}

// Small enough to run the whole pipeline in seconds.
RunConfig tiny_config() {
  json doc = {
      {"grid", {{"nx", 51}, {"dt", 0.5}}},
      {"network", {{"hidden", {8, 8}}}},
      {"training",
       {{"iterations", 40},
        {"log_every", 10},
        {"resample_every", 20},
        {"collocation", {{"interior", 64}, {"initial", 16}, {"interface", 16}, {"surface", 16}}},
        {"lbfgs", {{"iterations", 10}}}}},
      {"sampler", {{"n_samples", 400}, {"burn_in", 200}, {"n_particles", 50}, {"max_fd", 10}}},
  };
  return config_from_json(doc);
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig c = config_from_json(json::object());
  CHECK(c.scenario.thickness == 0.05);
  CHECK(c.scenario.heat_flux == 40000.0);
  CHECK(c.scenario.threshold == 450.0);
  CHECK(c.likelihood.sigma == 10.0);
  CHECK(c.likelihood.reliability == 0.95);
  CHECK(c.prior.rho.mean == 200.0);
  CHECK(c.prior.rho.lo == 100.0);
  CHECK(c.prior.cp.hi == 1200.0);
  CHECK(c.sampler.method == SamplerMethod::mh);
  CHECK(c.training == default_training());
  CHECK(std::abs(c.likelihood_spec().mu - (450.0 - 10.0 * oracle::quantile(0.95))) < 1e-8);
}

TEST_CASE("config errors name the field path") {
  CHECK(config_error({{"likelihood", {{"sigma", -1.0}}}}).find("likelihood.sigma") != std::string::npos);
  CHECK(config_error({{"likelihood", {{"reliability", 1.0}}}}).find("likelihood.reliability") != std::string::npos);
  CHECK(config_error({{"scenario", {{"thickness", "thin"}}}}).find("scenario.thickness") != std::string::npos);
  CHECK(config_error({{"scenario", {{"colour", 1}}}}).find("scenario.colour") != std::string::npos);
  CHECK(config_error({{"bogus", 1}}).find("bogus") != std::string::npos);
  CHECK(config_error({{"sampler", {{"method", "gibbs"}}}}).find("sampler.method") != std::string::npos);
  CHECK(config_error({{"grid", {{"nx", 2}}}}).find("grid") != std::string::npos);
  CHECK(config_error({{"prior", {{"k", {{"std", 0.0}}}}}}).find("prior.k") != std::string::npos);
}

TEST_CASE("config round trip and hashing") {
  RunConfig c = tiny_config();
  c.sampler.method = SamplerMethod::smc;
  c.sampler.proposal_std = tps::uq::ParamVector{1.0, 0.01, 4.0};
  c.network.rho = tps::pinn::Range{150, 250};
  const RunConfig back = config_from_json(config_to_json(c));
  CHECK(back == c);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  RunConfig other = c;
  other.seed += 1;
  CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("config files") {
  const fs::path dir = scratch("files");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\"seed\": 1,";
  CHECK_THROWS_AS(load_config((dir / "bad.json").string()), tps::ConfigError);
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()), tps::IoError);
  std::ofstream(dir / "ok.json") << "{\"seed\": 9, \"threads\": 2}";
  const RunConfig c = load_config((dir / "ok.json").string());
  CHECK(c.seed == 9);
  CHECK(c.training.seed == 9);
  CHECK(c.threads == 2);
}

TEST_CASE("solve writes the field and interface history") {
  const fs::path dir = scratch("solve");
  RunConfig c = config_from_json(json::object());
  const RunSummary s = cmd_solve(c, dir.string());
  const double series = oracle::slab(0, 150, 0.05, 40000, 25, 200, 1, 800, 100);
  CHECK(std::abs(s.metrics["interface_at_eval"].get<double>() - series) < 0.5);
  const auto field = tps::io::read_csv((dir / "field.csv").string());
  CHECK(field.header.front() == "t");
  CHECK(field.header.size() == 202);
  CHECK(field.rows.size() <= 2000);
  bool found = false;
  for (const auto& row : field.rows) {
    if (row[0] == 150.0) {
      found = true;
      CHECK(std::abs(row[1] - series) < 0.5);
    }
  }
  CHECK(found);
  CHECK(fs::exists(dir / "summary_solve.json"));

  c.scenario.heat_flux = 0.0;
  cmd_solve(c, dir.string());
  for (const auto& row : tps::io::read_csv((dir / "field.csv").string()).rows) {
    for (std::size_t j = 1; j < row.size(); ++j) CHECK(row[j] == 25.0);
  }
}

TEST_CASE("analytic command matches the independent series") {
  const fs::path dir = scratch("analytic");
  const RunSummary s = cmd_analytic(config_from_json(json::object()), dir.string());
  CHECK(std::abs(s.metrics["interface_at_eval"].get<double>() - oracle::slab(0, 150, 0.05, 40000, 25, 200, 1, 800, 100)) <
        1e-9);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(tps::InvalidInput("x")) == 1);
  CHECK(exit_code_for(tps::ConfigError("x")) == 1);
  CHECK(exit_code_for(tps::IoError("x")) == 2);
  CHECK(exit_code_for(tps::NumericalError("x")) == 3);
  const RunConfig c = config_from_json(json::object());
  CHECK_THROWS_AS(cmd_solve(c, "/proc/not_here/out"), tps::IoError);
  const fs::path empty = scratch("empty");
  try {
    cmd_validate(c, empty.string());
    FAIL("validate without a model should fail");
  } catch (const tps::IoError& e) {
    CHECK(std::string(e.what()).find("run `train` first") != std::string::npos);
  }
}

TEST_CASE("tiny pipeline end to end") {
  const fs::path dir = scratch("pipeline");
  RunConfig c = tiny_config();
  std::ostringstream log;
  const RunSummary t = cmd_train(c, dir.string(), &log);
  CHECK(t.metrics["adam_iterations"].get<std::size_t>() == 40);
  CHECK(fs::exists(dir / "model.json"));
  CHECK(tps::io::read_csv((dir / "training_history.csv").string()).rows.size() >= 4);

  const RunSummary v = cmd_validate(c, dir.string());
  CHECK(v.metrics["poi_error_nominal"].get<double>() >= 0.0);
  CHECK(v.metrics["prior_samples"].get<int>() == 20);

  const RunSummary mh = cmd_sample(c, dir.string());
  const auto chain = tps::io::read_csv((dir / "chain.csv").string());
  CHECK(chain.header == std::vector<std::string>{"rho", "k", "cp", "log_posterior", "T_interface"});
  CHECK(chain.rows.size() == 400);
  CHECK(mh.metrics["acceptance_rate"].get<double>() > 0.0);

  const RunSummary ver = cmd_verify(c, dir.string());
  CHECK(ver.metrics["n"].get<int>() == 10);
  CHECK(ver.metrics["population"].get<int>() == 400);
  CHECK(tps::io::read_csv((dir / "verification.csv").string()).rows.size() == 10);

  c.sampler.method = SamplerMethod::smc;
  const RunSummary smc = cmd_sample(c, dir.string());
  CHECK(smc.metrics["final_beta"].get<double>() == 1.0);
  CHECK(tps::io::read_csv((dir / "chain.csv").string()).rows.size() == 50);
  CHECK(fs::exists(dir / "smc_stages.csv"));

  const RunSummary b = cmd_bench(c, dir.string());
  CHECK(b.metrics["trained_model"].get<bool>());
  CHECK(b.metrics["speedup_vs_solve_fd"].get<double>() > 0.0);

  RunConfig moved = c;
  moved.scenario.heat_flux = 30000.0;
  CHECK_THROWS_AS(cmd_validate(moved, dir.string()), tps::ConfigError);
}

TEST_CASE("runs are byte-identical for a fixed seed") {
  const RunConfig c = tiny_config();
  const fs::path a = scratch("repro_a");
  const fs::path b = scratch("repro_b");
  for (const fs::path& d : {a, b}) {
    cmd_solve(c, d.string());
    cmd_train(c, d.string());
    cmd_sample(c, d.string());
  }
  for (const char* f : {"field.csv", "interface.csv", "training_history.csv", "chain.csv"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    CHECK(!slurp(a / f).empty());
  }
  // The model differs only through wall-clock fields, which it does not store.
  CHECK(slurp(a / "model.json") == slurp(b / "model.json"));
}

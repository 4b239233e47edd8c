#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tps/app/commands.hpp"
#include "tps/app/config.hpp"
#include "tps/error.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string method;
  bool flat_prior{false};
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration (defaults when omitted)");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "override the configured seed");
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

tps::app::RunConfig resolve(const Options& o) {
  using namespace tps::app;
  RunConfig c = o.config_path.empty() ? config_from_json(nlohmann::json::object()) : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  c.training.seed = c.seed;
  c.training.loss_options.threads = c.threads;
  if (o.method == "mh") c.sampler.method = SamplerMethod::mh;
  if (o.method == "smc") c.sampler.method = SamplerMethod::smc;
  if (o.flat_prior) c.sampler.flat_prior = true;
  c.validate();
  return c;
}

void report(const tps::app::RunSummary& s) {
  fmt::print("{}\n", s.to_json().dump(2));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability-constrained thermal protection design with a parametric neural surrogate"};
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "finite-difference field at the prior-mean properties");
  auto* analytic = app.add_subcommand("analytic", "cosine-series field at the prior-mean properties");
  auto* train = app.add_subcommand("train", "train the surrogate and write model.json");
  auto* validate = app.add_subcommand("validate", "compare the surrogate against finite differences");
  auto* sample = app.add_subcommand("sample", "draw posterior samples with the surrogate");
  auto* verify = app.add_subcommand("verify", "finite-difference reliability of the sampled chain");
  auto* bench = app.add_subcommand("bench", "time surrogate and finite-difference evaluations");
  for (CLI::App* cmd : {solve, analytic, train, validate, sample, verify, bench}) add_common(cmd, o);
  sample->add_option("--method", o.method, "mh or smc")->check(CLI::IsMember({"mh", "smc"}));
  sample->add_flag("--flat-prior", o.flat_prior, "uniform prior over the truncation box");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const tps::app::RunConfig config = resolve(o);
    using namespace tps::app;
    if (solve->parsed()) report(cmd_solve(config, o.out));
    else if (analytic->parsed()) report(cmd_analytic(config, o.out));
    else if (train->parsed()) report(cmd_train(config, o.out, &std::cerr));
    else if (validate->parsed()) report(cmd_validate(config, o.out));
    else if (sample->parsed()) report(cmd_sample(config, o.out));
    else if (verify->parsed()) report(cmd_verify(config, o.out));
    else if (bench->parsed()) report(cmd_bench(config, o.out));
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return tps::app::exit_code_for(e);
  }
  return 0;
}

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tps/app/config.hpp"

namespace tps::app {

struct RunSummary {
  std::string command;
  std::string config_hash;
  nlohmann::json phases = nlohmann::json::object();   ///< wall seconds per phase
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<std::string> artifacts;                 ///< files written, summary included

  nlohmann::json to_json() const;
};

/// Artifact locations inside an output directory.
struct ArtifactPaths {
  explicit ArtifactPaths(std::string dir);

  std::string dir;
  std::string field() const { return dir + "/field.csv"; }
  std::string interface() const { return dir + "/interface.csv"; }
  std::string analytic_field() const { return dir + "/analytic_field.csv"; }
  std::string analytic_interface() const { return dir + "/analytic_interface.csv"; }
  std::string model() const { return dir + "/model.json"; }
  std::string history() const { return dir + "/training_history.csv"; }
  std::string validation() const { return dir + "/validation.csv"; }
  std::string chain() const { return dir + "/chain.csv"; }
  std::string smc_stages() const { return dir + "/smc_stages.csv"; }
  std::string verification() const { return dir + "/verification.csv"; }
  std::string summary(const std::string& command) const { return dir + "/summary_" + command + ".json"; }
};

/// Each command writes its artifacts plus summary_<command>.json into `out_dir`
/// (created if missing). `log` receives progress lines when non-null.
RunSummary cmd_solve(const RunConfig& config, const std::string& out_dir);
RunSummary cmd_analytic(const RunConfig& config, const std::string& out_dir);
RunSummary cmd_train(const RunConfig& config, const std::string& out_dir, std::ostream* log = nullptr);
RunSummary cmd_validate(const RunConfig& config, const std::string& out_dir);
RunSummary cmd_sample(const RunConfig& config, const std::string& out_dir);
RunSummary cmd_verify(const RunConfig& config, const std::string& out_dir);
RunSummary cmd_bench(const RunConfig& config, const std::string& out_dir);

/// Exit status for an exception escaping a command: 1 validation/domain,
/// 2 I/O, 3 numerical.
int exit_code_for(const std::exception& e);

}  // namespace tps::app

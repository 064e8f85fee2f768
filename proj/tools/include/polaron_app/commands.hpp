#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "polaron_app/cache.hpp"
#include "polaron_app/config.hpp"
#include "polaron_app/output.hpp"

namespace polaron::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitPropertyFailure = 1,
  kExitConfig = 2,
  kExitResource = 3,
  kExitNonConvergence = 4,
};

struct CommandResult {
  Table table;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  std::string summary;
  int exit_code = kExitOk;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand on a validated configuration. Library errors propagate.
CommandResult run_command(const std::string& name, const RunConfig& config);

/// Output files for a finished command: <name>-<key8>.csv plus a .json sidecar (format csv) or
/// a single .json with the rows inlined (format json), and always a .dat plot file.
Bundle render(const std::string& name, const CacheKey& key, const RunConfig& config,
              const CommandResult& result);

struct PropertyOutcome {
  std::string name;
  bool passed = false;
  double value = 0.0;  // the quantity compared against the bound
  double bound = 0.0;
  std::string detail;
};

/// The diagnostics invariant suite at the sizes of the [check] section.
std::vector<PropertyOutcome> run_property_suite(const RunConfig& config);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace polaron::app

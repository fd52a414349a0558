#ifndef FMQED_CLI_HPP
#define FMQED_CLI_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "fmqed/config.hpp"

namespace fmqed {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitBudget = 3,
  kExitInvariant = 4,
};

const char* version_string();

// Names of the study subcommands, in help order.
const std::vector<std::string>& subcommand_names();

struct RunOptions {
  std::uint64_t seed = 20240601;
  int jobs = 1;
};

struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::map<std::string, std::string> config;  // snapshot of every key
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string version;
  double seconds = 0;
  std::vector<std::string> outputs;  // file names relative to the output directory
  nlohmann::json summary;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

// Runs one study with a parsed configuration, writing its files and
// manifest.json into out_dir (created if missing).
RunManifest run_subcommand(const std::string& name, const KeyValueFile& config,
                           const std::string& out_dir, const RunOptions& opt,
                           const std::string& config_path = "");

// Re-runs the study recorded in a manifest into out_dir.
RunManifest replay_manifest(const std::string& manifest_path, const std::string& out_dir);

// Full command line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace fmqed

#endif

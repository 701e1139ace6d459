#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ptdimer/config.hpp"

namespace ptdimer::cli {

struct CommandOptions {
  std::string out_dir = ".";
  std::string which;                     // sensitivity: cw | q1 | q2
  std::string input;                     // fit: trace CSV to fit instead of a synthetic round trip
  std::string observable = "population";  // fit --input: population | coherence
};

struct CommandResult {
  int status = 0;  // nonzero when an invariant failed
  nlohmann::json summary;
  std::vector<std::string> files;
};

/// Runs one subcommand (spectrum, dynamics, transmission, sensitivity, fit,
/// verify), writing its files and a <command>_manifest.json into opts.out_dir.
CommandResult run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opts);

}  // namespace ptdimer::cli

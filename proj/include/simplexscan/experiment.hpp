#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simplexscan/parallel.hpp"

namespace simplexscan {

// Declarative experiment runner.  A run is described by one JSON object with
// an "experiment" selector and a strict per-experiment key whitelist; any
// unknown key is rejected by name.  Every run writes, into the output
// directory,
//   resolved_config.json   the input with all defaults materialized
//   result.json            the full numeric results
//   <experiment>.csv       flat table of the main curve / rows
//   <experiment>.dat       plot data, "# x y sigma" followed by rows
//   run_meta.json          timestamps and worker count (the only file that
//                          may differ between byte-identical reruns)
// All other outputs are byte-identical for a fixed config regardless of the
// worker count.
struct ExperimentResult {
  int exit_code = 0;  // 0 ok, 1 numeric invariant violated, 2 config error
  std::string experiment;
  nlohmann::json resolved_config;
  nlohmann::json result;
  std::vector<std::string> invariant_violations;
  std::vector<std::string> files_written;
};

// Parses and validates a config, returning it with all defaults filled in.
// Throws ConfigError naming the offending key or value.
nlohmann::json validate_experiment_config(const nlohmann::json& config);

// Validates, runs, and writes outputs.  Throws ConfigError / IoError; any
// numeric invariant violations are recorded in the result (exit_code 1)
// rather than thrown.
ExperimentResult run_experiment(const nlohmann::json& config,
                                const std::string& out_dir,
                                int workers = default_workers());

// Reads and parses a JSON file; throws IoError on filesystem problems and
// ConfigError on malformed JSON.
nlohmann::json load_json_file(const std::string& path);

}  // namespace simplexscan

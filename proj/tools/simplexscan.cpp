// Command-line front end: validate configs, run experiments, and summarize
// result directories.  Exit codes: 0 success, 1 numeric invariant violated
// during a run, 2 config / input error.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "simplexscan/errors.hpp"
#include "simplexscan/experiment.hpp"
#include "simplexscan/parallel.hpp"

namespace {

using nlohmann::json;

int cmd_validate(const std::string& config_path) {
  const json config = simplexscan::load_json_file(config_path);
  const json resolved = simplexscan::validate_experiment_config(config);
  std::cout << resolved.dump(2) << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int workers) {
  const json config = simplexscan::load_json_file(config_path);
  const simplexscan::ExperimentResult result =
      simplexscan::run_experiment(config, out_dir, workers);
  std::cout << "experiment: " << result.experiment << "\n";
  std::cout << "output dir: " << out_dir << "\n";
  for (const std::string& f : result.files_written)
    std::cout << "  wrote " << f << "\n";
  if (!result.invariant_violations.empty()) {
    std::cout << "invariant violations:\n";
    for (const std::string& v : result.invariant_violations)
      std::cout << "  " << v << "\n";
  }
  return result.exit_code;
}

void print_kv(const json& obj, const char* key, const char* label) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  std::cout << "  " << label << ": " << it->dump() << "\n";
}

int cmd_report(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path result_path = fs::path(dir) / "result.json";
  const json result = simplexscan::load_json_file(result_path.string());
  const std::string name = result.value("experiment", std::string("?"));
  std::cout << "experiment: " << name << "\n";

  if (name == "scan") {
    const json& points = result.at("points");
    int detected = 0;
    for (const json& p : points)
      if (p.at("detected").get<bool>()) ++detected;
    std::cout << "  grid points: " << points.size() << ", detected: "
              << detected << "\n";
    for (const json& iv : result.at("intervals"))
      std::cout << "  detected interval: [" << iv.at("lambda_lo").get<double>()
                << ", " << iv.at("lambda_hi").get<double>() << "]\n";
    print_kv(result, "schedule", "schedule");
  } else if (name == "structured") {
    print_kv(result, "lhs", "chain lhs");
    print_kv(result, "mid", "chain mid");
    print_kv(result, "rhs", "chain rhs");
    print_kv(result, "chain_ok", "chain ok");
  } else if (name == "identities") {
    for (const json& row : result.at("rows"))
      std::cout << "  dim " << row.at("dim").get<int>()
                << ": heat " << row.at("heat_error").get<double>()
                << ", khh " << row.at("khh_residual").get<double>()
                << ", gkh " << row.at("gkh_residual").get<double>() << "\n";
  } else if (name == "telescoping") {
    print_kv(result, "residual", "residual");
    print_kv(result, "std_err", "std err");
  } else if (name == "growth") {
    print_kv(result, "fit", "log-log fit");
  } else if (name == "uniform-decay") {
    print_kv(result, "base", "raw form");
    print_kv(result, "fit", "log-log fit");
  }

  const json& violations = result.at("invariant_violations");
  if (violations.empty()) {
    std::cout << "  invariants: ok\n";
  } else {
    std::cout << "  invariant violations:\n";
    for (const json& v : violations) std::cout << "    " << v.get<std::string>() << "\n";
  }
  return violations.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simplexscan: spherical-measure counting forms on grid subsets "
               "of the unit cube"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "results", report_dir;
  int workers = simplexscan::default_workers();

  CLI::App* validate = app.add_subcommand(
      "validate", "parse a config and print it with defaults filled in");
  validate->add_option("config", config_path, "JSON config file")->required();

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("-o,--out", out_dir, "output directory (default: results)");
  run->add_option("-w,--workers", workers,
                  "worker threads (default: SIMPLEXSCAN_WORKERS or the OpenMP "
                  "default; results are identical for any value)");

  CLI::App* report = app.add_subcommand(
      "report", "summarize a results directory written by `run`");
  report->add_option("dir", report_dir, "results directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(config_path);
    if (run->parsed()) return cmd_run(config_path, out_dir, workers);
    return cmd_report(report_dir);
  } catch (const simplexscan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simplexscan/errors.hpp"
#include "simplexscan/experiment.hpp"

using namespace simplexscan;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Expect a ConfigError whose message mentions `needle`.
void expect_config_error(const json& config, const std::string& needle) {
  try {
    validate_experiment_config(config);
    FAIL("expected a config error mentioning \"", needle, "\"");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    INFO("message: ", msg);
    CHECK(msg.find(needle) != std::string::npos);
  }
}

json minimal_decay_config() {
  return json::parse(R"({
    "experiment": "uniform-decay",
    "lambda": 0.4,
    "set": {"kind": "random", "shape": [1], "resolution": 8, "density": 0.5}
  })");
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(bool(f));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "simplexscan_tests" / leaf;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config validation names unknown keys and experiments") {
  json c = minimal_decay_config();
  c["foo"] = 1;
  expect_config_error(c, "foo");

  c = minimal_decay_config();
  c["set"]["bar"] = 2;
  expect_config_error(c, "bar");

  expect_config_error(json::object(), "experiment");
  expect_config_error(json::parse(R"({"experiment": "frobnicate"})"),
                      "frobnicate");
  expect_config_error(json::parse(R"({"experiment": 3})"), "experiment");
  expect_config_error(json::parse(R"([1, 2])"), "object");
}

TEST_CASE("set validation enforces kinds, sizes, and caps") {
  json c = minimal_decay_config();
  c["set"]["kind"] = "full";  // density forbidden for the full cube
  expect_config_error(c, "density");

  c = minimal_decay_config();
  c["set"].erase("density");
  expect_config_error(c, "density");

  c = minimal_decay_config();
  c["set"]["resolution"] = 12;
  expect_config_error(c, "power of two");

  c = minimal_decay_config();
  c["set"]["resolution"] = 4096;
  expect_config_error(c, "resolution");

  c = minimal_decay_config();
  c["set"]["shape"] = {0};
  expect_config_error(c, "shape");

  c = minimal_decay_config();
  c["set"]["shape"] = {2, 2};
  c["set"]["resolution"] = 64;  // 64^6 cells blow the grid budget
  expect_config_error(c, "2^28");

  c = minimal_decay_config();
  c["set"]["kind"] = "subcube";
  c["set"]["seed"] = 4;  // deterministic kinds take no seed
  expect_config_error(c, "seed");

  c = minimal_decay_config();
  c["set"]["kind"] = "mystery";
  expect_config_error(c, "mystery");

  c = minimal_decay_config();
  c["set"] = json::parse(
      R"({"kind": "runs", "shape": [1], "resolution": 8, "runs": [[0]]})");
  expect_config_error(c, "runs");

  c = minimal_decay_config();
  c["simplices"] = json::parse(R"([[[1.0], [2.0]]])");  // one vertex expected
  expect_config_error(c, "simplices");
}

TEST_CASE("defaults are materialized into the resolved config") {
  const json resolved = validate_experiment_config(minimal_decay_config());
  CHECK(resolved.at("seed").get<std::uint64_t>() == 1);
  CHECK(resolved.at("samples").get<std::uint64_t>() == 200000);
  CHECK(resolved.at("eps_list") ==
        json(std::vector<double>{0.2, 0.1, 0.05, 0.025}));
  CHECK(resolved.at("simplices") == json::parse("[[[1.0]]]"));
  // The random set inherits the top-level seed when it has none of its own.
  CHECK(resolved.at("set").at("seed").get<std::uint64_t>() == 1);

  const json ident =
      validate_experiment_config(json::parse(R"({"experiment": "identities"})"));
  CHECK(ident.at("t").get<double>() == 1.0);
  CHECK(ident.at("j").get<int>() == 1);
  CHECK(ident.at("s_factor").get<double>() == 1.5);
  CHECK(ident.at("max_dim").get<int>() == 6);

  json scan = json::parse(R"({
    "experiment": "scan",
    "set": {"kind": "subcube", "shape": [1], "resolution": 16, "density": 0.3}
  })");
  const json rscan = validate_experiment_config(scan);
  CHECK(rscan.at("lambda_min").get<double>() == 0.1);
  CHECK(rscan.at("lambda_max").get<double>() == 0.9);
  CHECK(rscan.at("grid_points").get<int>() == 16);
  CHECK(rscan.at("max_witnesses").get<std::uint64_t>() == 4);
  CHECK(!rscan.contains("schedule"));
}

TEST_CASE("schedule inputs must be exact decimals") {
  json c = json::parse(R"({
    "experiment": "scan",
    "set": {"kind": "subcube", "shape": [1], "resolution": 16, "density": 0.3},
    "schedule": {"delta": 0.25}
  })");
  expect_config_error(c, "decimal");

  c["schedule"]["delta"] = "0.25";
  const json resolved = validate_experiment_config(c);
  CHECK(resolved.at("schedule").at("delta").get<std::string>() == "0.25");
  CHECK(resolved.at("schedule").at("C1").get<std::string>() == "1");
  CHECK(resolved.at("schedule").at("C2").get<std::string>() == "1");
  CHECK(resolved.at("schedule").at("C3").get<std::string>() == "1");

  c["schedule"]["delta"] = "0.2.5";
  expect_config_error(c, "decimal");
  c["schedule"]["delta"] = "0.25";
  c["schedule"]["C2"] = 1.5;
  expect_config_error(c, "decimal");
}

TEST_CASE("telescoping and list-valued configs are validated") {
  json t = json::parse(R"({
    "experiment": "telescoping",
    "set": {"kind": "random", "shape": [1], "resolution": 8, "density": 0.5},
    "L": [1],
    "a": 0.3,
    "b": 0.5
  })");
  expect_config_error(t, "2a");
  t["b"] = 0.6;
  const json rt = validate_experiment_config(t);
  CHECK(rt.at("alpha") == json::parse("[[1.0, 1.0]]"));

  t["L"] = {2};  // exceeds the factor's vertex count
  expect_config_error(t, "L");
  t["L"] = {1};
  t["alpha"] = json::parse("[[1.0, 0.5]]");
  expect_config_error(t, "alpha");
  t["alpha"] = json::parse("[[1.0, 1.0, 1.0]]");
  expect_config_error(t, "alpha");

  json g = json::parse(R"({
    "experiment": "growth",
    "epsilon": 0.25,
    "set": {"kind": "random", "shape": [1], "resolution": 8, "density": 0.5}
  })");
  CHECK(validate_experiment_config(g).at("J_list") ==
        json(std::vector<int>{1, 2, 3, 4, 5, 6}));
  g["J_list"] = {13};
  expect_config_error(g, "J_list");
  g["J_list"] = json::array();
  expect_config_error(g, "J_list");
  g.erase("J_list");
  g["epsilon"] = 1.0;
  expect_config_error(g, "epsilon");

  json d = minimal_decay_config();
  d["eps_list"] = {0.2, 1.5};
  expect_config_error(d, "eps_list");
  d["eps_list"] = json::array();
  expect_config_error(d, "eps_list");
  d.erase("eps_list");
  d["lambda"] = 1.5;
  expect_config_error(d, "lambda");
}

TEST_CASE("runs write deterministic, worker-invariant outputs") {
  json c = minimal_decay_config();
  c["samples"] = 2048;
  c["seed"] = 9;
  c["eps_list"] = {0.2, 0.1};

  const fs::path dir_a = fresh_dir("decay_a");
  const fs::path dir_b = fresh_dir("decay_b");
  const fs::path dir_c = fresh_dir("decay_c");

  const ExperimentResult a = run_experiment(c, dir_a.string(), 1);
  CHECK(a.exit_code == 0);
  CHECK(a.experiment == "uniform-decay");
  CHECK(a.invariant_violations.empty());
  REQUIRE(a.files_written.size() == 5);
  for (const std::string& name : a.files_written)
    CHECK(fs::exists(dir_a / name));

  const json result = load_json_file((dir_a / "result.json").string());
  CHECK(result.at("experiment") == "uniform-decay");
  CHECK(result.at("invariant_violations") == json::array());
  CHECK(result.at("points").size() == 2);

  CHECK(slurp(dir_a / "uniform-decay.dat").rfind("# x y sigma\n", 0) == 0);
  CHECK(slurp(dir_a / "uniform-decay.csv").rfind("eps,abs_diff,std_err\n", 0) ==
        0);

  const ExperimentResult b = run_experiment(c, dir_b.string(), 1);
  const ExperimentResult cc = run_experiment(c, dir_c.string(), 3);
  CHECK(b.exit_code == 0);
  CHECK(cc.exit_code == 0);
  for (const std::string& name :
       {std::string("resolved_config.json"), std::string("result.json"),
        std::string("uniform-decay.csv"), std::string("uniform-decay.dat")}) {
    CHECK(slurp(dir_b / name) == slurp(dir_a / name));
    CHECK(slurp(dir_c / name) == slurp(dir_a / name));
  }
}

TEST_CASE("structured runs report the exact averaged-count chain") {
  json c = json::parse(R"({
    "experiment": "structured",
    "lambda": 0.75,
    "samples": 2000,
    "set": {"kind": "subcube", "shape": [1], "resolution": 4, "density": 0.4}
  })");
  const fs::path dir = fresh_dir("structured");
  const ExperimentResult r = run_experiment(c, dir.string(), 1);
  CHECK(r.exit_code == 0);
  CHECK(r.result.at("chain_ok").get<bool>());
  CHECK(r.result.at("per_cube_ok").get<bool>());
  // The chain endpoints are exact rationals, serialized losslessly.
  CHECK(r.result.at("lhs").is_string());
  CHECK(r.result.at("rhs").is_string());
  CHECK(r.result.at("lhs_double").get<double>() >=
        r.result.at("rhs_double").get<double>());
  CHECK(r.result.at("floor").at("value").get<double>() >= 0.0);
}

TEST_CASE("json loading distinguishes io from parse failures") {
  CHECK_THROWS_AS(load_json_file("/nonexistent/config.json"), IoError);

  const fs::path dir = fresh_dir("io");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "bad.json");
    f << "{ not json";
  }
  CHECK_THROWS_AS(load_json_file((dir / "bad.json").string()), ConfigError);
}

}  // TEST_SUITE

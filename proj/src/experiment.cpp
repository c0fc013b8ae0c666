#include "simplexscan/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "simplexscan/counting.hpp"
#include "simplexscan/dyadic.hpp"
#include "simplexscan/errors.hpp"
#include "simplexscan/scan.hpp"
#include "simplexscan/singular.hpp"

namespace simplexscan {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, const char* ctx,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(std::string(ctx) + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      bad("unknown key \"" + it.key() + "\" in " + ctx);
  }
}

const json& need(const json& obj, const char* key, const char* ctx) {
  auto it = obj.find(key);
  if (it == obj.end())
    bad(std::string("missing key \"") + key + "\" in " + ctx);
  return *it;
}

double get_number(const json& v, const std::string& what) {
  if (!v.is_number()) bad(what + " must be a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& v, const std::string& what) {
  if (!v.is_number_integer() ||
      (v.is_number_integer() && !v.is_number_unsigned() &&
       v.get<std::int64_t>() < 0))
    bad(what + " must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

int get_index(const json& v, const std::string& what, int lo, int hi) {
  if (!v.is_number_integer()) bad(what + " must be an integer");
  const std::int64_t x = v.get<std::int64_t>();
  if (x < lo || x > hi)
    bad(what + " must lie in [" + std::to_string(lo) + ", " +
        std::to_string(hi) + "]");
  return int(x);
}

// Exact schedule inputs must arrive as decimal strings (or integers); a
// float literal would smuggle in its binary rounding.
std::string get_exact_decimal(const json& v, const std::string& what) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    rational_from_decimal(s);  // throws ConfigError when malformed
    return s;
  }
  if (v.is_number_integer()) {
    return std::to_string(v.get<std::int64_t>());
  }
  bad(what + " must be a decimal string (exact) or an integer");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------- set + simplices ----------------

json validate_set(const json& set_cfg, std::uint64_t default_seed) {
  check_keys(set_cfg, "\"set\"",
             {"kind", "shape", "resolution", "density", "seed", "width",
              "period", "runs"});
  const json& kind_v = need(set_cfg, "kind", "\"set\"");
  if (!kind_v.is_string()) bad("\"set.kind\" must be a string");
  const std::string kind = kind_v.get<std::string>();

  const json& shape_v = need(set_cfg, "shape", "\"set\"");
  if (!shape_v.is_array() || shape_v.empty())
    bad("\"set.shape\" must be a nonempty array of vertex counts");
  std::vector<int> K;
  for (const json& e : shape_v)
    K.push_back(get_index(e, "\"set.shape\" entries", 1, 8));

  const int res = get_index(need(set_cfg, "resolution", "\"set\""),
                            "\"set.resolution\"", 2, 1024);
  if ((res & (res - 1)) != 0)
    bad("\"set.resolution\" must be a power of two");
  int dim = 0;
  for (int k : K) dim += k + 1;
  if (double(dim) * std::log2(double(res)) > 28.0)
    bad("\"set\" grid would exceed 2^28 cells");

  json out;
  out["kind"] = kind;
  out["shape"] = K;
  out["resolution"] = res;

  auto forbid = [&](const char* key) {
    if (set_cfg.contains(key))
      bad(std::string("key \"") + key + "\" does not apply to set kind \"" +
          kind + "\"");
  };
  if (kind == "full") {
    forbid("density");
    forbid("seed");
    forbid("width");
    forbid("period");
    forbid("runs");
  } else if (kind == "subcube" || kind == "random") {
    forbid("width");
    forbid("period");
    forbid("runs");
    const double density =
        get_number(need(set_cfg, "density", "\"set\""), "\"set.density\"");
    if (!(density > 0.0) || density >= 1.0)
      bad("\"set.density\" must lie in (0, 1)");
    out["density"] = density;
    if (kind == "random") {
      out["seed"] = set_cfg.contains("seed")
                        ? get_count(set_cfg.at("seed"), "\"set.seed\"")
                        : default_seed;
    } else {
      forbid("seed");
    }
  } else if (kind == "shell") {
    forbid("density");
    forbid("seed");
    forbid("runs");
    const double width =
        get_number(need(set_cfg, "width", "\"set\""), "\"set.width\"");
    const double period =
        get_number(need(set_cfg, "period", "\"set\""), "\"set.period\"");
    if (!(width > 0.0) || !(period > 0.0))
      bad("\"set.width\" and \"set.period\" must be positive");
    out["width"] = width;
    out["period"] = period;
  } else if (kind == "runs") {
    forbid("density");
    forbid("seed");
    forbid("width");
    forbid("period");
    const json& runs_v = need(set_cfg, "runs", "\"set\"");
    if (!runs_v.is_array()) bad("\"set.runs\" must be an array of pairs");
    json runs = json::array();
    for (const json& r : runs_v) {
      if (!r.is_array() || r.size() != 2)
        bad("\"set.runs\" entries must be [start, length] pairs");
      runs.push_back({get_count(r[0], "\"set.runs\" starts"),
                      get_count(r[1], "\"set.runs\" lengths")});
    }
    out["runs"] = runs;
  } else {
    bad("unknown set kind \"" + kind +
        "\" (use full, subcube, random, shell, or runs)");
  }
  return out;
}

GridSet build_set(const json& cfg) {
  const std::vector<int> K = cfg.at("shape").get<std::vector<int>>();
  const ProductShape shape = product_shape(K);
  const int res = cfg.at("resolution").get<int>();
  const std::string kind = cfg.at("kind").get<std::string>();
  if (kind == "full") return GridSet::full(shape, res);
  if (kind == "subcube")
    return GridSet::subcube(shape, res, cfg.at("density").get<double>());
  if (kind == "random")
    return GridSet::random(shape, res, cfg.at("density").get<double>(),
                           cfg.at("seed").get<std::uint64_t>());
  if (kind == "shell")
    return GridSet::shell(shape, res, cfg.at("width").get<double>(),
                          cfg.at("period").get<double>());
  std::vector<std::pair<std::uint64_t, std::uint64_t>> runs;
  for (const json& r : cfg.at("runs"))
    runs.emplace_back(r[0].get<std::uint64_t>(), r[1].get<std::uint64_t>());
  return GridSet::explicit_runs(shape, res, runs);
}

// Default per-factor simplex: the corner simplex with vertices e_1..e_k.
json default_simplices(const std::vector<int>& K) {
  json out = json::array();
  for (int k : K) {
    json verts = json::array();
    for (int j = 0; j < k; ++j) {
      json v = json::array();
      for (int a = 0; a < k; ++a) v.push_back(a == j ? 1.0 : 0.0);
      verts.push_back(v);
    }
    out.push_back(verts);
  }
  return out;
}

json validate_simplices(const json& config, const std::vector<int>& K) {
  if (!config.contains("simplices")) return default_simplices(K);
  const json& arr = config.at("simplices");
  if (!arr.is_array() || arr.size() != K.size())
    bad("\"simplices\" must be an array with one vertex list per factor");
  for (std::size_t i = 0; i < K.size(); ++i) {
    const json& verts = arr[i];
    const int k = K[i];
    if (!verts.is_array() || int(verts.size()) != k)
      bad("\"simplices\"[" + std::to_string(i) + "] must list " +
          std::to_string(k) + " vertices");
    std::vector<std::vector<double>> v;
    for (const json& row : verts) {
      if (!row.is_array() || int(row.size()) != k)
        bad("\"simplices\"[" + std::to_string(i) + "] vertices must have " +
            std::to_string(k) + " coordinates");
      std::vector<double> coords;
      for (const json& c : row)
        coords.push_back(get_number(c, "simplex coordinates"));
      v.push_back(std::move(coords));
    }
    try {
      validate_simplex(v);
    } catch (const Error& e) {
      bad("\"simplices\"[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return arr;
}

std::vector<SimplexData> build_simplices(const json& resolved) {
  std::vector<SimplexData> out;
  for (const json& verts : resolved.at("simplices"))
    out.push_back(
        validate_simplex(verts.get<std::vector<std::vector<double>>>()));
  return out;
}

// ---------------- per-experiment validation ----------------

json validate_scan(const json& c) {
  check_keys(c, "the config",
             {"experiment", "seed", "samples", "set", "simplices",
              "lambda_min", "lambda_max", "grid_points", "max_witnesses",
              "schedule"});
  json out;
  out["experiment"] = "scan";
  const std::uint64_t seed =
      c.contains("seed") ? get_count(c.at("seed"), "\"seed\"") : 1;
  out["seed"] = seed;
  out["samples"] = c.contains("samples")
                       ? get_count(c.at("samples"), "\"samples\"")
                       : std::uint64_t(200000);
  out["set"] = validate_set(need(c, "set", "the config"), seed);
  const std::vector<int> K = out["set"]["shape"].get<std::vector<int>>();
  out["simplices"] = validate_simplices(c, K);
  const double lmin = c.contains("lambda_min")
                          ? get_number(c.at("lambda_min"), "\"lambda_min\"")
                          : 0.1;
  const double lmax = c.contains("lambda_max")
                          ? get_number(c.at("lambda_max"), "\"lambda_max\"")
                          : 0.9;
  if (!(lmin > 0.0) || lmax > 1.0 || lmin > lmax)
    bad("dilation window must satisfy 0 < lambda_min <= lambda_max <= 1");
  out["lambda_min"] = lmin;
  out["lambda_max"] = lmax;
  out["grid_points"] =
      c.contains("grid_points")
          ? get_index(c.at("grid_points"), "\"grid_points\"", 1, 4096)
          : 16;
  out["max_witnesses"] =
      c.contains("max_witnesses")
          ? get_count(c.at("max_witnesses"), "\"max_witnesses\"")
          : std::uint64_t(4);
  if (c.contains("schedule")) {
    const json& s = c.at("schedule");
    check_keys(s, "\"schedule\"", {"delta", "C1", "C2", "C3"});
    json sched;
    sched["delta"] =
        get_exact_decimal(need(s, "delta", "\"schedule\""), "\"schedule.delta\"");
    for (const char* key : {"C1", "C2", "C3"})
      sched[key] = s.contains(key) ? get_exact_decimal(s.at(key),
                                                       std::string("\"schedule.") +
                                                           key + "\"")
                                   : std::string("1");
    out["schedule"] = sched;
  }
  return out;
}

json validate_structured(const json& c) {
  check_keys(c, "the config",
             {"experiment", "seed", "samples", "set", "simplices", "lambda"});
  json out;
  out["experiment"] = "structured";
  const std::uint64_t seed =
      c.contains("seed") ? get_count(c.at("seed"), "\"seed\"") : 1;
  out["seed"] = seed;
  out["samples"] = c.contains("samples")
                       ? get_count(c.at("samples"), "\"samples\"")
                       : std::uint64_t(100000);
  out["set"] = validate_set(need(c, "set", "the config"), seed);
  const std::vector<int> K = out["set"]["shape"].get<std::vector<int>>();
  out["simplices"] = validate_simplices(c, K);
  const double lambda = get_number(need(c, "lambda", "the config"), "\"lambda\"");
  if (!(lambda > 0.0) || lambda > 1.0) bad("\"lambda\" must lie in (0, 1]");
  out["lambda"] = lambda;
  return out;
}

json validate_identities(const json& c) {
  check_keys(c, "the config", {"experiment", "t", "j", "s_factor", "max_dim"});
  json out;
  out["experiment"] = "identities";
  const double t = c.contains("t") ? get_number(c.at("t"), "\"t\"") : 1.0;
  if (!(t > 0.0)) bad("\"t\" must be positive");
  out["t"] = t;
  out["j"] = c.contains("j") ? get_index(c.at("j"), "\"j\"", 1, 20) : 1;
  const double s_factor =
      c.contains("s_factor") ? get_number(c.at("s_factor"), "\"s_factor\"")
                             : 1.5;
  if (!(s_factor >= 1.0) || s_factor > 2.0)
    bad("\"s_factor\" must lie in [1, 2] (it places s inside the dyadic "
        "window)");
  out["s_factor"] = s_factor;
  out["max_dim"] =
      c.contains("max_dim") ? get_index(c.at("max_dim"), "\"max_dim\"", 1, 6)
                            : 6;
  return out;
}

json validate_telescoping(const json& c) {
  check_keys(c, "the config",
             {"experiment", "seed", "samples", "set", "L", "a", "b", "alpha"});
  json out;
  out["experiment"] = "telescoping";
  const std::uint64_t seed =
      c.contains("seed") ? get_count(c.at("seed"), "\"seed\"") : 1;
  out["seed"] = seed;
  out["samples"] = c.contains("samples")
                       ? get_count(c.at("samples"), "\"samples\"")
                       : std::uint64_t(100000);
  out["set"] = validate_set(need(c, "set", "the config"), seed);
  const std::vector<int> K = out["set"]["shape"].get<std::vector<int>>();

  const json& L_v = need(c, "L", "the config");
  if (!L_v.is_array() || L_v.size() != K.size())
    bad("\"L\" must list one slot count per factor");
  std::vector<int> L;
  for (std::size_t i = 0; i < K.size(); ++i) {
    L.push_back(get_index(L_v[i], "\"L\" entries", 1, K[i]));
  }
  out["L"] = L;

  const double a = get_number(need(c, "a", "the config"), "\"a\"");
  const double b = get_number(need(c, "b", "the config"), "\"b\"");
  if (!(a > 0.0) || b < 2.0 * a)
    bad("the scale window needs b >= 2a > 0");
  out["a"] = a;
  out["b"] = b;

  if (c.contains("alpha")) {
    const json& alpha_v = c.at("alpha");
    if (!alpha_v.is_array() || alpha_v.size() != K.size())
      bad("\"alpha\" must list one multiplier row per factor");
    for (std::size_t i = 0; i < K.size(); ++i) {
      const json& row = alpha_v[i];
      if (!row.is_array() || int(row.size()) != L[i] + 1)
        bad("\"alpha\"[" + std::to_string(i) + "] must have " +
            std::to_string(L[i] + 1) + " entries");
      for (const json& e : row)
        if (!(get_number(e, "\"alpha\" entries") >= 1.0))
          bad("\"alpha\" entries must be >= 1");
    }
    out["alpha"] = alpha_v;
  } else {
    json alpha = json::array();
    for (std::size_t i = 0; i < K.size(); ++i) {
      json row = json::array();
      for (int r = 0; r <= L[i]; ++r) row.push_back(1.0);
      alpha.push_back(row);
    }
    out["alpha"] = alpha;
  }
  return out;
}

json validate_growth(const json& c) {
  check_keys(c, "the config",
             {"experiment", "seed", "samples", "set", "simplices", "epsilon",
              "J_list"});
  json out;
  out["experiment"] = "growth";
  const std::uint64_t seed =
      c.contains("seed") ? get_count(c.at("seed"), "\"seed\"") : 1;
  out["seed"] = seed;
  out["samples"] = c.contains("samples")
                       ? get_count(c.at("samples"), "\"samples\"")
                       : std::uint64_t(200000);
  out["set"] = validate_set(need(c, "set", "the config"), seed);
  const std::vector<int> K = out["set"]["shape"].get<std::vector<int>>();
  out["simplices"] = validate_simplices(c, K);
  const double eps = get_number(need(c, "epsilon", "the config"), "\"epsilon\"");
  if (!(eps > 0.0) || eps >= 1.0) bad("\"epsilon\" must lie in (0, 1)");
  out["epsilon"] = eps;
  if (c.contains("J_list")) {
    const json& lst = c.at("J_list");
    if (!lst.is_array() || lst.empty())
      bad("\"J_list\" must be a nonempty array of dyadic depths");
    std::vector<int> J;
    for (const json& e : lst)
      J.push_back(get_index(e, "\"J_list\" entries", 1, 12));
    out["J_list"] = J;
  } else {
    out["J_list"] = std::vector<int>{1, 2, 3, 4, 5, 6};
  }
  return out;
}

json validate_uniform_decay(const json& c) {
  check_keys(c, "the config",
             {"experiment", "seed", "samples", "set", "simplices", "lambda",
              "eps_list"});
  json out;
  out["experiment"] = "uniform-decay";
  const std::uint64_t seed =
      c.contains("seed") ? get_count(c.at("seed"), "\"seed\"") : 1;
  out["seed"] = seed;
  out["samples"] = c.contains("samples")
                       ? get_count(c.at("samples"), "\"samples\"")
                       : std::uint64_t(200000);
  out["set"] = validate_set(need(c, "set", "the config"), seed);
  const std::vector<int> K = out["set"]["shape"].get<std::vector<int>>();
  out["simplices"] = validate_simplices(c, K);
  const double lambda = get_number(need(c, "lambda", "the config"), "\"lambda\"");
  if (!(lambda > 0.0) || lambda > 1.0) bad("\"lambda\" must lie in (0, 1]");
  out["lambda"] = lambda;
  if (c.contains("eps_list")) {
    const json& lst = c.at("eps_list");
    if (!lst.is_array() || lst.empty())
      bad("\"eps_list\" must be a nonempty array of widths");
    std::vector<double> eps;
    for (const json& e : lst) {
      const double x = get_number(e, "\"eps_list\" entries");
      if (!(x > 0.0) || x > 1.0) bad("\"eps_list\" entries must lie in (0, 1]");
      eps.push_back(x);
    }
    out["eps_list"] = eps;
  } else {
    out["eps_list"] = std::vector<double>{0.2, 0.1, 0.05, 0.025};
  }
  return out;
}

// ---------------- per-experiment runners ----------------

struct RunOutput {
  json result;
  std::string csv;
  std::string dat;
};

json witness_to_json(const Witness& w) {
  json out;
  out["sample_index"] = w.sample_index;
  out["lambda"] = w.lambda;
  out["base"] = w.base;
  out["offsets"] = w.offsets;
  return out;
}

RunOutput run_scan_experiment(const json& cfg, int workers,
                              std::vector<std::string>& violations) {
  const GridSet A = build_set(cfg.at("set"));
  const std::vector<SimplexData> simplices = build_simplices(cfg);
  RngStream stream(cfg.at("seed").get<std::uint64_t>());
  const ScanReport report = scan_lambda(
      A, simplices, cfg.at("lambda_min").get<double>(),
      cfg.at("lambda_max").get<double>(), cfg.at("grid_points").get<int>(),
      cfg.at("samples").get<std::uint64_t>(), stream, workers,
      cfg.at("max_witnesses").get<std::size_t>());

  json points = json::array();
  std::ostringstream csv, dat;
  csv << "lambda,value,std_err,detected,witnesses\n";
  dat << "# x y sigma\n";
  for (const ScanPoint& p : report.points) {
    json jp;
    jp["lambda"] = p.lambda;
    jp["value"] = p.estimate.value;
    jp["std_err"] = p.estimate.std_err;
    jp["detected"] = p.detected;
    json ws = json::array();
    for (const Witness& w : p.witnesses) {
      if (!verify_witness(A, simplices, w.lambda, w))
        violations.push_back("witness failed re-verification at lambda = " +
                             fmt(p.lambda));
      ws.push_back(witness_to_json(w));
    }
    jp["witnesses"] = ws;
    points.push_back(jp);
    csv << fmt(p.lambda) << ',' << fmt(p.estimate.value) << ','
        << fmt(p.estimate.std_err) << ',' << (p.detected ? 1 : 0) << ','
        << p.witnesses.size() << '\n';
    dat << fmt(p.lambda) << ' ' << fmt(p.estimate.value) << ' '
        << fmt(p.estimate.std_err) << '\n';
    if (p.estimate.value < 0.0 || p.estimate.value > 1.0)
      violations.push_back("estimate outside [0,1] at lambda = " +
                           fmt(p.lambda));
  }
  json intervals = json::array();
  for (const ScanInterval& iv : report.intervals)
    intervals.push_back({{"lambda_lo", iv.lambda_lo},
                         {"lambda_hi", iv.lambda_hi},
                         {"first_index", iv.first_index},
                         {"last_index", iv.last_index}});

  RunOutput out;
  out.result["points"] = points;
  out.result["intervals"] = intervals;
  out.result["set_density"] = A.density();
  if (cfg.contains("schedule")) {
    const json& s = cfg.at("schedule");
    const ProductShape shape = product_shape(
        cfg.at("set").at("shape").get<std::vector<int>>());
    const Schedule sched = make_schedule(
        rational_from_decimal(s.at("delta").get<std::string>()), shape,
        rational_from_decimal(s.at("C1").get<std::string>()),
        rational_from_decimal(s.at("C2").get<std::string>()),
        rational_from_decimal(s.at("C3").get<std::string>()));
    json js;
    js["epsilon"] = sched.epsilon.str();
    js["epsilon_double"] = sched.epsilon_double();
    js["J"] = sched.J_string();
    js["kappa"] = sched.kappa;
    js["rho"] = sched.rho;
    out.result["schedule"] = js;
  }
  out.csv = csv.str();
  out.dat = dat.str();
  return out;
}

RunOutput run_structured_experiment(const json& cfg, int workers,
                                    std::vector<std::string>& violations) {
  const GridSet A = build_set(cfg.at("set"));
  const std::vector<SimplexData> simplices = build_simplices(cfg);
  RngStream stream(cfg.at("seed").get<std::uint64_t>());
  const double lambda = cfg.at("lambda").get<double>();
  const JensenChain chain = jensen_chain(A, lambda);
  const StructuredFloor floor_report = structured_floor(
      A, simplices, lambda, cfg.at("samples").get<std::uint64_t>(), stream,
      workers);

  if (!chain.chain_ok)
    violations.push_back("averaged-count chain violated");
  if (!chain.per_cube_ok)
    violations.push_back("per-cube power inequality violated");

  RunOutput out;
  out.result["m"] = chain.m;
  out.result["cube_side"] = chain.cube_side;
  out.result["lhs"] = chain.lhs.str();
  out.result["mid"] = chain.mid.str();
  out.result["rhs"] = chain.rhs.str();
  out.result["lhs_double"] = chain.lhs.convert_to<double>();
  out.result["mid_double"] = chain.mid.convert_to<double>();
  out.result["rhs_double"] = chain.rhs.convert_to<double>();
  out.result["chain_ok"] = chain.chain_ok;
  out.result["per_cube_ok"] = chain.per_cube_ok;
  out.result["cubes"] = chain.per_cube.size();
  out.result["floor"] = {{"value", floor_report.estimate.value},
                         {"std_err", floor_report.estimate.std_err},
                         {"samples", floor_report.estimate.samples},
                         {"floor", floor_report.floor}};

  std::ostringstream csv, dat;
  csv << "cube_index,average,avg_pow_kappa,config_integral\n";
  dat << "# x y sigma\n";
  for (const CubeEntry& e : chain.per_cube) {
    csv << e.cube_index << ',' << fmt(e.average.convert_to<double>()) << ','
        << fmt(e.avg_pow_kappa.convert_to<double>()) << ','
        << fmt(e.config_integral.convert_to<double>()) << '\n';
    dat << e.cube_index << ' ' << fmt(e.config_integral.convert_to<double>())
        << " 0\n";
  }
  out.csv = csv.str();
  out.dat = dat.str();
  return out;
}

// Deterministic probe points for the kernel identities: magnitudes along the
// first axis and along the diagonal, scaled to the kernel width.
std::vector<std::vector<double>> probe_points(int dim, double width) {
  std::vector<std::vector<double>> pts;
  pts.push_back(std::vector<double>(std::size_t(dim), 0.0));
  const double mags[] = {0.3, 0.8, 1.5, 2.5};
  for (double m : mags) {
    std::vector<double> axis(std::size_t(dim), 0.0);
    axis[0] = m * width;
    pts.push_back(axis);
    std::vector<double> diag(std::size_t(dim),
                             m * width / std::sqrt(double(dim)));
    pts.push_back(diag);
  }
  return pts;
}

RunOutput run_identities_experiment(const json& cfg, int /*workers*/,
                                    std::vector<std::string>& violations) {
  const double t = cfg.at("t").get<double>();
  const int j = cfg.at("j").get<int>();
  const double s_factor = cfg.at("s_factor").get<double>();
  const int max_dim = cfg.at("max_dim").get<int>();
  const double lambda_j = 1.5 * std::ldexp(1.0, -j);
  const double s = s_factor * std::ldexp(t, -(j + 5));
  constexpr double kHeatTol = 1e-4;
  constexpr double kConvTol = 1e-3;

  RunOutput out;
  std::ostringstream csv, dat;
  csv << "dim,heat_error,khh_residual,gkh_residual\n";
  dat << "# x y sigma\n";
  json rows = json::array();
  for (int dim = 1; dim <= max_dim; ++dim) {
    const double heat_err = check_heat_identity(
        t, lambda_j, dim, probe_points(dim, t * lambda_j));
    const ConvIdentityReport conv = check_conv_identities(
        s, t, lambda_j, dim, probe_points(dim, t * lambda_j));
    if (heat_err > kHeatTol)
      violations.push_back("heat identity error above tolerance at dim " +
                           std::to_string(dim));
    if (conv.khh_residual > kConvTol)
      violations.push_back(
          "half-kernel convolution residual above tolerance at dim " +
          std::to_string(dim));
    if (conv.gkh_residual > kConvTol)
      violations.push_back(
          "split-kernel convolution residual above tolerance at dim " +
          std::to_string(dim));
    rows.push_back({{"dim", dim},
                    {"heat_error", heat_err},
                    {"khh_residual", conv.khh_residual},
                    {"gkh_residual", conv.gkh_residual}});
    csv << dim << ',' << fmt(heat_err) << ',' << fmt(conv.khh_residual) << ','
        << fmt(conv.gkh_residual) << '\n';
    dat << dim << ' ' << fmt(heat_err) << " 0\n";
  }
  out.result["rows"] = rows;
  out.result["t"] = t;
  out.result["lambda_j"] = lambda_j;
  out.result["s"] = s;
  out.result["heat_tolerance"] = kHeatTol;
  out.result["conv_tolerance"] = kConvTol;
  out.csv = csv.str();
  out.dat = dat.str();
  return out;
}

RunOutput run_telescoping_experiment(const json& cfg, int workers,
                                     std::vector<std::string>& violations) {
  const GridSet A = build_set(cfg.at("set"));
  RngStream stream(cfg.at("seed").get<std::uint64_t>());
  const TelescopingReport rep = check_telescoping(
      cfg.at("L").get<std::vector<int>>(), cfg.at("a").get<double>(),
      cfg.at("b").get<double>(),
      cfg.at("alpha").get<std::vector<std::vector<double>>>(), A,
      cfg.at("samples").get<std::uint64_t>(), stream, workers);

  if (std::fabs(rep.residual) > 5.0 * rep.std_err && rep.std_err > 0.0)
    violations.push_back("telescoping residual exceeds 5 standard errors");
  if (rep.xi_a < 0.0 || rep.xi_a > 1.0 || rep.xi_b < 0.0 || rep.xi_b > 1.0)
    violations.push_back("smoothed form left [0,1]");

  RunOutput out;
  out.result["theta_sum"] = rep.theta_sum;
  out.result["xi_a"] = rep.xi_a;
  out.result["xi_b"] = rep.xi_b;
  out.result["residual"] = rep.residual;
  out.result["std_err"] = rep.std_err;
  out.result["samples"] = rep.samples;
  std::ostringstream csv, dat;
  csv << "theta_sum,xi_a,xi_b,residual,std_err,samples\n";
  csv << fmt(rep.theta_sum) << ',' << fmt(rep.xi_a) << ',' << fmt(rep.xi_b)
      << ',' << fmt(rep.residual) << ',' << fmt(rep.std_err) << ','
      << rep.samples << '\n';
  dat << "# x y sigma\n";
  dat << "0 " << fmt(rep.residual) << ' ' << fmt(rep.std_err) << '\n';
  out.csv = csv.str();
  out.dat = dat.str();
  return out;
}

RunOutput run_growth_experiment(const json& cfg, int workers,
                                std::vector<std::string>& violations) {
  const GridSet A = build_set(cfg.at("set"));
  const std::vector<SimplexData> simplices = build_simplices(cfg);
  RngStream stream(cfg.at("seed").get<std::uint64_t>());
  const GrowthReport rep = growth_probe(
      A, simplices, cfg.at("epsilon").get<double>(),
      cfg.at("J_list").get<std::vector<int>>(),
      cfg.at("samples").get<std::uint64_t>(), stream, workers);

  RunOutput out;
  json rows = json::array();
  std::ostringstream csv, dat;
  csv << "j,lambda,n_eps,n_one,abs_diff,std_err\n";
  dat << "# x y sigma\n";
  for (const GrowthRow& r : rep.rows) {
    if (r.n_eps < 0.0 || r.n_eps > 1.0 || r.n_one < 0.0 || r.n_one > 1.0)
      violations.push_back("form estimate outside [0,1] at dyadic index " +
                           std::to_string(r.j));
    rows.push_back({{"j", r.j},
                    {"lambda", r.lambda},
                    {"n_eps", r.n_eps},
                    {"n_one", r.n_one},
                    {"abs_diff", r.abs_diff},
                    {"std_err", r.std_err}});
    csv << r.j << ',' << fmt(r.lambda) << ',' << fmt(r.n_eps) << ','
        << fmt(r.n_one) << ',' << fmt(r.abs_diff) << ',' << fmt(r.std_err)
        << '\n';
  }
  json sums = json::array();
  for (const GrowthSum& s : rep.sums) {
    sums.push_back({{"J", s.J}, {"sum", s.sum}, {"sigma", s.sigma}});
    dat << s.J << ' ' << fmt(s.sum) << ' ' << fmt(s.sigma) << '\n';
  }
  out.result["rows"] = rows;
  out.result["sums"] = sums;
  out.result["fit"] = {{"slope", rep.fit.slope},
                       {"intercept", rep.fit.intercept},
                       {"slope_se", rep.fit.slope_se},
                       {"points_used", rep.fit.points_used}};
  out.csv = csv.str();
  out.dat = dat.str();
  return out;
}

RunOutput run_uniform_decay_experiment(const json& cfg, int workers,
                                       std::vector<std::string>& violations) {
  const GridSet A = build_set(cfg.at("set"));
  const std::vector<SimplexData> simplices = build_simplices(cfg);
  RngStream stream(cfg.at("seed").get<std::uint64_t>());
  const DecayReport rep = check_uniform_decay(
      A, simplices, cfg.at("lambda").get<double>(),
      cfg.at("eps_list").get<std::vector<double>>(),
      cfg.at("samples").get<std::uint64_t>(), stream, workers);

  if (rep.base.value < 0.0 || rep.base.value > 1.0)
    violations.push_back("raw form estimate outside [0,1]");

  RunOutput out;
  out.result["base"] = {{"value", rep.base.value},
                        {"std_err", rep.base.std_err},
                        {"samples", rep.base.samples}};
  json points = json::array();
  std::ostringstream csv, dat;
  csv << "eps,abs_diff,std_err\n";
  dat << "# x y sigma\n";
  for (const DecayPoint& p : rep.points) {
    points.push_back({{"eps", p.eps},
                      {"abs_diff", p.abs_diff},
                      {"std_err", p.std_err}});
    csv << fmt(p.eps) << ',' << fmt(p.abs_diff) << ',' << fmt(p.std_err)
        << '\n';
    dat << fmt(p.eps) << ' ' << fmt(p.abs_diff) << ' ' << fmt(p.std_err)
        << '\n';
  }
  out.result["points"] = points;
  out.result["fit"] = {{"slope", rep.fit.slope},
                       {"intercept", rep.fit.intercept},
                       {"slope_se", rep.fit.slope_se},
                       {"points_used", rep.fit.points_used}};
  out.csv = csv.str();
  out.dat = dat.str();
  return out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw IoError("write failed for " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json validate_experiment_config(const json& config) {
  if (!config.is_object()) bad("the config must be a JSON object");
  const json& name_v = need(config, "experiment", "the config");
  if (!name_v.is_string()) bad("\"experiment\" must be a string");
  const std::string name = name_v.get<std::string>();
  if (name == "scan") return validate_scan(config);
  if (name == "structured") return validate_structured(config);
  if (name == "identities") return validate_identities(config);
  if (name == "telescoping") return validate_telescoping(config);
  if (name == "growth") return validate_growth(config);
  if (name == "uniform-decay") return validate_uniform_decay(config);
  bad("unknown experiment \"" + name +
      "\" (use scan, structured, identities, telescoping, growth, or "
      "uniform-decay)");
}

ExperimentResult run_experiment(const json& config, const std::string& out_dir,
                                int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult out;
  out.resolved_config = validate_experiment_config(config);
  out.experiment = out.resolved_config.at("experiment").get<std::string>();

  RunOutput run;
  if (out.experiment == "scan")
    run = run_scan_experiment(out.resolved_config, workers,
                              out.invariant_violations);
  else if (out.experiment == "structured")
    run = run_structured_experiment(out.resolved_config, workers,
                                    out.invariant_violations);
  else if (out.experiment == "identities")
    run = run_identities_experiment(out.resolved_config, workers,
                                    out.invariant_violations);
  else if (out.experiment == "telescoping")
    run = run_telescoping_experiment(out.resolved_config, workers,
                                     out.invariant_violations);
  else if (out.experiment == "growth")
    run = run_growth_experiment(out.resolved_config, workers,
                                out.invariant_violations);
  else
    run = run_uniform_decay_experiment(out.resolved_config, workers,
                                       out.invariant_violations);

  run.result["experiment"] = out.experiment;
  run.result["invariant_violations"] = out.invariant_violations;
  out.result = run.result;
  out.exit_code = out.invariant_violations.empty() ? 0 : 1;

  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);

  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
  json meta;
  meta["workers"] = workers;
  meta["written_utc"] = utc_timestamp();
  meta["elapsed_seconds"] = elapsed;

  write_text_file(dir / "resolved_config.json",
                  out.resolved_config.dump(2) + "\n");
  write_text_file(dir / "result.json", out.result.dump(2) + "\n");
  write_text_file(dir / (out.experiment + ".csv"), run.csv);
  write_text_file(dir / (out.experiment + ".dat"), run.dat);
  write_text_file(dir / "run_meta.json", meta.dump(2) + "\n");
  out.files_written = {"resolved_config.json", "result.json",
                       out.experiment + ".csv", out.experiment + ".dat",
                       "run_meta.json"};
  return out;
}

json load_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace simplexscan

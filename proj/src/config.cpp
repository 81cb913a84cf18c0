#include "sepmin/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace sepmin {

namespace {

using nlohmann::json;

const std::vector<ConfigKeyDoc> kSchema = {
    {"problem.family", "string",
     "quadratic_game | bilinear_game | mspbe | robust_ls (required)"},
    {"problem.seed", "uint64", "matrix-construction seed (default 0)"},
    {"problem.n", "int", "x-block dimension (quadratic_game, bilinear_game)"},
    {"problem.m", "int", "y-block dimension (quadratic_game)"},
    {"problem.a1_eig", "[lo,hi]", "eigenvalue range of A1; L_f = 2 hi, mu_f = 2 lo"},
    {"problem.a3_eig", "[lo,hi]", "eigenvalue range of A3; L_g = 2 hi, mu_g = 2 lo"},
    {"problem.a2tA2_eig", "[lo,hi]",
     "eigenvalue range of A2'A2; coupling norm = sqrt(hi)"},
    {"problem.b1_scale", "double", "norm of the x linear offset (default 0)"},
    {"problem.b2_scale", "double", "norm of the y linear offset (default 0)"},
    {"problem.sv", "[lo,hi]", "singular-value range of B (bilinear_game)"},
    {"problem.u_scale", "double", "norm of the bilinear offsets (default 0)"},
    {"problem.n_states", "int", "trajectory state count (mspbe)"},
    {"problem.feature_dim", "int", "feature dimension (mspbe)"},
    {"problem.gamma", "double", "discount factor in [0,1) (mspbe)"},
    {"problem.mu_reg", "double", "x regularizer weight (mspbe, default 1)"},
    {"problem.rows", "int", "rows of A (robust_ls)"},
    {"problem.cols", "int", "cols of A (robust_ls)"},
    {"problem.rho", "double", "concavity penalty, must be > 1/2 (robust_ls)"},
    {"problem.radius", "double", "norm of the nominal offset y0 (robust_ls)"},
    {"algorithm", "object|array",
     "one or more of: agog agog_restart sagog sagog_restart ogda seg seg_restart "
     "agog_direct nesterov bilinear_agog bilinear_agog_restart bilinear_sagog"},
    {"algorithm.name", "string", "algorithm identifier (required)"},
    {"algorithm.beta", "double", "coupling-noise exponent (bilinear_sagog, default 1)"},
    {"algorithm.eta", "double", "stepsize override (ogda, default 1/(2(L v L_H)))"},
    {"algorithm.gamma0", "double",
     "initial-distance bound for stochastic schedules in black-box mode"},
    {"algorithm.schedule", "string",
     "sagog stepsize rule: damped (default) | plain"},
    {"run.K", "int", "iteration count"},
    {"run.budget", "int", "gradient-query budget (sagog_restart)"},
    {"run.record_every", "int", "trace row stride in iterations (default 1)"},
    {"run.record_gap", "bool", "also record the primal-dual gap (default false)"},
    {"run.seeds", "[uint64...]", "per-run seeds; distinct, non-empty (default [0])"},
    {"run.z0.mode", "string", "offset_unit | origin | gaussian (default offset_unit)"},
    {"run.z0.radius", "double", "initial distance scale (default 1)"},
    {"run.restart.mode", "string", "none | fixed | theory (default none)"},
    {"run.restart.period", "int", "gradient queries between fixed restarts"},
    {"run.restart.target_sq", "double", "theory mode: squared-distance target"},
    {"run.restart.epochs", "int", "theory mode: explicit epoch count"},
    {"noise.kind", "string", "none | additive | matrix_perturbation (default none)"},
    {"noise.sigma_h", "double", "coupling-oracle deviation bound (additive)"},
    {"noise.sigma_f", "double", "individual-oracle deviation bound (additive)"},
    {"noise.sigma", "double", "entrywise matrix deviation (matrix_perturbation)"},
    {"noise.seed", "uint64", "noise stream seed (default 0)"},
    {"output.dir", "string", "output directory (default .)"},
    {"output.prefix", "string", "output file prefix (default: config stem)"},
    {"output.format", "string", "csv | json (default csv)"},
};

[[noreturn]] void fail(const std::string& key, const std::string& msg) {
  throw ConfigError("config key '" + key + "': " + msg);
}

double get_num(const json& j, const std::string& key) {
  if (!j.is_number()) fail(key, "expected a number");
  return j.get<double>();
}

std::int64_t get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) fail(key, "expected an integer");
  return j.get<std::int64_t>();
}

std::string get_str(const json& j, const std::string& key) {
  if (!j.is_string()) fail(key, "expected a string");
  return j.get<std::string>();
}

EigRange get_range(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(key, "expected [lo, hi]");
  EigRange r{j[0].get<double>(), j[1].get<double>()};
  if (r.hi < r.lo) fail(key, "needs lo <= hi");
  return r;
}

void reject_unknown(const json& obj, const std::string& prefix,
                    const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(prefix, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      fail(prefix.empty() ? key : prefix + "." + key, "unknown key");
}

ProblemSpec parse_problem(const json& p) {
  const std::string family = p.contains("family") ? get_str(p["family"], "problem.family")
                                                  : std::string();
  if (family.empty()) fail("problem.family", "required");
  const std::uint64_t seed =
      p.contains("seed") ? std::uint64_t(get_int(p["seed"], "problem.seed")) : 0;

  if (family == "quadratic_game") {
    reject_unknown(p, "problem",
                   {"family", "seed", "n", "m", "a1_eig", "a3_eig", "a2tA2_eig",
                    "b1_scale", "b2_scale"});
    QuadraticGameSpec q;
    q.seed = seed;
    if (p.contains("n")) q.n = get_int(p["n"], "problem.n");
    if (p.contains("m")) q.m = get_int(p["m"], "problem.m");
    if (!p.contains("a1_eig")) fail("problem.a1_eig", "required for quadratic_game");
    if (!p.contains("a3_eig")) fail("problem.a3_eig", "required for quadratic_game");
    if (!p.contains("a2tA2_eig"))
      fail("problem.a2tA2_eig", "required for quadratic_game");
    q.a1_eig = get_range(p["a1_eig"], "problem.a1_eig");
    q.a3_eig = get_range(p["a3_eig"], "problem.a3_eig");
    q.a2tA2_eig = get_range(p["a2tA2_eig"], "problem.a2tA2_eig");
    if (p.contains("b1_scale")) q.b1_scale = get_num(p["b1_scale"], "problem.b1_scale");
    if (p.contains("b2_scale")) q.b2_scale = get_num(p["b2_scale"], "problem.b2_scale");
    return q;
  }
  if (family == "bilinear_game") {
    reject_unknown(p, "problem", {"family", "seed", "n", "sv", "u_scale"});
    BilinearGenSpec b;
    b.seed = seed;
    if (p.contains("n")) b.n = get_int(p["n"], "problem.n");
    if (!p.contains("sv")) fail("problem.sv", "required for bilinear_game");
    const EigRange r = get_range(p["sv"], "problem.sv");
    b.sv_lo = r.lo;
    b.sv_hi = r.hi;
    if (p.contains("u_scale")) b.u_scale = get_num(p["u_scale"], "problem.u_scale");
    return b;
  }
  if (family == "mspbe") {
    reject_unknown(p, "problem",
                   {"family", "seed", "n_states", "feature_dim", "gamma", "mu_reg"});
    MspbeSpec s;
    s.seed = seed;
    if (p.contains("n_states")) s.n_states = int(get_int(p["n_states"], "problem.n_states"));
    if (p.contains("feature_dim"))
      s.feature_dim = int(get_int(p["feature_dim"], "problem.feature_dim"));
    if (p.contains("gamma")) s.gamma = get_num(p["gamma"], "problem.gamma");
    if (p.contains("mu_reg")) s.mu_reg = get_num(p["mu_reg"], "problem.mu_reg");
    return s;
  }
  if (family == "robust_ls") {
    reject_unknown(p, "problem", {"family", "seed", "rows", "cols", "rho", "radius"});
    RobustLsSpec s;
    s.seed = seed;
    if (p.contains("rows")) s.rows = get_int(p["rows"], "problem.rows");
    if (p.contains("cols")) s.cols = get_int(p["cols"], "problem.cols");
    if (p.contains("rho")) s.rho = get_num(p["rho"], "problem.rho");
    if (p.contains("radius")) s.radius = get_num(p["radius"], "problem.radius");
    return s;
  }
  fail("problem.family", "unknown family '" + family + "'");
}

AlgorithmSpec parse_algorithm(const json& a, const std::string& prefix) {
  reject_unknown(a, prefix, {"name", "beta", "eta", "gamma0", "schedule"});
  if (!a.contains("name")) fail(prefix + ".name", "required");
  AlgorithmSpec spec;
  spec.name = get_str(a["name"], prefix + ".name");
  if (a.contains("beta")) spec.beta = get_num(a["beta"], prefix + ".beta");
  if (a.contains("eta")) spec.eta = get_num(a["eta"], prefix + ".eta");
  if (a.contains("gamma0")) spec.gamma0 = get_num(a["gamma0"], prefix + ".gamma0");
  if (a.contains("schedule"))
    spec.schedule = get_str(a["schedule"], prefix + ".schedule");
  return spec;
}

RunSpec parse_run(const json& r) {
  reject_unknown(r, "run",
                 {"K", "budget", "record_every", "record_gap", "seeds", "z0", "restart"});
  RunSpec run;
  if (r.contains("K")) run.iters = get_int(r["K"], "run.K");
  if (r.contains("budget")) run.budget_queries = get_int(r["budget"], "run.budget");
  if (r.contains("record_every"))
    run.record_every = get_int(r["record_every"], "run.record_every");
  if (r.contains("record_gap")) {
    if (!r["record_gap"].is_boolean()) fail("run.record_gap", "expected a bool");
    run.record_gap = r["record_gap"].get<bool>();
  }
  if (r.contains("seeds")) {
    if (!r["seeds"].is_array() || r["seeds"].empty())
      fail("run.seeds", "expected a non-empty array");
    run.seeds.clear();
    for (const auto& s : r["seeds"])
      run.seeds.push_back(std::uint64_t(get_int(s, "run.seeds")));
  }
  if (r.contains("z0")) {
    const json& z = r["z0"];
    reject_unknown(z, "run.z0", {"mode", "radius"});
    if (z.contains("mode")) run.z0_mode = get_str(z["mode"], "run.z0.mode");
    if (z.contains("radius")) run.z0_radius = get_num(z["radius"], "run.z0.radius");
  }
  if (r.contains("restart")) {
    const json& re = r["restart"];
    reject_unknown(re, "run.restart", {"mode", "period", "target_sq", "epochs"});
    const std::string mode =
        re.contains("mode") ? get_str(re["mode"], "run.restart.mode") : "none";
    if (mode == "none") run.restart = RestartMode::none;
    else if (mode == "fixed") run.restart = RestartMode::fixed;
    else if (mode == "theory") run.restart = RestartMode::theory;
    else fail("run.restart.mode", "must be none, fixed or theory");
    if (re.contains("period"))
      run.restart_period = get_int(re["period"], "run.restart.period");
    if (re.contains("target_sq"))
      run.target_sq = get_num(re["target_sq"], "run.restart.target_sq");
    if (re.contains("epochs"))
      run.max_epochs = get_int(re["epochs"], "run.restart.epochs");
  }
  return run;
}

NoiseModel parse_noise(const json& n) {
  reject_unknown(n, "noise", {"kind", "sigma_h", "sigma_f", "sigma", "seed"});
  NoiseModel noise;
  const std::string kind = n.contains("kind") ? get_str(n["kind"], "noise.kind") : "none";
  if (kind == "none") noise.kind = NoiseModel::Kind::none;
  else if (kind == "additive") noise.kind = NoiseModel::Kind::additive;
  else if (kind == "matrix_perturbation")
    noise.kind = NoiseModel::Kind::matrix_perturbation;
  else fail("noise.kind", "must be none, additive or matrix_perturbation");
  if (n.contains("sigma")) {
    if (noise.kind != NoiseModel::Kind::matrix_perturbation)
      fail("noise.sigma", "only valid with kind = matrix_perturbation");
    noise.sigma_h = get_num(n["sigma"], "noise.sigma");
  }
  if (n.contains("sigma_h")) noise.sigma_h = get_num(n["sigma_h"], "noise.sigma_h");
  if (n.contains("sigma_f")) noise.sigma_f = get_num(n["sigma_f"], "noise.sigma_f");
  if (n.contains("seed")) noise.seed = std::uint64_t(get_int(n["seed"], "noise.seed"));
  return noise;
}

OutputSpec parse_output(const json& o) {
  reject_unknown(o, "output", {"dir", "prefix", "format"});
  OutputSpec out;
  if (o.contains("dir")) out.dir = get_str(o["dir"], "output.dir");
  if (o.contains("prefix")) out.prefix = get_str(o["prefix"], "output.prefix");
  if (o.contains("format")) {
    out.format = get_str(o["format"], "output.format");
    if (out.format != "csv" && out.format != "json")
      fail("output.format", "must be csv or json");
  }
  return out;
}

}  // namespace

const std::vector<ConfigKeyDoc>& config_schema() { return kSchema; }

std::string config_schema_text() {
  std::ostringstream os;
  os << "Config keys (JSON):\n";
  for (const auto& k : kSchema) {
    os << "  " << k.path;
    for (std::size_t i = std::string(k.path).size(); i < 24; ++i) os << ' ';
    os << k.type << "  " << k.desc << "\n";
  }
  return os.str();
}

ExperimentSpec parse_config(const nlohmann::json& doc) {
  reject_unknown(doc, "", {"problem", "algorithm", "run", "noise", "output"});
  if (!doc.contains("problem")) fail("problem", "required");
  if (!doc.contains("algorithm")) fail("algorithm", "required");

  ExperimentSpec spec;
  spec.problem = parse_problem(doc["problem"]);
  if (doc["algorithm"].is_array()) {
    std::size_t i = 0;
    for (const auto& a : doc["algorithm"])
      spec.algorithms.push_back(parse_algorithm(a, "algorithm[" + std::to_string(i++) + "]"));
    if (spec.algorithms.empty()) fail("algorithm", "array must be non-empty");
  } else {
    spec.algorithms.push_back(parse_algorithm(doc["algorithm"], "algorithm"));
  }
  if (doc.contains("run")) spec.run = parse_run(doc["run"]);
  if (doc.contains("noise")) spec.noise = parse_noise(doc["noise"]);
  if (doc.contains("output")) spec.output = parse_output(doc["output"]);

  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(doc.dump())));
  spec.config_hash = hash;
  return spec;
}

ExperimentSpec load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  ExperimentSpec spec = parse_config(doc);
  if (spec.output.prefix.empty()) {
    std::string stem = path;
    if (const auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
      stem = stem.substr(slash + 1);
    if (const auto dot = stem.find_last_of('.'); dot != std::string::npos)
      stem = stem.substr(0, dot);
    spec.output.prefix = stem;
  }
  return spec;
}

void apply_overrides(ExperimentSpec& spec, const CliOverrides& ov) {
  if (ov.seed) spec.run.seeds = {*ov.seed};
  if (ov.iters) spec.run.iters = *ov.iters;
  if (ov.out_dir) spec.output.dir = *ov.out_dir;
  if (ov.format) {
    if (*ov.format != "csv" && *ov.format != "json")
      throw ConfigError("--format must be csv or json");
    spec.output.format = *ov.format;
  }
}

}  // namespace sepmin

#include "sepmin/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace sepmin {

namespace {

double parse_double(std::string_view s, const char* what) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError(std::string("trace csv: bad ") + what);
  return v;
}

std::int64_t parse_int(std::string_view s, const char* what) {
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError(std::string("trace csv: bad ") + what);
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::int64_t seg_window_iters(std::int64_t period_queries) {
  return std::max<std::int64_t>(1, period_queries / 2);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

OracleBundle build_problem(const ProblemSpec& spec) {
  return std::visit(
      [](const auto& s) -> OracleBundle {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, QuadraticGameSpec>) {
          return make_quadratic_game(s);
        } else if constexpr (std::is_same_v<T, BilinearGenSpec>) {
          return make_bilinear_game(
              random_bilinear_spec(s.n, s.sv_lo, s.sv_hi, s.u_scale, s.seed));
        } else if constexpr (std::is_same_v<T, MspbeSpec>) {
          return make_mspbe(s);
        } else {
          return make_robust_ls(s);
        }
      },
      spec);
}

std::string problem_label(const ProblemSpec& spec) {
  std::ostringstream os;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, QuadraticGameSpec>) {
          os << "quadratic_game_n" << s.n << "m" << s.m << "_s" << s.seed;
        } else if constexpr (std::is_same_v<T, BilinearGenSpec>) {
          os << "bilinear_game_n" << s.n << "_s" << s.seed;
        } else if constexpr (std::is_same_v<T, MspbeSpec>) {
          os << "mspbe_d" << s.feature_dim << "_s" << s.seed;
        } else {
          os << "robust_ls_" << s.rows << "x" << s.cols << "_s" << s.seed;
        }
      },
      spec);
  return os.str();
}

PairVecD initial_point(const OracleBundle& oracle, const RunSpec& run,
                       std::uint64_t seed) {
  const Index n = oracle.n, m = oracle.m;
  if (run.z0_mode == "origin") return PairVecD::Zero(n, m);
  SeqRng rng(seed, 0x7a30, StreamKind::generator);
  VectorXd dir(n + m);
  for (Index i = 0; i < n + m; ++i) dir[i] = rng.normal();
  if (run.z0_mode == "gaussian") return PairVecD(run.z0_radius * dir, n);
  if (run.z0_mode != "offset_unit")
    throw ConfigError("run.z0.mode must be offset_unit, origin or gaussian");
  const double nrm = dir.norm();
  if (nrm > 0) dir *= run.z0_radius / nrm;
  VectorXd center = oracle.optimum ? oracle.optimum->joined()
                                   : VectorXd::Zero(n + m);
  return PairVecD(center + dir, n);
}

RunResult dispatch_run(const AlgorithmSpec& algo, const RunSpec& run,
                       const NoiseModel& noise, const OracleBundle& oracle,
                       std::uint64_t seed, const RecordOptions& rec) {
  RunContext ctx;
  ctx.master_seed = 0;
  ctx.seed_index = seed;
  const PairVecD z0 = initial_point(oracle, run, seed);
  const std::string& name = algo.name;
  const bool noisy = noise.kind != NoiseModel::Kind::none;

  auto need_iters = [&]() {
    if (run.iters < 1) throw ConfigError("run.K must be >= 1 for algorithm " + name);
    return run.iters;
  };
  auto restart_plan = [&](bool bilinear) {
    RestartPlan plan;
    if (run.restart == RestartMode::fixed) {
      if (run.restart_period < 1)
        throw ConfigError("run.restart.period must be >= 1 in fixed mode");
      plan.mode = RestartPlan::Mode::fixed;
      plan.period = run.restart_period;  // 1 query per iteration for this family
      plan.total_iters = run.iters;
    } else {
      plan.mode = RestartPlan::Mode::theory;
      plan.target_sq = run.target_sq;
      plan.max_epochs = run.max_epochs;
      plan.total_iters = run.iters;
      if (plan.target_sq <= 0 && plan.max_epochs <= 0 && plan.total_iters <= 0)
        throw ConfigError(
            "theory restart needs run.restart.target_sq, run.restart.epochs or run.K");
    }
    (void)bilinear;
    return plan;
  };

  if (name == "agog") {
    if (noisy) throw ConfigError("agog is deterministic; use sagog with noise");
    return agog_run(oracle, z0, need_iters(), make_agog_schedule(oracle.constants),
                    rec, ctx);
  }
  if (name == "agog_restart") {
    if (noisy) throw ConfigError("agog_restart is deterministic; use sagog_restart");
    return agog_restart_run(oracle, z0, restart_plan(false), rec, ctx);
  }
  if (algo.schedule != "damped" && algo.schedule != "plain")
    throw ConfigError("algorithm.schedule must be damped or plain");
  if (name == "sagog") {
    const StochasticOracle so = wrap_stochastic(oracle, noise);
    const ScheduleSet sched = algo.schedule == "plain"
                                  ? make_agog_schedule(oracle.constants)
                                  : sagog_schedule_for(so, z0, need_iters(), algo.gamma0);
    return sagog_run(so, z0, need_iters(), sched, rec, ctx);
  }
  if (name == "sagog_restart") {
    const StochasticOracle so = wrap_stochastic(oracle, noise);
    const std::int64_t budget =
        run.budget_queries > 0 ? run.budget_queries : need_iters();
    RestartPlan plan = restart_plan(false);
    plan.plain_stepsize = algo.schedule == "plain";
    return sagog_restart_run(so, z0, budget, plan, algo.gamma0, rec, ctx);
  }
  if (name == "ogda") {
    if (noisy) throw ConfigError("ogda baseline is deterministic");
    return ogda_run(oracle, z0, need_iters(), algo.eta, rec, ctx);
  }
  if (name == "seg" || name == "seg_restart") {
    const StochasticOracle so = wrap_stochastic(oracle, noise);
    std::int64_t window = need_iters();
    if (name == "seg_restart") {
      if (run.restart != RestartMode::fixed || run.restart_period < 1)
        throw ConfigError("seg_restart needs run.restart = fixed with a period");
      window = seg_window_iters(run.restart_period);
    }
    return seg_run(so, z0, run.iters, window, rec, ctx);
  }
  if (name == "agog_direct") {
    if (noisy) throw ConfigError("agog_direct is deterministic");
    return agog_direct_run(oracle, z0, need_iters(), rec, ctx);
  }
  if (name == "nesterov") {
    if (noisy) throw ConfigError("nesterov baseline is deterministic");
    return nesterov_run(oracle, z0, need_iters(), rec, ctx);
  }
  if (name == "bilinear_agog") {
    if (noisy) throw ConfigError("bilinear_agog is deterministic");
    return bilinear_agog_run(oracle, z0, need_iters(), rec, ctx);
  }
  if (name == "bilinear_agog_restart") {
    if (noisy) throw ConfigError("bilinear_agog_restart is deterministic");
    return bilinear_agog_restart_run(oracle, z0, restart_plan(true), rec, ctx);
  }
  if (name == "bilinear_sagog") {
    const StochasticOracle so = wrap_stochastic(oracle, noise);
    return bilinear_sagog_run(so, z0, need_iters(), algo.beta, rec, ctx);
  }
  throw ConfigError("unknown algorithm: " + name);
}

std::vector<RunTrace> run_experiment(const ExperimentSpec& spec,
                                     const AlgorithmSpec& algo, int threads) {
  const RunSpec& run = spec.run;
  if (run.seeds.empty()) throw ConfigError("run.seeds must be non-empty");
  for (std::size_t i = 0; i < run.seeds.size(); ++i)
    for (std::size_t j = i + 1; j < run.seeds.size(); ++j)
      if (run.seeds[i] == run.seeds[j])
        throw ConfigError("run.seeds must be distinct");
  if (run.record_every < 1) throw ConfigError("run.record_every must be >= 1");

  const OracleBundle oracle = build_problem(spec.problem);
  const std::string label = problem_label(spec.problem);
  RecordOptions rec{run.record_every, run.record_gap};

  std::vector<RunTrace> traces(run.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= run.seeds.size()) return;
      try {
        const std::uint64_t seed = run.seeds[i];
        RunResult res = dispatch_run(algo, run, spec.noise, oracle, seed, rec);
        RunTrace& t = traces[i];
        t.meta.algorithm = algo.name;
        t.meta.problem = label;
        t.meta.seed = seed;
        t.meta.config_hash = spec.config_hash;
        t.meta.mode = oracle.optimum ? "benchmark" : "blackbox";
        t.meta.diverged = res.status == RunStatus::diverged;
        t.rows = std::move(res.rows);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int nw = std::max(1, std::min<int>(threads, int(run.seeds.size())));
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return traces;
}

std::vector<AggregateRow> aggregate(const std::vector<RunTrace>& all_traces) {
  if (all_traces.empty()) throw ConfigError("aggregate: no traces");
  // Traces that never produced a row (immediate divergence) carry no data.
  std::vector<RunTrace> traces;
  for (const auto& t : all_traces)
    if (!t.rows.empty()) traces.push_back(t);
  if (traces.empty()) throw ConfigError("aggregate: all traces are empty");

  // Coarsest grid: the trace with the fewest rows, clipped to the query range
  // covered by every trace.
  const RunTrace* ref = &traces[0];
  for (const auto& t : traces)
    if (t.rows.size() < ref->rows.size()) ref = &t;
  std::int64_t first_common = 0, last_common = ref->rows.back().h_calls;
  for (const auto& t : traces) {
    first_common = std::max(first_common, t.rows.front().h_calls);
    last_common = std::min(last_common, t.rows.back().h_calls);
  }

  std::vector<std::int64_t> grid;
  for (const auto& row : ref->rows)
    if (row.h_calls >= first_common && row.h_calls <= last_common)
      grid.push_back(row.h_calls);
  if (grid.empty()) grid.push_back(last_common);

  std::vector<AggregateRow> out;
  out.reserve(grid.size());
  std::vector<double> vals(traces.size());
  for (const std::int64_t q : grid) {
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto& rows = traces[i].rows;
      // Last recorded row with h_calls <= q (carry-forward).
      double v = rows.front().sq_dist;
      for (const auto& row : rows) {
        if (row.h_calls > q) break;
        v = row.sq_dist;
      }
      vals[i] = v;
    }
    AggregateRow ar;
    ar.queries = q;
    ar.count = int(vals.size());
    ar.min = *std::min_element(vals.begin(), vals.end());
    ar.max = *std::max_element(vals.begin(), vals.end());
    double sum = 0;
    for (double v : vals) sum += v;
    ar.mean = sum / double(vals.size());
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t h = sorted.size() / 2;
    ar.median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
    out.push_back(ar);
  }
  return out;
}

BoundReport check_bounds(const RunResult& run, const OracleBundle& oracle,
                         BoundKind kind) {
  if (!oracle.optimum) throw UnsupportedError("check_bounds: needs a known optimum");
  BoundReport rep;
  rep.kind = kind;

  if (kind == BoundKind::nonexpansive) {
    rep.tolerance = 1e-10;
    rep.max_ratio = std::sqrt(run.max_integer_ratio_sq);
    rep.violations = rep.max_ratio > 1.0 + rep.tolerance ? 1 : 0;
    rep.pass = rep.violations == 0;
    return rep;
  }

  if (std::isnan(run.sq_dist0))
    throw UnsupportedError("check_bounds: run has no initial distance");
  rep.tolerance = 1e-9;

  double l = 0, mu = 0, l_h = 0, lmax = 0, lmin = 0;
  if (kind == BoundKind::rate) {
    const ProblemConstants& c = oracle.constants;
    if (c.mu_f != c.mu_g)
      throw UnsupportedError(
          "check_bounds(rate): needs matched strong convexity (mu_f == mu_g)");
    if (run.epochs != 1)
      throw UnsupportedError("check_bounds(rate): applies to single-epoch runs");
    l = c.individual_smoothness();
    mu = c.strong_convexity();
    l_h = c.coupling_smoothness();
  } else {
    if (!oracle.coupling_spectrum)
      throw UnsupportedError("check_bounds(bilinear_rate): coupling spectrum unknown");
    if (run.epochs != 1)
      throw UnsupportedError("check_bounds(bilinear_rate): single-epoch runs only");
    lmax = oracle.coupling_spectrum->sigma_max * oracle.coupling_spectrum->sigma_max;
    lmin = oracle.coupling_spectrum->sigma_min * oracle.coupling_spectrum->sigma_min;
  }

  for (const auto& row : run.rows) {
    const double bound = kind == BoundKind::rate
                             ? agog_rate_bound(row.iter, l, mu, l_h, run.sq_dist0)
                             : bilinear_rate_bound(row.iter, lmax, lmin, run.sq_dist0);
    const double ratio = row.sq_dist / bound;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (ratio > 1.0 + rep.tolerance) ++rep.violations;
  }
  rep.pass = rep.violations == 0;
  return rep;
}

std::string trace_to_csv(const RunTrace& trace) {
  if (trace.meta.algorithm.find(',') != std::string::npos ||
      trace.meta.problem.find(',') != std::string::npos)
    throw ConfigError("trace labels must not contain commas");
  std::string out = kTraceCsvHeader;
  out += '\n';
  for (const auto& r : trace.rows) {
    out += trace.meta.algorithm;
    out += ',';
    out += trace.meta.problem;
    out += ',';
    out += std::to_string(trace.meta.seed);
    out += ',';
    out += std::to_string(r.epoch);
    out += ',';
    out += std::to_string(r.iter);
    out += ',';
    out += std::to_string(r.h_calls);
    out += ',';
    out += std::to_string(r.f_calls);
    out += ',';
    out += format_double(r.sq_dist);
    out += ',';
    if (r.has_gap) out += format_double(r.gap);
    out += ',';
    out += std::to_string(r.elapsed_ns);
    out += '\n';
  }
  return out;
}

RunTrace trace_from_csv(const std::string& text) {
  RunTrace trace;
  std::size_t pos = 0;
  bool first = true;
  bool meta_set = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    if (first) {
      if (line != kTraceCsvHeader) throw ConfigError("trace csv: bad header");
      first = false;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 10) throw ConfigError("trace csv: bad field count");
    if (!meta_set) {
      trace.meta.algorithm = std::string(f[0]);
      trace.meta.problem = std::string(f[1]);
      trace.meta.seed = static_cast<std::uint64_t>(parse_int(f[2], "seed"));
      meta_set = true;
    }
    TraceRow r;
    r.epoch = parse_int(f[3], "epoch");
    r.iter = parse_int(f[4], "iter");
    r.h_calls = parse_int(f[5], "h_calls");
    r.f_calls = parse_int(f[6], "f_calls");
    r.sq_dist = parse_double(f[7], "sq_dist");
    if (!f[8].empty()) {
      r.has_gap = true;
      r.gap = parse_double(f[8], "gap");
    }
    r.elapsed_ns = parse_int(f[9], "elapsed_ns");
    trace.rows.push_back(r);
  }
  if (first) throw ConfigError("trace csv: empty document");
  return trace;
}

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "queries,mean,median,min,max,count\n";
  for (const auto& r : rows) {
    out += std::to_string(r.queries);
    out += ',';
    out += format_double(r.mean);
    out += ',';
    out += format_double(r.median);
    out += ',';
    out += format_double(r.min);
    out += ',';
    out += format_double(r.max);
    out += ',';
    out += std::to_string(r.count);
    out += '\n';
  }
  return out;
}

std::string trace_to_json(const RunTrace& trace) {
  nlohmann::json j;
  j["algorithm"] = trace.meta.algorithm;
  j["problem"] = trace.meta.problem;
  j["seed"] = trace.meta.seed;
  j["config_hash"] = trace.meta.config_hash;
  j["mode"] = trace.meta.mode;
  j["diverged"] = trace.meta.diverged;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : trace.rows) {
    nlohmann::json row;
    row["epoch"] = r.epoch;
    row["iter"] = r.iter;
    row["h_calls"] = r.h_calls;
    row["f_calls"] = r.f_calls;
    row["sq_dist"] = r.sq_dist;
    if (r.has_gap) row["gap"] = r.gap;
    row["elapsed_ns"] = r.elapsed_ns;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2);
}

bool rows_equal(const RunTrace& a, const RunTrace& b) {
  if (a.meta.algorithm != b.meta.algorithm || a.meta.problem != b.meta.problem ||
      a.meta.seed != b.meta.seed || a.rows.size() != b.rows.size())
    return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const TraceRow &x = a.rows[i], &y = b.rows[i];
    const bool sq_same = (x.sq_dist == y.sq_dist) ||
                         (std::isnan(x.sq_dist) && std::isnan(y.sq_dist));
    if (x.epoch != y.epoch || x.iter != y.iter || x.h_calls != y.h_calls ||
        x.f_calls != y.f_calls || !sq_same || x.has_gap != y.has_gap ||
        (x.has_gap && x.gap != y.gap) || x.elapsed_ns != y.elapsed_ns)
      return false;
  }
  return true;
}

}  // namespace sepmin

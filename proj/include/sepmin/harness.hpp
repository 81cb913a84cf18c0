#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sepmin/problems.hpp"
#include "sepmin/solvers.hpp"

namespace sepmin {

// Bilinear games are usually described by generator parameters rather than an
// explicit matrix; this is the serializable form.
struct BilinearGenSpec {
  Index n = 2;
  double sv_lo = 1.0, sv_hi = 1.0;
  double u_scale = 0.0;
  std::uint64_t seed = 0;
};

using ProblemSpec =
    std::variant<QuadraticGameSpec, BilinearGenSpec, MspbeSpec, RobustLsSpec>;

OracleBundle build_problem(const ProblemSpec& spec);
std::string problem_label(const ProblemSpec& spec);

enum class RestartMode { none, fixed, theory };

struct AlgorithmSpec {
  std::string name;  // agog, agog_restart, sagog, sagog_restart, ogda, seg,
                     // seg_restart, agog_direct, nesterov, bilinear_agog,
                     // bilinear_agog_restart, bilinear_sagog
  double beta = 1.0;        // bilinear_sagog coupling-noise exponent
  double eta = 0;           // ogda stepsize override (0 = default)
  std::optional<double> gamma0;  // stochastic distance bound (black-box mode)
  // Stepsize rule for sagog / sagog_restart: "damped" (variance-damped,
  // default) or "plain" (undamped accelerated stepsize).
  std::string schedule = "damped";
};

struct RunSpec {
  std::int64_t iters = 0;           // iteration count K
  std::int64_t budget_queries = 0;  // query budget for budgeted algorithms
  std::int64_t record_every = 1;
  bool record_gap = false;
  std::vector<std::uint64_t> seeds{0};
  std::string z0_mode = "offset_unit";  // offset_unit | origin | gaussian
  double z0_radius = 1.0;
  RestartMode restart = RestartMode::none;
  std::int64_t restart_period = 0;  // gradient queries between restarts (fixed)
  double target_sq = 0;             // theory-mode accuracy target
  std::int64_t max_epochs = 0;      // theory-mode explicit epoch count
};

struct OutputSpec {
  std::string dir = ".";
  std::string prefix;
  std::string format = "csv";  // csv | json
};

struct ExperimentSpec {
  ProblemSpec problem;
  std::vector<AlgorithmSpec> algorithms;
  RunSpec run;
  NoiseModel noise;
  OutputSpec output;
  std::string config_hash;
};

struct TraceMeta {
  std::string algorithm, problem, config_hash, mode;
  std::uint64_t seed = 0;
  bool diverged = false;
};

struct RunTrace {
  TraceMeta meta;
  std::vector<TraceRow> rows;
};

// Initial iterate for one seeded run: a point at the configured radius from
// the minimax point (or the origin in black-box/origin modes).
PairVecD initial_point(const OracleBundle& oracle, const RunSpec& run,
                       std::uint64_t seed);

// Executes one algorithm for one seed. Incompatible algorithm/problem/noise
// combinations raise ConfigError; divergence is reported in the result.
RunResult dispatch_run(const AlgorithmSpec& algo, const RunSpec& run,
                       const NoiseModel& noise, const OracleBundle& oracle,
                       std::uint64_t seed, const RecordOptions& rec);

// One trace per seed, dispatched to a small worker pool. Traces are
// deterministic per (spec, seed) and independent of worker scheduling.
std::vector<RunTrace> run_experiment(const ExperimentSpec& spec,
                                     const AlgorithmSpec& algo, int threads = 1);

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct AggregateRow {
  std::int64_t queries = 0;
  double mean = 0, median = 0, min = 0, max = 0;
  int count = 0;
};

// Cross-seed summary on a common gradient-query grid. Traces are resampled by
// last-value carry-forward onto the coarsest recorded grid, so aggregated
// curves never show progress that was not yet recorded.
std::vector<AggregateRow> aggregate(const std::vector<RunTrace>& traces);

// ---------------------------------------------------------------------------
// Bound checking
// ---------------------------------------------------------------------------

enum class BoundKind { rate, bilinear_rate, nonexpansive };

struct BoundReport {
  BoundKind kind;
  double max_ratio = 0;  // worst observed/bound ratio
  std::int64_t violations = 0;
  double tolerance = 0;
  bool pass = false;
};

BoundReport check_bounds(const RunResult& run, const OracleBundle& oracle,
                         BoundKind kind);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline constexpr const char* kTraceCsvHeader =
    "algorithm,problem,seed,epoch,iter,h_calls,f_calls,sq_dist,gap,elapsed_ns";

std::string trace_to_csv(const RunTrace& trace);
RunTrace trace_from_csv(const std::string& text);
std::string aggregate_to_csv(const std::vector<AggregateRow>& rows);
std::string trace_to_json(const RunTrace& trace);

bool rows_equal(const RunTrace& a, const RunTrace& b);

std::uint64_t fnv1a64(const std::string& text);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace sepmin

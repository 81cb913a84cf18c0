#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "sepmin/core.hpp"
#include "sepmin/problems.hpp"
#include "sepmin/schedules.hpp"

namespace sepmin {

enum class RunStatus { ok, diverged };

struct TraceRow {
  std::int64_t epoch = 0;
  std::int64_t iter = 0;  // completed iterations, cumulative across epochs
  std::int64_t h_calls = 0;
  std::int64_t f_calls = 0;
  double sq_dist = std::numeric_limits<double>::quiet_NaN();
  bool has_gap = false;
  double gap = 0;
  std::int64_t elapsed_ns = 0;
};

struct RecordOptions {
  std::int64_t record_every = 1;
  bool record_gap = false;
  // Wall-clock stamps are useful for profiling but break byte-level trace
  // comparisons; determinism checks turn them off.
  bool record_time = true;
};

struct RunResult {
  PairVecD output;        // reporting iterate (averaged or last, per algorithm)
  PairVecD last_integer;  // final integer iterate z_K
  std::vector<TraceRow> rows;
  CallCounters counters;
  RunStatus status = RunStatus::ok;
  std::int64_t diverged_at = -1;  // last finite iteration when diverged
  std::int64_t iters = 0;
  std::int64_t epochs = 1;
  // max_k sq_dist(z_k, z*) / sq_dist(z_0, z*) over integer iterates; NaN when
  // the instance has no attached optimum.
  double max_integer_ratio_sq = std::numeric_limits<double>::quiet_NaN();
  // sq_dist(z_0, z*) when the optimum is known, NaN otherwise.
  double sq_dist0 = std::numeric_limits<double>::quiet_NaN();
};

struct RestartPlan {
  enum class Mode { theory, fixed };
  Mode mode = Mode::theory;
  std::int64_t period = 0;       // fixed mode: iterations per epoch
  std::int64_t total_iters = 0;  // overall iteration budget (0 = none)
  double target_sq = 0;          // theory mode: accuracy target (needs z*)
  std::int64_t max_epochs = 0;   // explicit epoch count (black-box mode)
  // Stochastic runs default to the variance-damped stepsize; the plain
  // accelerated stepsize is the common practical choice.
  bool plain_stepsize = false;
};

// ---------------------------------------------------------------------------
// Accelerated optimistic solver and its restarted / stochastic variants.
// One coupling evaluation and one individual evaluation per iteration; the
// previous coupling gradient is reused, never recomputed.
// ---------------------------------------------------------------------------

RunResult agog_run(const OracleBundle& oracle, const PairVecD& z0, std::int64_t iters,
                   const ScheduleSet& sched, const RecordOptions& rec = {},
                   RunContext ctx = {});

RunResult agog_restart_run(const OracleBundle& oracle, const PairVecD& z0,
                           const RestartPlan& plan, const RecordOptions& rec = {},
                           RunContext ctx = {});

RunResult sagog_run(const StochasticOracle& oracle, const PairVecD& z0,
                    std::int64_t iters, const ScheduleSet& sched,
                    const RecordOptions& rec = {}, RunContext ctx = {});

// Restarted stochastic runs: fixed-length epochs in fixed mode; in theory
// mode, deterministic-length epochs while the bias term dominates, then
// doubling epoch lengths so the variance floor keeps halving. The damping
// term is rebuilt per epoch from that epoch's horizon and the current
// distance bound (exact when z* is attached, gamma0 otherwise).
RunResult sagog_restart_run(const StochasticOracle& oracle, const PairVecD& z0,
                            std::int64_t budget_queries, const RestartPlan& plan,
                            std::optional<double> gamma0 = std::nullopt,
                            const RecordOptions& rec = {}, RunContext ctx = {});

// Convenience: the stochastic schedule for a horizon-K run on this oracle,
// with the damping term from the exact distance (benchmark) or gamma0.
ScheduleSet sagog_schedule_for(const StochasticOracle& oracle, const PairVecD& z0,
                               std::int64_t iters,
                               std::optional<double> gamma0 = std::nullopt);

// ---------------------------------------------------------------------------
// Bilinear-game specialization: pure coupling updates with constant stepsize
// 1/(2 L_H) (deterministic) or 1/(2 L_H sqrt(1+beta)) (stochastic).
// ---------------------------------------------------------------------------

RunResult bilinear_agog_run(const OracleBundle& oracle, const PairVecD& z0,
                            std::int64_t iters, const RecordOptions& rec = {},
                            RunContext ctx = {});

RunResult bilinear_agog_restart_run(const OracleBundle& oracle, const PairVecD& z0,
                                    const RestartPlan& plan,
                                    const RecordOptions& rec = {}, RunContext ctx = {});

RunResult bilinear_sagog_run(const StochasticOracle& oracle, const PairVecD& z0,
                             std::int64_t iters, double beta = 1.0,
                             const RecordOptions& rec = {}, RunContext ctx = {});

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

// Single-call optimistic descent-ascent on the full field W, constant
// stepsize 1/(2 (L v L_H)) unless overridden; reports the last iterate.
RunResult ogda_run(const OracleBundle& oracle, const PairVecD& z0, std::int64_t iters,
                   double eta_override = 0, const RecordOptions& rec = {},
                   RunContext ctx = {});

// Extragradient with two fresh (noisy) field evaluations per iteration and
// uniform iterate averaging within each restart window.
RunResult seg_run(const StochasticOracle& oracle, const PairVecD& z0,
                  std::int64_t iters, std::int64_t restart_every_iters,
                  const RecordOptions& rec = {}, RunContext ctx = {});

// Single-loop direct variant with a constant strong-convexity-aware stepsize.
RunResult agog_direct_run(const OracleBundle& oracle, const PairVecD& z0,
                          std::int64_t iters, const RecordOptions& rec = {},
                          RunContext ctx = {});
// Its stepsize: 1 / ((1 + sqrt(L/mu + (sqrt(3+sqrt(3)) L_H)^2 / mu^2)) mu).
double agog_direct_stepsize(double l, double mu, double l_h);

// Accelerated-gradient baseline on the individual field only (three-line
// averaging scheme); also the reduction target when the coupling vanishes.
RunResult nesterov_run(const OracleBundle& oracle, const PairVecD& z0,
                       std::int64_t iters, const RecordOptions& rec = {},
                       RunContext ctx = {});

// ---------------------------------------------------------------------------
// Reductions and bounds
// ---------------------------------------------------------------------------

// Adds (eps/2)||x||^2 to f, so mu_f grows by exactly eps; the regularized
// instance's exact optimum becomes the solve target.
OracleBundle regularize_csc(const OracleBundle& oracle, double eps);

// Guaranteed squared-distance factor after K iterations of the accelerated
// optimistic solver: 4L/(mu (K+1)^2) + 2 sqrt(3+sqrt(3)) L_H / (mu (K+1)),
// times the initial squared distance.
double agog_rate_bound(std::int64_t iters, double l, double mu, double l_h,
                       double sq_dist0);

// Bilinear analogue: 64 lmax/(lmin (K+1)^2) times the initial squared
// distance, with lmax/lmin the extreme eigenvalues of B'B.
double bilinear_rate_bound(std::int64_t iters, double lambda_max, double lambda_min,
                           double sq_dist0);

}  // namespace sepmin

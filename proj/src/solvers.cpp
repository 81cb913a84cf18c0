#include "sepmin/solvers.hpp"

#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>

namespace sepmin {

namespace {

using Clock = std::chrono::steady_clock;

struct FieldHooks {
  std::function<VectorXd(const VectorXd&, RunContext&)> coupling, individual;
};

FieldHooks make_hooks(const OracleBundle& o) {
  FieldHooks hk;
  hk.coupling = [&o](const VectorXd& z, RunContext& ctx) {
    ctx.counters.h_calls += 1;
    return coupling_field_raw(o, z);
  };
  hk.individual = [&o](const VectorXd& z, RunContext& ctx) {
    ctx.counters.f_calls += 1;
    return individual_field_raw(o, z);
  };
  return hk;
}

FieldHooks make_hooks(const StochasticOracle& s) {
  FieldHooks hk;
  hk.coupling = [&s](const VectorXd& z, RunContext& ctx) { return s.coupling(z, ctx); };
  hk.individual = [&s](const VectorXd& z, RunContext& ctx) {
    return s.individual(z, ctx);
  };
  return hk;
}

// Per-run trace/diagnostic accumulator. Divergence is measured against z*
// when known, else against z0.
class Recorder {
 public:
  Recorder(const OracleBundle& base, const RecordOptions& rec, const VectorXd& z0)
      : base_(&base), rec_(rec), t0_(Clock::now()) {
    if (base.optimum) ref_ = base.optimum->joined();
    else ref_ = z0;
    ref_sq0_ = sq_dist_joined(z0, ref_);
    diverge_thresh_ =
        1e12 * std::max(ref_sq0_, 1e-12 * (1.0 + ref_.squaredNorm()));
    if (base.optimum && ref_sq0_ > 0) max_ratio_sq_ = 0.0;
  }

  bool within_bounds(const VectorXd& z) const {
    return z.allFinite() && sq_dist_joined(z, ref_) <= diverge_thresh_;
  }

  void track_integer(const VectorXd& z) {
    ++iter_;
    if (!std::isnan(max_ratio_sq_))
      max_ratio_sq_ = std::max(max_ratio_sq_, sq_dist_joined(z, ref_) / ref_sq0_);
  }

  void record(std::int64_t epoch, const CallCounters& c, const VectorXd& report,
              bool force) {
    const bool due = force || rec_.record_every <= 1 ||
                     (iter_ % rec_.record_every) == 0;
    if (!due && !report.allFinite()) return;
    TraceRow row;
    row.epoch = epoch;
    row.iter = iter_;
    row.h_calls = c.h_calls;
    row.f_calls = c.f_calls;
    row.sq_dist = base_->optimum ? sq_dist_joined(report, ref_)
                                 : std::numeric_limits<double>::quiet_NaN();
    if (due && rec_.record_gap && base_->has_values() && base_->optimum) {
      row.has_gap = true;
      row.gap = gap_value(*base_, PairVecD(report, base_->n), *base_->optimum);
    }
    if (rec_.record_time)
      row.elapsed_ns =
          std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0_)
              .count();
    if (due) {
      rows_.push_back(row);
      pending_ = false;
    } else {
      pending_row_ = row;  // kept so divergence can retain the last finite state
      pending_ = true;
    }
  }

  // Flushes the most recent finite off-stride row; called when a run aborts so
  // the partial trace ends at the last finite iterate.
  void flush_pending() {
    if (pending_) {
      rows_.push_back(pending_row_);
      pending_ = false;
    }
  }

  std::int64_t iter() const { return iter_; }
  double max_ratio_sq() const { return max_ratio_sq_; }
  double sq_dist0() const {
    return base_->optimum ? ref_sq0_ : std::numeric_limits<double>::quiet_NaN();
  }
  std::vector<TraceRow>&& take_rows() { return std::move(rows_); }

 private:
  const OracleBundle* base_;
  RecordOptions rec_;
  Clock::time_point t0_;
  VectorXd ref_;
  double ref_sq0_ = 0;
  double diverge_thresh_ = 0;
  double max_ratio_sq_ = std::numeric_limits<double>::quiet_NaN();
  std::vector<TraceRow> rows_;
  TraceRow pending_row_;
  bool pending_ = false;
  std::int64_t iter_ = 0;
};

void blockwise_step(VectorXd& dst, const VectorXd& base, const VectorXd& dir,
                    double eta, double y_ratio, Index n) {
  if (y_ratio == 1.0) {
    dst = base - eta * dir;
    return;
  }
  dst.resize(base.size());
  dst.head(n) = base.head(n) - eta * dir.head(n);
  dst.tail(base.size() - n) = base.tail(base.size() - n) -
                              (eta * y_ratio) * dir.tail(base.size() - n);
}

struct EpochState {
  VectorXd z, z_ag;
};

// One epoch of the accelerated optimistic loop. Exactly one fresh coupling
// evaluation and one fresh individual evaluation per iteration; the epoch
// opens with the single coupling evaluation at the (re-)initialized point.
RunStatus agog_epoch(const FieldHooks& hk, Index n, const ScheduleSet& sched,
                     std::int64_t iters, std::int64_t epoch, EpochState& st,
                     RunContext& ctx, Recorder& trc) {
  VectorXd h_prev = hk.coupling(st.z, ctx);
  VectorXd z_md, gf, dir, z_half, h_new;
  for (std::int64_t k = 0; k < iters; ++k) {
    const double alpha = sched.alpha(k);
    const double eta = sched.eta(k);
    z_md = (1.0 - alpha) * st.z_ag + alpha * st.z;
    gf = hk.individual(z_md, ctx);
    dir = h_prev + gf;
    blockwise_step(z_half, st.z, dir, eta, sched.y_ratio, n);
    st.z_ag = (1.0 - alpha) * st.z_ag + alpha * z_half;
    h_new = hk.coupling(z_half, ctx);
    dir = h_new + gf;
    blockwise_step(st.z, st.z, dir, eta, sched.y_ratio, n);
    h_prev.swap(h_new);
    trc.track_integer(st.z);
    if (!trc.within_bounds(st.z) || !st.z_ag.allFinite()) {
      trc.flush_pending();
      return RunStatus::diverged;
    }
    trc.record(epoch, ctx.counters, st.z_ag, k + 1 == iters);
  }
  return RunStatus::ok;
}

// Bilinear specialization: no individual component, so the individual oracle
// is never invoked and f_calls stays zero.
RunStatus bilinear_epoch(const FieldHooks& hk, const ScheduleSet& sched,
                         std::int64_t iters, std::int64_t epoch, EpochState& st,
                         RunContext& ctx, Recorder& trc) {
  VectorXd h_prev = hk.coupling(st.z, ctx);
  VectorXd z_half, h_new;
  for (std::int64_t k = 0; k < iters; ++k) {
    const double alpha = sched.alpha(k);
    const double eta = sched.eta(k);
    z_half = st.z - eta * h_prev;
    st.z_ag = (1.0 - alpha) * st.z_ag + alpha * z_half;
    h_new = hk.coupling(z_half, ctx);
    st.z = st.z - eta * h_new;
    h_prev.swap(h_new);
    trc.track_integer(st.z);
    if (!trc.within_bounds(st.z)) {
      trc.flush_pending();
      return RunStatus::diverged;
    }
    trc.record(epoch, ctx.counters, st.z_ag, k + 1 == iters);
  }
  return RunStatus::ok;
}

RunResult finish(const OracleBundle& o, Recorder& trc, EpochState& st,
                 const VectorXd& report, RunContext& ctx, RunStatus status,
                 std::int64_t epochs) {
  RunResult r{PairVecD(report, o.n), PairVecD(st.z, o.n), trc.take_rows(),
              ctx.counters};
  r.status = status;
  r.diverged_at = status == RunStatus::diverged ? trc.iter() : -1;
  r.iters = trc.iter();
  r.epochs = epochs;
  r.max_integer_ratio_sq = trc.max_ratio_sq();
  r.sq_dist0 = trc.sq_dist0();
  return r;
}

void require_bilinear(const OracleBundle& o) {
  const ProblemConstants& c = o.constants;
  if (c.l_f != 0 || c.l_g != 0 || c.mu_f != 0 || c.mu_g != 0)
    throw ConfigError("bilinear solver requires a pure bilinear instance (f = g = 0)");
}

CouplingSpectrum coupling_sv(const OracleBundle& o) {
  if (o.coupling_spectrum) return *o.coupling_spectrum;
  if (!o.model) throw UnsupportedError("coupling spectrum unavailable");
  Eigen::JacobiSVD<MatrixXd> svd(o.model->coupling);
  const auto& sv = svd.singularValues();
  return CouplingSpectrum{sv[0], sv[sv.size() - 1]};
}

double default_full_field_stepsize(const OracleBundle& o) {
  const double l = std::max(o.constants.individual_smoothness(),
                            o.constants.coupling_smoothness());
  return l > 0 ? 1.0 / (2.0 * l) : 1.0;  // zero field: any stepsize is stationary
}

std::int64_t resolve_epoch_budget(const RestartPlan& plan, const OracleBundle& o,
                                  const VectorXd& z0) {
  if (plan.target_sq > 0) {
    if (!o.optimum)
      throw ConfigError("restart target_sq needs an instance with a known optimum");
    const double sq0 = sq_dist_joined(z0, o.optimum->joined());
    return sq0 <= plan.target_sq ? 0 : epoch_count(sq0, plan.target_sq);
  }
  if (plan.max_epochs > 0) return plan.max_epochs;
  if (plan.total_iters > 0) return std::numeric_limits<std::int64_t>::max();
  throw ConfigError("restart plan needs target_sq, max_epochs or total_iters");
}

}  // namespace

// ---------------------------------------------------------------------------

RunResult agog_run(const OracleBundle& oracle, const PairVecD& z0, std::int64_t iters,
                   const ScheduleSet& sched, const RecordOptions& rec,
                   RunContext ctx) {
  oracle.check_point(z0);
  if (iters < 1) throw ConfigError("agog_run: iteration count must be >= 1");
  Recorder trc(oracle, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};
  const FieldHooks hk = make_hooks(oracle);
  const RunStatus status = agog_epoch(hk, oracle.n, sched, iters, 0, st, ctx, trc);
  return finish(oracle, trc, st, st.z_ag, ctx, status, 1);
}

RunResult sagog_run(const StochasticOracle& oracle, const PairVecD& z0,
                    std::int64_t iters, const ScheduleSet& sched,
                    const RecordOptions& rec, RunContext ctx) {
  const OracleBundle& base = oracle.base();
  base.check_point(z0);
  if (iters < 1) throw ConfigError("sagog_run: iteration count must be >= 1");
  Recorder trc(base, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};
  const FieldHooks hk = make_hooks(oracle);
  const RunStatus status = agog_epoch(hk, base.n, sched, iters, 0, st, ctx, trc);
  return finish(base, trc, st, st.z_ag, ctx, status, 1);
}

ScheduleSet sagog_schedule_for(const StochasticOracle& oracle, const PairVecD& z0,
                               std::int64_t iters, std::optional<double> gamma0) {
  const OracleBundle& base = oracle.base();
  double gamma = 0, z_bound = 0;
  if (base.optimum) {
    const double dist = std::sqrt(sq_dist(z0, *base.optimum));
    gamma = dist;
    z_bound = 2.0 * dist + base.optimum->joined().norm();
  } else if (gamma0) {
    gamma = *gamma0;
    z_bound = z0.joined().norm() + 2.0 * gamma;
  }
  const auto [sh, sf] = oracle.effective_sigmas(z_bound);
  const double sigma = combined_sigma(sh, sf);
  if (sigma > 0 && gamma <= 0)
    throw ConfigError(
        "stochastic schedule needs gamma0 when the instance optimum is unknown");
  return make_sagog_schedule(base.constants, sigma, iters, sigma > 0 ? gamma : 1.0);
}

RunResult agog_restart_run(const OracleBundle& oracle, const PairVecD& z0,
                           const RestartPlan& plan, const RecordOptions& rec,
                           RunContext ctx) {
  oracle.check_point(z0);
  const ScheduleSet sched = make_agog_schedule(oracle.constants);
  const std::int64_t epoch_len = plan.mode == RestartPlan::Mode::fixed
                                     ? plan.period
                                     : epoch_length(sched.l, sched.mu, sched.l_h);
  if (epoch_len < 1) throw ConfigError("restart plan: epoch length must be >= 1");
  const std::int64_t n_epochs = resolve_epoch_budget(plan, oracle, z0.joined());

  Recorder trc(oracle, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};
  const FieldHooks hk = make_hooks(oracle);
  RunStatus status = RunStatus::ok;
  std::int64_t epochs = 0;
  std::int64_t iters_left =
      plan.total_iters > 0 ? plan.total_iters : std::numeric_limits<std::int64_t>::max();
  for (std::int64_t e = 0; e < n_epochs && iters_left > 0; ++e) {
    const std::int64_t k = std::min(epoch_len, iters_left);
    st.z_ag = st.z;  // warm start: all three initial points coincide
    status = agog_epoch(hk, oracle.n, sched, k, e, st, ctx, trc);
    ++epochs;
    iters_left -= k;
    if (status == RunStatus::diverged) break;
    st.z = st.z_ag;  // epoch output seeds the next epoch
  }
  return finish(oracle, trc, st, st.z, ctx, status, epochs);
}

RunResult sagog_restart_run(const StochasticOracle& oracle, const PairVecD& z0,
                            std::int64_t budget_queries, const RestartPlan& plan,
                            std::optional<double> gamma0, const RecordOptions& rec,
                            RunContext ctx) {
  const OracleBundle& base = oracle.base();
  base.check_point(z0);
  if (budget_queries < 2)
    throw ConfigError("sagog_restart_run: budget must allow at least one iteration");

  const ScaledConstants sc = reduce_scaling(base.constants);
  const bool benchmark = base.optimum.has_value();
  if (!benchmark && !gamma0)
    throw ConfigError("sagog_restart_run: needs gamma0 when the optimum is unknown");

  double sq_cur = benchmark ? sq_dist(z0, *base.optimum)
                            : (*gamma0) * (*gamma0);
  // For state-dependent noise the second-moment bound contracts with the
  // epoch's starting ball, so it is rebuilt per epoch alongside the damping.
  auto epoch_sigma = [&](double sq_start) {
    const double z_bound =
        benchmark ? 2.0 * std::sqrt(sq_start) + base.optimum->joined().norm()
                  : z0.joined().norm() + 2.0 * std::sqrt(sq_start);
    const auto [sh, sf] = oracle.effective_sigmas(z_bound);
    return combined_sigma(sh, sf);
  };
  double sigma = epoch_sigma(sq_cur);

  const std::int64_t k_det = epoch_length(sc.l, sc.mu, sc.l_h);
  const double e = std::numbers::e_v<double>;

  Recorder trc(base, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};
  const FieldHooks hk = make_hooks(oracle);
  RunStatus status = RunStatus::ok;
  std::int64_t epochs = 0;
  std::int64_t queries_left = budget_queries;
  std::int64_t k_prev = k_det;
  bool doubling = false;

  while (queries_left > 1) {
    sigma = epoch_sigma(sq_cur);
    std::int64_t k_plan;
    if (plan.mode == RestartPlan::Mode::fixed) {
      k_plan = plan.period;
      if (k_plan < 1) throw ConfigError("restart plan: period must be >= 1");
    } else if (!doubling) {
      // Bias phase ends once a 1/e contraction can no longer clear the
      // variance floor of a deterministic-length epoch.
      const double gamma_cur = std::sqrt(sq_cur);
      const double floor =
          sigma > 0 ? 4.0 * sigma * gamma_cur / (sc.mu * std::sqrt(double(k_det + 1)))
                    : 0.0;
      if (sigma > 0 && sq_cur / e < floor) {
        doubling = true;
        k_plan = 2 * k_prev;
      } else {
        k_plan = k_det;
      }
    } else {
      k_plan = 2 * k_prev;
    }

    const std::int64_t k = std::min(k_plan, queries_left - 1);
    if (k < 1) break;

    const double gamma_cur = std::max(std::sqrt(sq_cur), 1e-300);
    ScheduleSet sched;
    sched.kind = plan.plain_stepsize ? ScheduleSet::Kind::deterministic
                                     : ScheduleSet::Kind::stochastic;
    sched.l = sc.l;
    sched.mu = sc.mu;
    sched.l_h = sc.l_h;
    sched.y_ratio = sc.y_ratio;
    sched.a_k = noise_accumulation<double>(k);
    if (!plan.plain_stepsize)
      sched.d = sigma > 0 ? sigma * sched.a_k / gamma_cur : 0.0;
    sched.epoch_len = k;

    st.z_ag = st.z;
    status = agog_epoch(hk, base.n, sched, k, epochs, st, ctx, trc);
    ++epochs;
    queries_left -= k + 1;
    if (status == RunStatus::diverged) break;
    st.z = st.z_ag;
    k_prev = k;

    if (benchmark) {
      sq_cur = sq_dist_joined(st.z, base.optimum->joined());
      if (plan.target_sq > 0 && sq_cur <= plan.target_sq) break;
    } else {
      const double floor =
          sigma > 0
              ? 4.0 * sigma * std::sqrt(sq_cur) / (sc.mu * std::sqrt(double(k + 1)))
              : 0.0;
      sq_cur = std::max(sq_cur / e, floor);
    }
    if (plan.max_epochs > 0 && epochs >= plan.max_epochs) break;
  }
  return finish(base, trc, st, st.z, ctx, status, epochs);
}

// ---------------------------------------------------------------------------
// Bilinear runners
// ---------------------------------------------------------------------------

RunResult bilinear_agog_run(const OracleBundle& oracle, const PairVecD& z0,
                            std::int64_t iters, const RecordOptions& rec,
                            RunContext ctx) {
  oracle.check_point(z0);
  require_bilinear(oracle);
  if (iters < 1) throw ConfigError("bilinear_agog_run: iteration count must be >= 1");
  const ScheduleSet sched = make_bilinear_schedule(oracle.constants.coupling_smoothness());
  Recorder trc(oracle, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};
  const FieldHooks hk = make_hooks(oracle);
  const RunStatus status = bilinear_epoch(hk, sched, iters, 0, st, ctx, trc);
  return finish(oracle, trc, st, st.z_ag, ctx, status, 1);
}

RunResult bilinear_agog_restart_run(const OracleBundle& oracle, const PairVecD& z0,
                                    const RestartPlan& plan, const RecordOptions& rec,
                                    RunContext ctx) {
  oracle.check_point(z0);
  require_bilinear(oracle);
  const CouplingSpectrum sv = coupling_sv(oracle);
  const std::int64_t epoch_len =
      plan.mode == RestartPlan::Mode::fixed
          ? plan.period
          : bilinear_epoch_length(sv.sigma_max * sv.sigma_max,
                                  sv.sigma_min * sv.sigma_min);
  if (epoch_len < 1) throw ConfigError("restart plan: epoch length must be >= 1");
  const std::int64_t n_epochs = resolve_epoch_budget(plan, oracle, z0.joined());
  const ScheduleSet sched = make_bilinear_schedule(oracle.constants.coupling_smoothness());

  Recorder trc(oracle, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};
  const FieldHooks hk = make_hooks(oracle);
  RunStatus status = RunStatus::ok;
  std::int64_t epochs = 0;
  std::int64_t iters_left =
      plan.total_iters > 0 ? plan.total_iters : std::numeric_limits<std::int64_t>::max();
  for (std::int64_t e = 0; e < n_epochs && iters_left > 0; ++e) {
    const std::int64_t k = std::min(epoch_len, iters_left);
    st.z_ag = st.z;
    status = bilinear_epoch(hk, sched, k, e, st, ctx, trc);
    ++epochs;
    iters_left -= k;
    if (status == RunStatus::diverged) break;
    st.z = st.z_ag;
  }
  return finish(oracle, trc, st, st.z, ctx, status, epochs);
}

RunResult bilinear_sagog_run(const StochasticOracle& oracle, const PairVecD& z0,
                             std::int64_t iters, double beta, const RecordOptions& rec,
                             RunContext ctx) {
  const OracleBundle& base = oracle.base();
  base.check_point(z0);
  require_bilinear(base);
  if (iters < 1) throw ConfigError("bilinear_sagog_run: iteration count must be >= 1");
  const ScheduleSet sched =
      make_bilinear_schedule(base.constants.coupling_smoothness(), beta);
  Recorder trc(base, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};
  const FieldHooks hk = make_hooks(oracle);
  const RunStatus status = bilinear_epoch(hk, sched, iters, 0, st, ctx, trc);
  return finish(base, trc, st, st.z_ag, ctx, status, 1);
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

RunResult ogda_run(const OracleBundle& oracle, const PairVecD& z0, std::int64_t iters,
                   double eta_override, const RecordOptions& rec, RunContext ctx) {
  oracle.check_point(z0);
  if (iters < 1) throw ConfigError("ogda_run: iteration count must be >= 1");
  const double eta =
      eta_override > 0 ? eta_override : default_full_field_stepsize(oracle);

  Recorder trc(oracle, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};

  // Model-backed instances get an assembled linear field; long baseline runs
  // (condition-number sweeps) are allocation-bound otherwise.
  std::optional<LinearField> lin;
  if (oracle.model) lin = assemble_linear_field(*oracle.model);
  const FieldHooks hk = make_hooks(oracle);
  VectorXd w_buf(st.z.size());
  auto field = [&](const VectorXd& z, VectorXd& out) {
    if (lin) {
      ctx.counters.h_calls += 1;
      ctx.counters.f_calls += 1;
      out.noalias() = lin->m * z;
      out += lin->q;
      return;
    }
    out = hk.coupling(z, ctx);
    out += hk.individual(z, ctx);
  };

  VectorXd w_prev(st.z.size());
  field(st.z, w_prev);
  VectorXd z_half, w_new(st.z.size());
  RunStatus status = RunStatus::ok;
  for (std::int64_t k = 0; k < iters; ++k) {
    z_half = st.z - eta * w_prev;
    field(z_half, w_new);
    st.z -= eta * w_new;
    w_prev.swap(w_new);
    trc.track_integer(st.z);
    if (!trc.within_bounds(st.z)) {
      trc.flush_pending();
      status = RunStatus::diverged;
      break;
    }
    trc.record(0, ctx.counters, st.z, k + 1 == iters);
  }
  return finish(oracle, trc, st, st.z, ctx, status, 1);
}

RunResult seg_run(const StochasticOracle& oracle, const PairVecD& z0,
                  std::int64_t iters, std::int64_t restart_every_iters,
                  const RecordOptions& rec, RunContext ctx) {
  const OracleBundle& base = oracle.base();
  base.check_point(z0);
  if (iters < 1) throw ConfigError("seg_run: iteration count must be >= 1");
  if (restart_every_iters < 1)
    throw ConfigError("seg_run: restart window must be >= 1 iteration");
  const double eta = default_full_field_stepsize(base);

  Recorder trc(base, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};
  const FieldHooks hk = make_hooks(oracle);
  auto field = [&](const VectorXd& z) {
    VectorXd w = hk.coupling(z, ctx);
    w += hk.individual(z, ctx);
    return w;
  };

  VectorXd mid, avg = VectorXd::Zero(st.z.size());
  std::int64_t in_window = 0, epoch = 0;
  RunStatus status = RunStatus::ok;
  for (std::int64_t k = 0; k < iters; ++k) {
    const VectorXd g1 = field(st.z);
    mid = st.z - eta * g1;
    const VectorXd g2 = field(mid);
    st.z = st.z - eta * g2;
    avg += mid;
    ++in_window;
    st.z_ag = avg / double(in_window);
    trc.track_integer(st.z);
    if (!trc.within_bounds(st.z)) {
      trc.flush_pending();
      status = RunStatus::diverged;
      break;
    }
    trc.record(epoch, ctx.counters, st.z_ag, k + 1 == iters);
    if (in_window == restart_every_iters && k + 1 < iters) {
      st.z = st.z_ag;  // restart warm-starts from the window average
      avg.setZero();
      in_window = 0;
      ++epoch;
    }
  }
  return finish(base, trc, st, st.z_ag, ctx, status, epoch + 1);
}

double agog_direct_stepsize(double l, double mu, double l_h) {
  if (mu <= 0) throw InvalidSpecError("agog_direct_stepsize: requires mu > 0");
  const double ch = accel_coupling_coef<double>() * l_h;
  return 1.0 / ((1.0 + std::sqrt(l / mu + ch * ch / (mu * mu))) * mu);
}

RunResult agog_direct_run(const OracleBundle& oracle, const PairVecD& z0,
                          std::int64_t iters, const RecordOptions& rec,
                          RunContext ctx) {
  oracle.check_point(z0);
  if (iters < 1) throw ConfigError("agog_direct_run: iteration count must be >= 1");
  const ScaledConstants sc = reduce_scaling(oracle.constants);
  const double eta = agog_direct_stepsize(sc.l, sc.mu, sc.l_h);
  ScheduleSet sched = make_constant_schedule(eta, sc.l_h);
  sched.y_ratio = sc.y_ratio;
  sched.l = sc.l;
  sched.mu = sc.mu;

  Recorder trc(oracle, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};
  const FieldHooks hk = make_hooks(oracle);
  const RunStatus status = agog_epoch(hk, oracle.n, sched, iters, 0, st, ctx, trc);
  return finish(oracle, trc, st, st.z_ag, ctx, status, 1);
}

RunResult nesterov_run(const OracleBundle& oracle, const PairVecD& z0,
                       std::int64_t iters, const RecordOptions& rec, RunContext ctx) {
  oracle.check_point(z0);
  if (iters < 1) throw ConfigError("nesterov_run: iteration count must be >= 1");
  const double l = oracle.constants.individual_smoothness();
  if (l <= 0) throw InvalidSpecError("nesterov_run: needs a smooth individual part");

  Recorder trc(oracle, rec, z0.joined());
  EpochState st{z0.joined(), z0.joined()};
  const FieldHooks hk = make_hooks(oracle);
  VectorXd z_md, g;
  RunStatus status = RunStatus::ok;
  for (std::int64_t k = 0; k < iters; ++k) {
    const double alpha = momentum_weight<double>(k);
    const double eta = agog_stepsize<double>(k, l, 0.0);
    z_md = (1.0 - alpha) * st.z_ag + alpha * st.z;
    g = hk.individual(z_md, ctx);
    st.z = st.z - eta * g;
    st.z_ag = (1.0 - alpha) * st.z_ag + alpha * st.z;
    trc.track_integer(st.z);
    if (!trc.within_bounds(st.z)) {
      trc.flush_pending();
      status = RunStatus::diverged;
      break;
    }
    trc.record(0, ctx.counters, st.z_ag, k + 1 == iters);
  }
  return finish(oracle, trc, st, st.z_ag, ctx, status, 1);
}

// ---------------------------------------------------------------------------

OracleBundle regularize_csc(const OracleBundle& oracle, double eps) {
  if (eps <= 0) throw InvalidSpecError("regularize_csc: eps must be > 0");
  if (!oracle.model)
    throw UnsupportedError("regularize_csc: needs a linear-gradient instance");
  QuadraticModel model = *oracle.model;
  model.hess_f += eps * MatrixXd::Identity(model.n(), model.n());
  ProblemConstants c = oracle.constants;
  c.mu_f += eps;
  c.l_f += eps;
  return bundle_from_model(std::move(model), c, oracle.family);
}

double agog_rate_bound(std::int64_t iters, double l, double mu, double l_h,
                       double sq_dist0) {
  if (mu <= 0) throw InvalidSpecError("agog_rate_bound: requires mu > 0");
  const double kp1 = double(iters + 1);
  return (4.0 * l / (mu * kp1 * kp1) +
          2.0 * accel_coupling_coef<double>() * l_h / (mu * kp1)) *
         sq_dist0;
}

double bilinear_rate_bound(std::int64_t iters, double lambda_max, double lambda_min,
                           double sq_dist0) {
  if (lambda_min <= 0)
    throw InvalidSpecError("bilinear_rate_bound: requires lambda_min > 0");
  const double kp1 = double(iters + 1);
  return 64.0 * lambda_max / (lambda_min * kp1 * kp1) * sq_dist0;
}

}  // namespace sepmin

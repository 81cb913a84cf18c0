#include "sepmin/verify.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace sepmin::verify {

namespace {

constexpr int kBatterySeeds = 20;

CheckResult make_result(std::string name, bool pass, double measured,
                        double threshold, std::string details = {}) {
  return CheckResult{std::move(name), pass, measured, threshold, std::move(details)};
}

bool rows_equal_ignoring_time(const std::vector<TraceRow>& a,
                              const std::vector<TraceRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].epoch != b[i].epoch || a[i].iter != b[i].iter ||
        a[i].h_calls != b[i].h_calls || a[i].f_calls != b[i].f_calls ||
        a[i].sq_dist != b[i].sq_dist || a[i].has_gap != b[i].has_gap ||
        (a[i].has_gap && a[i].gap != b[i].gap))
      return false;
  }
  return true;
}

PairVecD unit_offset_start(const OracleBundle& o, std::uint64_t seed) {
  RunSpec run;
  return initial_point(o, run, seed);
}

// --------------------------------------------------------------------------
// bounds suite
// --------------------------------------------------------------------------

std::vector<CheckResult> suite_bounds() {
  std::vector<CheckResult> out;

  // Nonexpansiveness of integer iterates and the polynomial rate bound on the
  // seeded battery.
  double worst_ratio = 0, worst_bound_ratio = 0;
  std::int64_t violations = 0;
  for (int s = 0; s < kBatterySeeds; ++s) {
    const OracleBundle o = battery_instance(std::uint64_t(s) + 1);
    const PairVecD z0 = unit_offset_start(o, std::uint64_t(s) + 1);
    RecordOptions rec;
    rec.record_every = 10;
    const RunResult r =
        agog_run(o, z0, 10000, make_agog_schedule(o.constants), rec);
    worst_ratio = std::max(worst_ratio, std::sqrt(r.max_integer_ratio_sq));
    const BoundReport rep = check_bounds(r, o, BoundKind::rate);
    worst_bound_ratio = std::max(worst_bound_ratio, rep.max_ratio);
    violations += rep.violations;
  }
  out.push_back(make_result("nonexpansiveness_max_ratio", worst_ratio <= 1 + 1e-10,
                            worst_ratio, 1 + 1e-10,
                            "max_k ||z_k - z*|| / ||z_0 - z*|| over 20 seeds"));
  out.push_back(make_result("rate_bound_max_ratio",
                            violations == 0 && worst_bound_ratio <= 1 + 1e-9,
                            worst_bound_ratio, 1 + 1e-9,
                            "sq_dist(zag_K) / bound at every recorded K"));

  // Bilinear rate bound on seeded full-rank couplings.
  double worst_bl = 0;
  std::int64_t bl_violations = 0;
  for (const double kappa : {1.0, 100.0}) {
    for (int s = 0; s < 5; ++s) {
      const OracleBundle o = bilinear_instance(kappa, std::uint64_t(s) + 1);
      const PairVecD z0 = unit_offset_start(o, std::uint64_t(s) + 1);
      const RunResult r = bilinear_agog_run(o, z0, 2000, RecordOptions{});
      const BoundReport rep = check_bounds(r, o, BoundKind::bilinear_rate);
      worst_bl = std::max(worst_bl, rep.max_ratio);
      bl_violations += rep.violations;
    }
  }
  out.push_back(make_result("bilinear_rate_bound_max_ratio",
                            bl_violations == 0 && worst_bl <= 1 + 1e-9, worst_bl,
                            1 + 1e-9, "kappa in {1, 100}, 5 seeds each"));

  // Gap lower bound V(z, z*) >= mu/2 * sq_dist(z, z*) - 1e-9.
  double worst_slack = 0;
  const std::vector<OracleBundle> gap_instances = {
      battery_instance(3, 10, 10),
      make_mspbe(MspbeSpec{16, 5, 0.9, 1.0, 7}),
      make_robust_ls(RobustLsSpec{6, 4, 1.0, 1.0, 7}),
  };
  for (const OracleBundle& o : gap_instances) {
    SeqRng rng(11, 0, StreamKind::generator);
    const double mu = o.constants.strong_convexity();
    for (int t = 0; t < 1000; ++t) {
      VectorXd z(o.n + o.m);
      for (Index i = 0; i < z.size(); ++i) z[i] = 3.0 * rng.normal();
      const PairVecD zp(z, o.n);
      const double gap = gap_value(o, zp, *o.optimum);
      const double lower = 0.5 * mu * sq_dist(zp, *o.optimum);
      worst_slack = std::max(worst_slack, lower - gap);
    }
  }
  out.push_back(make_result("gap_lower_bound_slack", worst_slack <= 1e-9, worst_slack,
                            1e-9, "max over 1000 points x 3 instances of "
                                  "(mu/2) sq_dist - V"));
  return out;
}

// --------------------------------------------------------------------------
// reductions suite
// --------------------------------------------------------------------------

std::vector<CheckResult> suite_reductions() {
  std::vector<CheckResult> out;

  // Coupling-free: the accelerated optimistic loop collapses to the
  // three-line accelerated-gradient scheme.
  {
    QuadraticGameSpec qs;
    qs.n = qs.m = 6;
    qs.a1_eig = {0.5, 8};
    qs.a3_eig = {0.5, 8};
    qs.a2tA2_eig = {0, 0};
    qs.b1_scale = 0.7;
    qs.seed = 5;
    const OracleBundle o = make_quadratic_game(qs);
    const PairVecD z0 = unit_offset_start(o, 5);
    const ScheduleSet sched = make_agog_schedule(o.constants);
    double worst = 0;
    for (std::int64_t k = 1; k <= 100; ++k) {
      const VectorXd a = agog_run(o, z0, k, sched).output.joined();
      const VectorXd b = nesterov_run(o, z0, k).output.joined();
      worst = std::max(worst, (a - b).norm() / (1 + b.norm()));
    }
    out.push_back(make_result("coupling_free_reduction", worst <= 1e-12, worst, 1e-12,
                              "vs accelerated-gradient iterates, 100 steps"));
  }

  // Individual-free: collapses to single-call optimistic updates on the
  // coupling field with the same stepsize.
  {
    const OracleBundle o = bilinear_instance(4.0, 3);
    const PairVecD z0 = unit_offset_start(o, 3);
    ScheduleSet sched;
    sched.kind = ScheduleSet::Kind::deterministic;
    sched.l = 0;
    sched.l_h = o.constants.coupling_smoothness();
    const double eta = sched.eta(0);  // constant when L = 0
    double worst = 0;
    for (std::int64_t k = 1; k <= 100; ++k) {
      const VectorXd a = agog_run(o, z0, k, sched).last_integer.joined();
      const VectorXd b = ogda_run(o, z0, k, eta).last_integer.joined();
      worst = std::max(worst, (a - b).norm() / (1 + b.norm()));
    }
    out.push_back(make_result("individual_free_reduction", worst <= 1e-12, worst,
                              1e-12, "vs past-gradient optimistic iterates"));
  }

  // Scaling: the two-stepsize update block equals the single-stepsize run on
  // the y-rescaled instance, iterate for iterate.
  {
    QuadraticGameSpec qs;
    qs.n = qs.m = 8;
    qs.a1_eig = {0.5, 32};
    qs.a3_eig = {1.0 / 128.0, 0.5};
    qs.a2tA2_eig = {0.25, 1.0};
    qs.b1_scale = 0.3;
    qs.b2_scale = 0.4;
    qs.seed = 9;
    const OracleBundle o = make_quadratic_game(qs);
    const double s = std::sqrt(o.constants.mu_f / o.constants.mu_g);
    const OracleBundle scaled = scale_y_oracle(o, s);
    const PairVecD z0 = unit_offset_start(o, 9);
    VectorXd z0s_vec = z0.joined();
    z0s_vec.tail(o.m) /= s;
    const PairVecD z0s(z0s_vec, o.n);
    const ScheduleSet two_step = make_agog_schedule(o.constants);
    const ScheduleSet one_step = make_agog_schedule(scaled.constants);
    double worst = 0;
    for (std::int64_t k = 1; k <= 100; ++k) {
      const VectorXd a = agog_run(o, z0, k, two_step).output.joined();
      VectorXd b = agog_run(scaled, z0s, k, one_step).output.joined();
      b.tail(o.m) *= s;
      worst = std::max(worst, (a - b).norm() / (1 + b.norm()));
    }
    out.push_back(make_result("scaling_reduction", worst <= 1e-12, worst, 1e-12,
                              "two-stepsize block vs rescaled single-stepsize run"));
  }

  // Zero-noise degeneracy: sigma = 0 stochastic run is bitwise the
  // deterministic run under the same damped schedule.
  {
    const OracleBundle o = battery_instance(2, 12, 12);
    const PairVecD z0 = unit_offset_start(o, 2);
    NoiseModel nm;
    nm.kind = NoiseModel::Kind::additive;
    const StochasticOracle so = wrap_stochastic(o, nm);
    const ScheduleSet sched = sagog_schedule_for(so, z0, 200);
    RecordOptions rec;
    rec.record_time = false;
    const RunResult a = sagog_run(so, z0, 200, sched, rec);
    const RunResult b = agog_run(o, z0, 200, sched, rec);
    const bool same = rows_equal_ignoring_time(a.rows, b.rows) &&
                      a.output.joined() == b.output.joined();
    out.push_back(make_result("zero_noise_degeneracy", same, same ? 0 : 1, 0,
                              "bitwise trace equality at sigma = 0"));
  }
  return out;
}

// --------------------------------------------------------------------------
// accounting suite
// --------------------------------------------------------------------------

std::vector<CheckResult> suite_accounting() {
  std::vector<CheckResult> out;
  const std::int64_t iters = 137;
  const OracleBundle o = battery_instance(4, 10, 10);
  const PairVecD z0 = unit_offset_start(o, 4);
  NoiseModel nm;
  nm.kind = NoiseModel::Kind::additive;
  nm.sigma_h = 0.05;
  nm.sigma_f = 0.05;
  const StochasticOracle so = wrap_stochastic(o, nm);

  auto check_counts = [&](const std::string& name, const CallCounters& c,
                          std::int64_t h, std::int64_t f) {
    std::ostringstream details;
    details << "h_calls=" << c.h_calls << " f_calls=" << c.f_calls << " expected ("
            << h << "," << f << ")";
    out.push_back(make_result(name + "_call_counts", c.h_calls == h && c.f_calls == f,
                              double(c.h_calls), double(h), details.str()));
  };

  check_counts("agog",
               agog_run(o, z0, iters, make_agog_schedule(o.constants)).counters,
               iters + 1, iters);
  check_counts("sagog",
               sagog_run(so, z0, iters, sagog_schedule_for(so, z0, iters)).counters,
               iters + 1, iters);
  check_counts("ogda", ogda_run(o, z0, iters).counters, iters + 1, iters + 1);
  check_counts("seg", seg_run(so, z0, iters, iters).counters, 2 * iters, 2 * iters);
  check_counts("nesterov", nesterov_run(o, z0, iters).counters, 0, iters);

  const OracleBundle bl = bilinear_instance(4.0, 4);
  const PairVecD z0b = unit_offset_start(bl, 4);
  check_counts("bilinear_agog", bilinear_agog_run(bl, z0b, iters).counters, iters + 1,
               0);
  return out;
}

// --------------------------------------------------------------------------
// stochastic suite
// --------------------------------------------------------------------------

std::vector<CheckResult> suite_stochastic() {
  std::vector<CheckResult> out;

  // Seeded bit-reproducibility of a noisy run.
  {
    const OracleBundle o = battery_instance(6, 12, 12);
    const PairVecD z0 = unit_offset_start(o, 6);
    NoiseModel nm;
    nm.kind = NoiseModel::Kind::additive;
    nm.sigma_h = 0.2;
    nm.sigma_f = 0.1;
    nm.seed = 42;
    const StochasticOracle so = wrap_stochastic(o, nm);
    const ScheduleSet sched = sagog_schedule_for(so, z0, 300);
    RecordOptions rec;
    rec.record_time = false;
    RunContext ctx;
    ctx.seed_index = 17;
    const RunResult a = sagog_run(so, z0, 300, sched, rec, ctx);
    const RunResult b = sagog_run(so, z0, 300, sched, rec, ctx);
    const bool same = rows_equal_ignoring_time(a.rows, b.rows) &&
                      a.output.joined() == b.output.joined();
    out.push_back(make_result("seeded_bit_reproducibility", same, same ? 0 : 1, 0,
                              "two identical (config, seed) runs"));
  }

  // Unbiasedness of the additive coupling noise at a fixed point.
  {
    const OracleBundle o = battery_instance(7, 6, 6);
    NoiseModel nm;
    nm.kind = NoiseModel::Kind::additive;
    nm.sigma_h = 0.1;
    const StochasticOracle so = wrap_stochastic(o, nm);
    const PairVecD z = unit_offset_start(o, 7);
    RunContext ctx;
    const int draws = 20000;
    VectorXd mean = VectorXd::Zero(o.n + o.m);
    for (int i = 0; i < draws; ++i) mean += so.coupling(z.joined(), ctx);
    mean /= double(draws);
    const VectorXd exact = coupling_field_raw(so.base(), z.joined());
    const double err = (mean - exact).cwiseAbs().maxCoeff();
    const double tol = 4.0 * nm.sigma_h / std::sqrt(double(draws));
    out.push_back(make_result("additive_noise_unbiased", err <= tol, err, tol,
                              "per-coordinate mean error over 2e4 draws"));
  }
  return out;
}

}  // namespace

OracleBundle battery_instance(std::uint64_t seed, Index n, Index m) {
  QuadraticGameSpec qs;
  qs.n = n;
  qs.m = m;
  qs.a1_eig = {0.5, 32};
  qs.a3_eig = {0.5, 32};
  qs.a2tA2_eig = {1, 1};
  qs.seed = seed;
  return make_quadratic_game(qs);
}

OracleBundle bilinear_instance(double kappa, std::uint64_t seed) {
  return make_bilinear_game(random_bilinear_spec(2, 1.0, std::sqrt(kappa), 0.0, seed));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

std::vector<CheckResult> run_suite(const std::string& suite) {
  if (suite == "bounds") return suite_bounds();
  if (suite == "reductions") return suite_reductions();
  if (suite == "accounting") return suite_accounting();
  if (suite == "stochastic") return suite_stochastic();
  throw ConfigError("unknown verify suite: " + suite +
                    " (expected bounds, reductions, accounting or stochastic)");
}

bool all_pass(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

std::string to_json(const std::string& suite, const std::vector<CheckResult>& results) {
  nlohmann::json j;
  j["suite"] = suite;
  j["pass"] = all_pass(results);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json c;
    c["name"] = r.name;
    c["pass"] = r.pass;
    c["measured"] = r.measured;
    c["threshold"] = r.threshold;
    c["details"] = r.details;
    checks.push_back(std::move(c));
  }
  j["checks"] = std::move(checks);
  return j.dump(2);
}

}  // namespace sepmin::verify

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sepmin/harness.hpp"
#include "sepmin/problems.hpp"
#include "sepmin/solvers.hpp"
#include "sepmin/verify.hpp"

using namespace sepmin;

namespace {

PairVecD offset_start(const OracleBundle& o, std::uint64_t seed) {
  RunSpec rs;
  return initial_point(o, rs, seed);
}

OracleBundle balanced_game(std::uint64_t seed, Index n = 10) {
  return verify::battery_instance(seed, n, n);
}

StochasticOracle additive_oracle(const OracleBundle& o, double sh, double sf,
                                 std::uint64_t noise_seed = 1) {
  NoiseModel nm;
  nm.kind = NoiseModel::Kind::additive;
  nm.sigma_h = sh;
  nm.sigma_f = sf;
  nm.seed = noise_seed;
  return wrap_stochastic(o, nm);
}

}  // namespace

TEST_CASE("single-call accounting across the solver family") {
  const OracleBundle o = balanced_game(1);
  const PairVecD z0 = offset_start(o, 1);
  const std::int64_t k = 53;

  const RunResult agog = agog_run(o, z0, k, make_agog_schedule(o.constants));
  CHECK(agog.counters.h_calls == k + 1);
  CHECK(agog.counters.f_calls == k);
  CHECK(std::int64_t(agog.rows.size()) == k);

  const StochasticOracle so = additive_oracle(o, 0.1, 0.1);
  const RunResult sagog =
      sagog_run(so, z0, k, sagog_schedule_for(so, z0, k));
  CHECK(sagog.counters.h_calls == k + 1);
  CHECK(sagog.counters.f_calls == k);

  const RunResult ogda = ogda_run(o, z0, k);
  CHECK(ogda.counters.h_calls == k + 1);
  CHECK(ogda.counters.f_calls == k + 1);

  const RunResult seg = seg_run(so, z0, k, k);
  CHECK(seg.counters.h_calls == 2 * k);
  CHECK(seg.counters.f_calls == 2 * k);
}

TEST_CASE("rate bound holds on a seeded run") {
  const OracleBundle o = balanced_game(3, 12);
  const PairVecD z0 = offset_start(o, 3);
  const RunResult r = agog_run(o, z0, 1000, make_agog_schedule(o.constants));
  const double bound = agog_rate_bound(1000, 64.0, 1.0, 1.0, r.sq_dist0);
  CHECK(sq_dist(r.output, *o.optimum) <= bound);
  CHECK(std::sqrt(r.max_integer_ratio_sq) <= 1.0 + 1e-10);
  // the bound helper agrees with its closed form
  CHECK(agog_rate_bound(1000, 64.0, 1.0, 1.0, 1.0) ==
        doctest::Approx(4.0 * 64.0 / 1001.0 / 1001.0 +
                        2.0 * accel_coupling_coef<double>() / 1001.0)
            .epsilon(1e-12));
}

TEST_CASE("coupling-free runs reduce to the accelerated-gradient scheme") {
  QuadraticGameSpec qs;
  qs.n = qs.m = 5;
  qs.a1_eig = {0.5, 8};
  qs.a3_eig = {0.5, 8};
  qs.a2tA2_eig = {0, 0};
  qs.b1_scale = 0.4;
  qs.seed = 4;
  const OracleBundle o = make_quadratic_game(qs);
  const PairVecD z0 = offset_start(o, 4);
  const ScheduleSet sched = make_agog_schedule(o.constants);
  for (std::int64_t k : {1L, 3L, 10L, 40L, 100L}) {
    const VectorXd a = agog_run(o, z0, k, sched).output.joined();
    const VectorXd b = nesterov_run(o, z0, k).output.joined();
    CHECK((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
  }
}

TEST_CASE("individual-free runs reduce to past-gradient optimistic updates") {
  const OracleBundle o = verify::bilinear_instance(9.0, 5);
  const PairVecD z0 = offset_start(o, 5);
  ScheduleSet sched;
  sched.kind = ScheduleSet::Kind::deterministic;
  sched.l = 0;
  sched.l_h = o.constants.coupling_smoothness();
  const double eta = sched.eta(0);
  CHECK(sched.eta(7) == doctest::Approx(eta).epsilon(1e-15));  // constant when L=0
  for (std::int64_t k : {1L, 10L, 100L}) {
    const VectorXd a = agog_run(o, z0, k, sched).last_integer.joined();
    const VectorXd b = ogda_run(o, z0, k, eta).last_integer.joined();
    CHECK((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
  }
}

TEST_CASE("optimistic one-line and two-line forms produce the same halves") {
  const OracleBundle o = balanced_game(6, 6);
  const LinearField lf = assemble_linear_field(*o.model);
  auto field = [&](const VectorXd& z) -> VectorXd { return lf.m * z + lf.q; };
  const VectorXd z0 = offset_start(o, 6).joined();
  const double eta = 1.0 / (2.0 * 64.0);

  // two-line: z_{k+1/2} = z_k - eta W(z_{k-1/2}); z_{k+1} = z_k - eta W(z_{k+1/2})
  std::vector<VectorXd> halves;
  {
    VectorXd z = z0, w_prev = field(z0);
    for (int k = 0; k < 60; ++k) {
      const VectorXd half = z - eta * w_prev;
      halves.push_back(half);
      w_prev = field(half);
      z = z - eta * w_prev;
    }
  }
  // one-line: z_{k+1/2} = z_{k-1/2} - 2 eta W(z_{k-1/2}) + eta W(z_{k-3/2})
  {
    VectorXd prev_half = z0;             // z_{-1/2}
    VectorXd half = z0 - eta * field(z0);  // z_{1/2}
    CHECK((half - halves[0]).norm() <= 1e-12);
    for (int k = 1; k < 60; ++k) {
      const VectorXd next =
          half - 2.0 * eta * field(half) + eta * field(prev_half);
      prev_half = half;
      half = next;
      CHECK((half - halves[std::size_t(k)]).norm() <=
            1e-12 * (1.0 + halves[std::size_t(k)].norm()));
    }
  }
  // the library loop reports the same integer iterates as the two-line form
  const RunResult r = ogda_run(o, offset_start(o, 6), 60, eta);
  VectorXd z = z0, w_prev = field(z0);
  for (int k = 0; k < 60; ++k) {
    const VectorXd half = z - eta * w_prev;
    w_prev = field(half);
    z = z - eta * w_prev;
  }
  CHECK((r.last_integer.joined() - z).norm() <= 1e-12 * (1.0 + z.norm()));
}

TEST_CASE("zero field keeps the optimistic baseline stationary") {
  QuadraticModel model;
  model.hess_f = MatrixXd::Zero(2, 2);
  model.hess_g = MatrixXd::Zero(2, 2);
  model.coupling = MatrixXd::Zero(2, 2);
  model.lin_f = model.lin_g = model.lin_ix = model.lin_iy = VectorXd::Zero(2);
  const OracleBundle o =
      bundle_from_model(std::move(model), ProblemConstants{}, "custom", false);
  VectorXd x(2), y(2);
  x << 1, 2;
  y << -1, 3;
  const PairVecD z0(x, y);
  const RunResult r = ogda_run(o, z0, 25);
  CHECK((r.last_integer.joined() - z0.joined()).norm() == 0);
}

TEST_CASE("scaled and two-stepsize runs coincide") {
  QuadraticGameSpec qs;
  qs.n = qs.m = 6;
  qs.a1_eig = {0.5, 32};
  qs.a3_eig = {1.0 / 128.0, 0.5};
  qs.a2tA2_eig = {0.25, 1};
  qs.b1_scale = 0.3;
  qs.seed = 8;
  const OracleBundle o = make_quadratic_game(qs);
  const double s = std::sqrt(o.constants.mu_f / o.constants.mu_g);
  const OracleBundle scaled = scale_y_oracle(o, s);
  const PairVecD z0 = offset_start(o, 8);
  VectorXd z0s = z0.joined();
  z0s.tail(o.m) /= s;
  const ScheduleSet two = make_agog_schedule(o.constants);
  const ScheduleSet one = make_agog_schedule(scaled.constants);
  CHECK(two.y_ratio == doctest::Approx(s * s));
  CHECK(one.y_ratio == doctest::Approx(1.0));
  for (std::int64_t k : {1L, 10L, 100L}) {
    const VectorXd a = agog_run(o, z0, k, two).output.joined();
    VectorXd b = agog_run(scaled, PairVecD(z0s, o.n), k, one).output.joined();
    b.tail(o.m) *= s;
    CHECK((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
  }
}

TEST_CASE("restarted runs contract per epoch and budget exactly") {
  SUBCASE("per-epoch squared-distance ratio stays below 1/e") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const OracleBundle o = balanced_game(seed, 12);
      const PairVecD z0 = offset_start(o, seed);
      RestartPlan plan;
      plan.target_sq = 1e-10;
      RecordOptions rec;
      rec.record_every = 1 << 30;  // epoch-end rows only
      const RunResult r = agog_restart_run(o, z0, plan, rec);
      double prev = r.sq_dist0;
      for (const auto& row : r.rows) {
        CHECK(row.sq_dist <= prev / std::numbers::e_v<double> * (1 + 1e-9));
        prev = row.sq_dist;
      }
      CHECK(prev <= 1e-10);
    }
  }
  SUBCASE("already-converged start runs zero epochs") {
    const OracleBundle o = balanced_game(2, 8);
    RestartPlan plan;
    plan.target_sq = 1e-8;
    const RunResult r = agog_restart_run(o, *o.optimum, plan);
    CHECK(r.epochs == 0);
    CHECK(r.iters == 0);
    CHECK(sq_dist(r.output, *o.optimum) == 0);
  }
  SUBCASE("budgeted epoch composition: 19 epochs of 47") {
    QuadraticGameSpec qs;
    qs.n = qs.m = 6;
    qs.a1_eig = {0.5, 50};
    qs.a3_eig = {0.5, 50};
    qs.a2tA2_eig = {0, 0};  // L = 100, mu = 1, no coupling
    qs.seed = 9;
    const OracleBundle o = make_quadratic_game(qs);
    const PairVecD z0 = offset_start(o, 9);  // unit offset: sq_dist0 = 1
    RestartPlan plan;
    plan.target_sq = 1e-8;
    const RunResult r = agog_restart_run(o, z0, plan);
    CHECK(r.epochs == 19);
    CHECK(r.iters == 19 * 47);
    CHECK(sq_dist(r.output, *o.optimum) <= 1e-8);
  }
}

TEST_CASE("zero-noise stochastic runs are bitwise the deterministic runs") {
  const OracleBundle o = balanced_game(5, 8);
  const PairVecD z0 = offset_start(o, 5);
  const StochasticOracle so = additive_oracle(o, 0.0, 0.0);
  const ScheduleSet sched = sagog_schedule_for(so, z0, 150);
  CHECK(sched.d == 0.0);
  RecordOptions rec;
  rec.record_time = false;
  const RunResult a = sagog_run(so, z0, 150, sched, rec);
  const RunResult b = agog_run(o, z0, 150, sched, rec);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    CHECK(a.rows[i].sq_dist == b.rows[i].sq_dist);
  CHECK(a.output.joined() == b.output.joined());
  CHECK(a.last_integer.joined() == b.last_integer.joined());
}

TEST_CASE("seeded stochastic runs are bit-reproducible") {
  const OracleBundle o = balanced_game(6, 8);
  const PairVecD z0 = offset_start(o, 6);
  const StochasticOracle so = additive_oracle(o, 0.2, 0.1, 11);
  const ScheduleSet sched = sagog_schedule_for(so, z0, 200);
  RecordOptions rec;
  rec.record_time = false;
  RunContext ctx;
  ctx.seed_index = 42;
  const RunResult a = sagog_run(so, z0, 200, sched, rec, ctx);
  const RunResult b = sagog_run(so, z0, 200, sched, rec, ctx);
  CHECK(a.output.joined() == b.output.joined());
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    CHECK(a.rows[i].sq_dist == b.rows[i].sq_dist);
  // a different seed index produces a different trajectory
  RunContext other;
  other.seed_index = 43;
  const RunResult c = sagog_run(so, z0, 200, sched, rec, other);
  CHECK(c.output.joined() != a.output.joined());
}

TEST_CASE("restarted stochastic runs") {
  const OracleBundle o = balanced_game(7, 8);
  const PairVecD z0 = offset_start(o, 7);
  SUBCASE("zero noise reduces to the deterministic epoch contraction") {
    const StochasticOracle so = additive_oracle(o, 0.0, 0.0);
    RestartPlan plan;
    plan.target_sq = 1e-8;
    RecordOptions rec;
    rec.record_every = 1 << 30;
    const RunResult r = sagog_restart_run(so, z0, 100000, plan, std::nullopt, rec);
    CHECK(sq_dist(r.output, *o.optimum) <= 1e-8);
    double prev = r.sq_dist0;
    for (const auto& row : r.rows) {
      CHECK(row.sq_dist <= prev / std::numbers::e_v<double> * (1 + 1e-9));
      prev = row.sq_dist;
    }
  }
  SUBCASE("budget below one epoch runs a single truncated epoch") {
    const StochasticOracle so = additive_oracle(o, 0.1, 0.1);
    RestartPlan plan;
    const RunResult r = sagog_restart_run(so, z0, 10, plan);
    CHECK(r.epochs == 1);
    CHECK(r.iters == 9);
    CHECK(r.counters.h_calls == 10);
  }
}

TEST_CASE("bilinear solver bounds and specializations") {
  SUBCASE("identity coupling satisfies the explicit factor") {
    BilinearGameSpec spec;
    spec.b = MatrixXd::Identity(2, 2);
    spec.u_x = spec.u_y = VectorXd::Zero(2);
    const OracleBundle o = make_bilinear_game(spec);
    VectorXd x(2), y(2);
    x << 1, 0;
    y << 0, 0;
    const PairVecD z0(x, y);
    const RunResult r = bilinear_agog_run(o, z0, 13);
    CHECK(sq_dist(r.output, *o.optimum) <= 64.0 / 196.0);
    CHECK(r.counters.f_calls == 0);
  }
  SUBCASE("restart with the bilinear epoch length contracts by 1/e") {
    const OracleBundle o = verify::bilinear_instance(4.0, 3);
    const PairVecD z0 = offset_start(o, 3);
    RestartPlan plan;
    plan.target_sq = 1e-9;
    RecordOptions rec;
    rec.record_every = 1 << 30;
    const RunResult r = bilinear_agog_restart_run(o, z0, plan, rec);
    double prev = r.sq_dist0;
    for (const auto& row : r.rows) {
      CHECK(row.sq_dist <= prev / std::numbers::e_v<double> * (1 + 1e-9));
      prev = row.sq_dist;
    }
    CHECK(prev <= 1e-9);
  }
  SUBCASE("noisy variant with beta = 0 and sigma = 0 matches the plain one") {
    const OracleBundle o = verify::bilinear_instance(9.0, 4);
    const PairVecD z0 = offset_start(o, 4);
    const StochasticOracle so = additive_oracle(o, 0.0, 0.0);
    RecordOptions rec;
    rec.record_time = false;
    const RunResult a = bilinear_sagog_run(so, z0, 80, 0.0, rec);
    const RunResult b = bilinear_agog_run(o, z0, 80, rec);
    CHECK(a.output.joined() == b.output.joined());
  }
  SUBCASE("statistical error decays like 1/K under coupling noise") {
    const OracleBundle o = verify::bilinear_instance(1.0, 5);
    const StochasticOracle so = additive_oracle(o, 0.1, 0.0, 3);
    RecordOptions rec;
    rec.record_every = 1;
    std::vector<double> ks = {100, 1000, 10000};
    std::vector<double> means(3, 0.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      RunContext ctx;
      ctx.seed_index = seed;
      const PairVecD z0 = offset_start(o, seed);
      const RunResult r = bilinear_sagog_run(so, z0, 10000, 1.0, rec, ctx);
      for (std::size_t i = 0; i < ks.size(); ++i)
        means[i] += r.rows[std::size_t(ks[i]) - 1].sq_dist / 20.0;
    }
    const double slope = verify::loglog_slope(ks, means);
    CHECK(slope >= -1.3);
    CHECK(slope <= -0.7);
  }
  SUBCASE("non-bilinear instances are rejected") {
    const OracleBundle o = balanced_game(2, 4);
    CHECK_THROWS_AS(bilinear_agog_run(o, offset_start(o, 2), 10), ConfigError);
  }
}

TEST_CASE("extragradient baseline: convergence and window averaging") {
  BilinearGameSpec spec;
  spec.b = MatrixXd::Identity(2, 2);
  spec.u_x = spec.u_y = VectorXd::Zero(2);
  const OracleBundle o = make_bilinear_game(spec);
  SUBCASE("noise-free run converges; the last iterate leads the average") {
    const StochasticOracle so = additive_oracle(o, 0.0, 0.0);
    const PairVecD z0 = offset_start(o, 2);
    const RunResult r = seg_run(so, z0, 100, 100);
    // last-iterate distance contracts linearly on the identity coupling,
    // while the running average of the decaying spiral trails at O(1/K)
    CHECK(sq_dist(r.last_integer, *o.optimum) <= 1e-6);
    CHECK(sq_dist(r.output, *o.optimum) < r.sq_dist0);
    CHECK(sq_dist(r.last_integer, *o.optimum) < sq_dist(r.output, *o.optimum));
  }
  SUBCASE("under noise the averaged iterate beats the last iterate") {
    const StochasticOracle so = additive_oracle(o, 0.3, 0.0, 6);
    double mean_avg = 0, mean_last = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RunContext ctx;
      ctx.seed_index = seed;
      const PairVecD z0 = offset_start(o, seed);
      const RunResult r = seg_run(so, z0, 100, 100, RecordOptions{}, ctx);
      mean_avg += sq_dist(r.output, *o.optimum) / 5.0;
      mean_last += sq_dist(r.last_integer, *o.optimum) / 5.0;
    }
    CHECK(mean_avg < mean_last);
  }
  SUBCASE("restart window equal to the horizon is plain averaged SEG") {
    const StochasticOracle so = additive_oracle(o, 0.1, 0.0, 7);
    RecordOptions rec;
    rec.record_time = false;
    const PairVecD z0 = offset_start(o, 3);
    const RunResult a = seg_run(so, z0, 60, 60, rec);
    const RunResult b = seg_run(so, z0, 60, 1000, rec);  // window never closes
    CHECK(a.output.joined() == b.output.joined());
    CHECK(a.epochs == 1);
  }
}

TEST_CASE("stochastic accelerated run beats extragradient at equal queries") {
  QuadraticGameSpec qs;
  qs.n = qs.m = 6;
  qs.a1_eig = {0.5, 5};   // L = 10, mu = 1
  qs.a3_eig = {0.5, 5};
  qs.a2tA2_eig = {1, 121};  // coupling norm 11
  qs.seed = 31;
  const OracleBundle o = make_quadratic_game(qs);
  NoiseModel nm;
  nm.kind = NoiseModel::Kind::additive;
  nm.sigma_h = 0.1;
  nm.sigma_f = 0.1;
  nm.seed = 4;
  const StochasticOracle so = wrap_stochastic(o, nm);
  const std::int64_t queries = 2000;
  double mean_sagog_half = 0, mean_sagog = 0, mean_seg = 0;
  RecordOptions rec;
  rec.record_every = 1;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PairVecD z0 = offset_start(o, seed);
    RunContext ctx;
    ctx.seed_index = seed;
    const RunResult a = sagog_run(so, z0, queries - 1,
                                  sagog_schedule_for(so, z0, queries - 1), rec, ctx);
    mean_sagog += a.rows.back().sq_dist / 10.0;
    mean_sagog_half += a.rows[a.rows.size() / 2].sq_dist / 10.0;
    RunContext ctx2;
    ctx2.seed_index = seed;
    const RunResult b = seg_run(so, z0, queries / 2, queries / 2, rec, ctx2);
    mean_seg += b.rows.back().sq_dist / 10.0;
  }
  CHECK(mean_sagog < mean_sagog_half);  // mean error decreasing in K
  CHECK(mean_sagog < mean_seg);         // below SEG at the same query budget
}

TEST_CASE("direct single-loop variant") {
  CHECK(agog_direct_stepsize(64, 1, 1) ==
        doctest::Approx(0.10763707050472571).epsilon(1e-12));
  CHECK(agog_direct_stepsize(1, 1, 0) == doctest::Approx(0.5));
  const OracleBundle o = balanced_game(9, 10);
  const PairVecD z0 = offset_start(o, 9);
  RecordOptions rec;
  rec.record_every = 100;
  const RunResult r = agog_direct_run(o, z0, 2000, rec);
  CHECK(r.status == RunStatus::ok);
  // squared distance decreasing at the recorded checkpoints
  CHECK(r.rows.front().sq_dist < r.sq_dist0);
  CHECK(r.rows.back().sq_dist < r.rows[r.rows.size() / 2].sq_dist);
  CHECK(r.rows[r.rows.size() / 2].sq_dist < r.rows.front().sq_dist);
}

TEST_CASE("regularization reduction") {
  const OracleBundle o = balanced_game(10, 6);
  SUBCASE("constants shift by exactly eps") {
    const OracleBundle r = regularize_csc(o, 0.01);
    CHECK(r.constants.mu_f == doctest::Approx(o.constants.mu_f + 0.01));
    CHECK(r.constants.l_f == doctest::Approx(o.constants.l_f + 0.01));
    CHECK_THROWS_AS(regularize_csc(o, 0.0), InvalidSpecError);
  }
  SUBCASE("duality gap transfers to the original objective") {
    // 2-D strongly convex instance; solve the regularized problem, then
    // compare closed-form duality gaps of both objectives at the output.
    QuadraticGameSpec qs;
    qs.n = qs.m = 2;
    qs.a1_eig = {0.5, 2};
    qs.a3_eig = {0.5, 2};
    qs.a2tA2_eig = {0.25, 1};
    qs.b1_scale = 0.7;
    qs.b2_scale = 0.4;
    qs.seed = 13;
    const OracleBundle orig = make_quadratic_game(qs);
    const double eps = 1e-3;
    const OracleBundle reg = regularize_csc(orig, eps);
    const RunResult run =
        agog_run(reg, offset_start(reg, 13), 300, make_agog_schedule(reg.constants));
    const VectorXd zhat = run.output.joined();

    auto duality_gap = [](const OracleBundle& ob, const VectorXd& z) {
      // max_y L(x,y) - min_x L(x,y) via the quadratic model blocks
      const QuadraticModel& mm = *ob.model;
      const Index n = mm.n();
      const VectorXd x = z.head(n), y = z.tail(mm.m());
      // max over y of x'Cy + cy'y - g(y):  grad = C'x + cy - Hg y - pg = 0
      const VectorXd ystar =
          mm.hess_g.ldlt().solve(mm.coupling.transpose() * x + mm.lin_iy - mm.lin_g);
      // min over x of f(x) + x'Cy + cx'x: grad = Hf x + pf + Cy + cx = 0
      const VectorXd xstar =
          mm.hess_f.ldlt().solve(-(mm.lin_f + mm.coupling * y + mm.lin_ix));
      auto lagrangian = [&](const VectorXd& xx, const VectorXd& yy) {
        const double f = 0.5 * xx.dot(mm.hess_f * xx) + mm.lin_f.dot(xx);
        const double g = 0.5 * yy.dot(mm.hess_g * yy) + mm.lin_g.dot(yy);
        const double coup =
            xx.dot(mm.coupling * yy) + mm.lin_ix.dot(xx) + mm.lin_iy.dot(yy);
        return f + coup - g;
      };
      return lagrangian(x, ystar) - lagrangian(xstar, y);
    };
    const double gap_orig = duality_gap(orig, zhat);
    const double gap_reg = duality_gap(reg, zhat);
    const double xnorm_sq = zhat.head(2).squaredNorm();
    CHECK(gap_orig <= gap_reg + eps * xnorm_sq + 1e-12);
  }
}

TEST_CASE("divergence is detected and reported with a partial trace") {
  const OracleBundle o = balanced_game(11, 6);
  const PairVecD z0 = offset_start(o, 11);
  // a stepsize far above the stability threshold
  ScheduleSet bad = make_constant_schedule(1.0, 1.0);
  const RunResult r = agog_run(o, z0, 500, bad);
  CHECK(r.status == RunStatus::diverged);
  CHECK(r.diverged_at > 0);
  for (const auto& row : r.rows) CHECK(std::isfinite(row.sq_dist));
}

TEST_CASE("iteration preconditions") {
  const OracleBundle o = balanced_game(12, 4);
  const PairVecD z0 = offset_start(o, 12);
  CHECK_THROWS_AS(agog_run(o, z0, 0, make_agog_schedule(o.constants)), ConfigError);
  CHECK_THROWS_AS(ogda_run(o, z0, 0), ConfigError);
  RestartPlan empty;
  CHECK_THROWS_AS(agog_restart_run(o, z0, empty), ConfigError);
}

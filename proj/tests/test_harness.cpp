#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "sepmin/harness.hpp"
#include "sepmin/verify.hpp"

using namespace sepmin;

namespace {

ExperimentSpec small_spec() {
  QuadraticGameSpec qs;
  qs.n = qs.m = 6;
  qs.a1_eig = {0.5, 32};
  qs.a3_eig = {0.5, 32};
  qs.a2tA2_eig = {1, 1};
  qs.seed = 2;
  ExperimentSpec spec;
  spec.problem = qs;
  spec.run.iters = 10;
  spec.run.seeds = {1};
  spec.config_hash = "deadbeef";
  return spec;
}

RunTrace constant_trace(const std::string& algo, std::uint64_t seed, double value,
                        std::int64_t rows, std::int64_t stride = 1) {
  RunTrace t;
  t.meta.algorithm = algo;
  t.meta.problem = "synthetic";
  t.meta.seed = seed;
  for (std::int64_t i = 1; i <= rows; ++i) {
    TraceRow r;
    r.iter = i * stride;
    r.h_calls = i * stride + 1;
    r.f_calls = i * stride;
    r.sq_dist = value;
    t.rows.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("run_experiment accounting and determinism") {
  const ExperimentSpec spec = small_spec();
  AlgorithmSpec algo;
  algo.name = "agog";
  const std::vector<RunTrace> traces = run_experiment(spec, algo, 1);
  REQUIRE(traces.size() == 1);
  const RunTrace& t = traces[0];
  CHECK(t.rows.size() == 10);
  CHECK(t.rows.back().h_calls == 11);
  CHECK(t.rows.back().f_calls == 10);
  CHECK(t.meta.mode == "benchmark");
  CHECK(t.meta.config_hash == "deadbeef");
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(t.rows[i].h_calls >= t.rows[i - 1].h_calls);
    CHECK(std::isfinite(t.rows[i].sq_dist));
  }

  // identical spec -> identical bytes once wall-clock stamps are zeroed
  const std::vector<RunTrace> again = run_experiment(spec, algo, 1);
  RunTrace a = traces[0], b = again[0];
  for (auto* tr : {&a, &b})
    for (auto& row : tr->rows) row.elapsed_ns = 0;
  CHECK(trace_to_csv(a) == trace_to_csv(b));
}

TEST_CASE("run_experiment validates seeds and compatibility") {
  ExperimentSpec spec = small_spec();
  AlgorithmSpec algo;
  algo.name = "agog";
  spec.run.seeds = {1, 1};
  CHECK_THROWS_AS(run_experiment(spec, algo, 1), ConfigError);
  spec.run.seeds = {};
  CHECK_THROWS_AS(run_experiment(spec, algo, 1), ConfigError);
  spec = small_spec();
  spec.noise.kind = NoiseModel::Kind::additive;
  spec.noise.sigma_h = 0.1;
  CHECK_THROWS_AS(run_experiment(spec, algo, 1), ConfigError);  // needs sagog
  AlgorithmSpec bil;
  bil.name = "bilinear_agog";
  spec = small_spec();
  CHECK_THROWS_AS(run_experiment(spec, bil, 1), ConfigError);
}

TEST_CASE("worker pool matches single-threaded results") {
  ExperimentSpec spec = small_spec();
  spec.run.iters = 200;
  spec.run.seeds = {1, 2, 3, 4, 5};
  spec.noise.kind = NoiseModel::Kind::additive;
  spec.noise.sigma_h = 0.2;
  AlgorithmSpec algo;
  algo.name = "sagog";
  std::vector<RunTrace> seq = run_experiment(spec, algo, 1);
  std::vector<RunTrace> par = run_experiment(spec, algo, 4);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].meta.seed == par[i].meta.seed);
    REQUIRE(seq[i].rows.size() == par[i].rows.size());
    for (std::size_t j = 0; j < seq[i].rows.size(); ++j)
      CHECK(seq[i].rows[j].sq_dist == par[i].rows[j].sq_dist);
  }
}

TEST_CASE("aggregation") {
  SUBCASE("a single trace aggregates to itself") {
    const RunTrace t = constant_trace("agog", 1, 0.5, 4);
    const auto rows = aggregate({t});
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
      CHECK(r.mean == 0.5);
      CHECK(r.median == 0.5);
      CHECK(r.count == 1);
    }
  }
  SUBCASE("two constant traces average") {
    const auto rows = aggregate(
        {constant_trace("agog", 1, 1.0, 5), constant_trace("agog", 2, 3.0, 5)});
    for (const auto& r : rows) {
      CHECK(r.mean == 2.0);
      CHECK(r.min == 1.0);
      CHECK(r.max == 3.0);
    }
  }
  SUBCASE("resampling carries the last recorded value forward") {
    // coarse trace sets the grid; fine trace decays between grid points
    RunTrace fine = constant_trace("agog", 1, 0.0, 100);
    for (std::int64_t i = 0; i < 100; ++i)
      fine.rows[std::size_t(i)].sq_dist = 1.0 / double(i + 1);
    const RunTrace coarse = constant_trace("agog", 2, 2.0, 10, 10);
    const auto rows = aggregate({fine, coarse});
    REQUIRE(!rows.empty());
    for (const auto& r : rows) {
      // carry-forward: the fine trace's value at h_calls <= q, never beyond
      const double expected_fine = 1.0 / double(r.queries - 1);
      CHECK(r.min == doctest::Approx(expected_fine).epsilon(1e-12));
      CHECK(r.max == 2.0);
    }
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(aggregate({}), ConfigError);
  }
}

TEST_CASE("csv serialization") {
  ExperimentSpec spec = small_spec();
  spec.run.record_gap = true;
  AlgorithmSpec algo;
  algo.name = "agog";
  RunTrace t = run_experiment(spec, algo, 1)[0];

  SUBCASE("header is pinned") {
    const std::string csv = trace_to_csv(t);
    CHECK(csv.rfind("algorithm,problem,seed,epoch,iter,h_calls,f_calls,sq_dist,"
                    "gap,elapsed_ns\n",
                    0) == 0);
  }
  SUBCASE("round trip is field-exact") {
    const std::string csv = trace_to_csv(t);
    const RunTrace back = trace_from_csv(csv);
    CHECK(rows_equal(t, back));
    CHECK(trace_to_csv(back) == csv);
  }
  SUBCASE("gap column is empty when not recorded") {
    RunTrace plain = t;
    for (auto& row : plain.rows) row.has_gap = false;
    const std::string csv = trace_to_csv(plain);
    const RunTrace back = trace_from_csv(csv);
    CHECK(!back.rows.front().has_gap);
  }
  SUBCASE("malformed documents are rejected") {
    CHECK_THROWS_AS(trace_from_csv("not,a,trace\n1,2\n"), ConfigError);
    CHECK_THROWS_AS(trace_from_csv(""), ConfigError);
  }
}

TEST_CASE("json trace serialization carries the metadata") {
  ExperimentSpec spec = small_spec();
  AlgorithmSpec algo;
  algo.name = "agog";
  const RunTrace t = run_experiment(spec, algo, 1)[0];
  const nlohmann::json j = nlohmann::json::parse(trace_to_json(t));
  CHECK(j["algorithm"] == "agog");
  CHECK(j["seed"] == 1);
  CHECK(j["mode"] == "benchmark");
  CHECK(j["rows"].size() == t.rows.size());
  CHECK(j["rows"][0].contains("sq_dist"));
}

TEST_CASE("bound checking over runs") {
  const OracleBundle o = verify::battery_instance(3, 10, 10);
  RunSpec rs;
  const PairVecD z0 = initial_point(o, rs, 3);
  RecordOptions rec;
  rec.record_every = 10;
  const RunResult good = agog_run(o, z0, 2000, make_agog_schedule(o.constants), rec);

  SUBCASE("a compliant run passes every row") {
    const BoundReport rate = check_bounds(good, o, BoundKind::rate);
    CHECK(rate.pass);
    CHECK(rate.violations == 0);
    CHECK(rate.max_ratio <= 1.0);
    const BoundReport nonexp = check_bounds(good, o, BoundKind::nonexpansive);
    CHECK(nonexp.pass);
    CHECK(nonexp.max_ratio <= 1.0 + 1e-10);
  }
  SUBCASE("a deliberately overstepped run is flagged") {
    ScheduleSet bad = make_agog_schedule(o.constants);
    bad = make_constant_schedule(4.0 * bad.eta(1 << 20), bad.l_h);
    RecordOptions every;
    every.record_every = 1;
    const RunResult r = agog_run(o, z0, 2000, bad, every);
    const BoundReport rep = check_bounds(r, o, BoundKind::rate);
    CHECK(!rep.pass);
    CHECK(rep.violations > 0);
  }
  SUBCASE("bilinear bound applies to bilinear runs") {
    const OracleBundle bl = verify::bilinear_instance(25.0, 4);
    const PairVecD w0 = initial_point(bl, rs, 4);
    const RunResult r = bilinear_agog_run(bl, w0, 500, rec);
    const BoundReport rep = check_bounds(r, bl, BoundKind::bilinear_rate);
    CHECK(rep.pass);
    CHECK(rep.max_ratio <= 1.0);
  }
  SUBCASE("rate checks refuse unbalanced instances") {
    QuadraticGameSpec qs;
    qs.n = qs.m = 4;
    qs.a1_eig = {0.5, 2};
    qs.a3_eig = {0.25, 2};
    qs.a2tA2_eig = {1, 1};
    qs.seed = 5;
    const OracleBundle u = make_quadratic_game(qs);
    const RunResult r =
        agog_run(u, initial_point(u, rs, 5), 50, make_agog_schedule(u.constants));
    CHECK_THROWS_AS(check_bounds(r, u, BoundKind::rate), UnsupportedError);
  }
}

TEST_CASE("format_double emits shortest round-trip decimals") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1e-9) == "1e-09");
  const double v = 0.1 + 0.2;
  CHECK(std::stod(format_double(v)) == v);
}

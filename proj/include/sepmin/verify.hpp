#pragma once

#include <string>
#include <vector>

#include "sepmin/harness.hpp"

namespace sepmin::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0;
  double threshold = 0;
  std::string details;
};

// Self-contained seeded check batteries driving the run-level invariants:
//   bounds      - nonexpansiveness, polynomial rate bound, bilinear rate
//                 bound, gap lower bound
//   reductions  - coupling-free, individual-free and scaling reductions,
//                 zero-noise degeneracy
//   accounting  - exact oracle-call counts per algorithm
//   stochastic  - seeded bit-reproducibility and noise-model statistics
std::vector<CheckResult> run_suite(const std::string& suite);

bool all_pass(const std::vector<CheckResult>& results);
std::string to_json(const std::string& suite, const std::vector<CheckResult>& results);

// Shared instance builders (also used by the acceptance suite).
// Balanced strongly convex quadratic game: n = m = 50, L = 64, mu = 1,
// coupling norm 1.
OracleBundle battery_instance(std::uint64_t seed, Index n = 50, Index m = 50);
// Pure bilinear game of condition number kappa (n = 2).
OracleBundle bilinear_instance(double kappa, std::uint64_t seed);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sepmin::verify

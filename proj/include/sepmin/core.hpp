#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "sepmin/rng.hpp"

namespace sepmin {

using Index = Eigen::Index;
using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;

// Raised for malformed configuration, including dimension mismatches between
// iterates and oracles. CLI maps it to exit code 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a generator precondition is violated (non-positive curvature,
// rank-deficient matrices, incompatible noise model, ...).
struct InvalidSpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a diagnostic needs oracle surfaces the instance does not expose
// (e.g. gap values without function-value oracles).
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoUniqueOptimumError : InvalidSpecError {
  using InvalidSpecError::InvalidSpecError;
};

// A point z = [x; y] with explicit block sizes. Stored as one dense vector so
// whole-iterate expressions stay single Eigen operations while the blocks
// remain O(1) views.
template <typename Scalar = double>
class PairVec {
 public:
  using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;

  PairVec() = default;
  PairVec(Vec x, Vec y) : v_(x.size() + y.size()), n_(x.size()) {
    v_ << x, y;
    validate();
  }
  PairVec(Vec joined, Index n) : v_(std::move(joined)), n_(n) { validate(); }

  static PairVec Zero(Index n, Index m) { return PairVec(Vec::Zero(n + m), n); }

  Index n() const { return n_; }
  Index m() const { return v_.size() - n_; }
  Index size() const { return v_.size(); }

  auto x() const { return v_.head(n_); }
  auto y() const { return v_.tail(m()); }
  auto x() { return v_.head(n_); }
  auto y() { return v_.tail(m()); }

  const Vec& joined() const { return v_; }
  Vec& joined() { return v_; }

  bool allFinite() const { return v_.allFinite(); }

 private:
  void validate() const {
    if (n_ < 1 || m() < 1) throw ConfigError("PairVec: block sizes must be >= 1");
    if (!v_.allFinite()) throw ConfigError("PairVec: non-finite entry");
  }

  Vec v_;
  Index n_ = 0;
};

using PairVecD = PairVec<double>;

// Smoothness / strong-convexity data of one instance. The coupling
// smoothness bound is always derived on demand from the blockwise bounds; it
// is deliberately not a stored field so no second copy can drift.
struct ProblemConstants {
  double l_f = 0, mu_f = 0;
  double l_g = 0, mu_g = 0;
  double i_xx = 0, i_xy = 0, i_yy = 0;

  double coupling_smoothness() const { return std::max(i_xx, i_yy) + i_xy; }
  double individual_smoothness() const { return std::max(l_f, l_g); }
  double strong_convexity() const { return std::min(mu_f, mu_g); }

  void validate() const {
    if (!(l_f >= mu_f && mu_f >= 0) || !(l_g >= mu_g && mu_g >= 0))
      throw InvalidSpecError("ProblemConstants: need L >= mu >= 0 per block");
    if (i_xx < 0 || i_xy < 0 || i_yy < 0)
      throw InvalidSpecError("ProblemConstants: negative coupling bound");
  }
};

// Oracle-call tallies. These live in a per-run context (never in globals) so
// concurrent runs cannot share or corrupt each other's accounting.
struct CallCounters {
  std::int64_t h_calls = 0;  // coupling-field evaluations
  std::int64_t f_calls = 0;  // individual-gradient evaluations
};

struct RunContext {
  CallCounters counters;
  std::uint64_t master_seed = 0;
  std::uint64_t seed_index = 0;
};

// Exact quadratic data behind every synthetic family:
//   f(x) = 1/2 x'Hf x + pf'x,  g(y) = 1/2 y'Hg y + pg'y,
//   I(x,y) = x'C y + cx'x + cy'y.
// Keeping the closed form around is what makes exact optima, matrix-level
// noise and regularization transforms cheap and exact.
struct QuadraticModel {
  MatrixXd hess_f, hess_g, coupling;  // n x n, m x m, n x m
  VectorXd lin_f, lin_g, lin_ix, lin_iy;

  Index n() const { return coupling.rows(); }
  Index m() const { return coupling.cols(); }
};

struct CouplingSpectrum {
  double sigma_max = 0, sigma_min = 0;
};

// Deterministic oracle bundle: first-order oracles for f, g and the coupling,
// the instance constants, and (for synthetic instances) the exact minimax
// point plus optional function-value oracles for gap diagnostics.
// Immutable after construction and safe to share across threads.
struct OracleBundle {
  Index n = 0, m = 0;
  std::string family;  // "quadratic_game", "bilinear_game", "mspbe", "robust_ls", ...

  std::function<VectorXd(const VectorXd&)> grad_f, grad_g;
  std::function<VectorXd(const VectorXd&, const VectorXd&)> grad_ix, grad_iy;

  std::function<double(const VectorXd&)> value_f, value_g;
  std::function<double(const VectorXd&, const VectorXd&)> value_i;

  ProblemConstants constants;
  std::optional<PairVecD> optimum;
  std::shared_ptr<const QuadraticModel> model;  // set for linear-gradient families
  std::optional<CouplingSpectrum> coupling_spectrum;

  bool has_values() const { return value_f && value_g && value_i; }

  void check_point(const PairVecD& z) const {
    if (z.n() != n || z.m() != m)
      throw ConfigError("oracle/iterate dimension mismatch: oracle is (" +
                        std::to_string(n) + "," + std::to_string(m) + "), point is (" +
                        std::to_string(z.n()) + "," + std::to_string(z.m()) + ")");
  }
};

// ---------------------------------------------------------------------------
// Field evaluations. Each helper increments exactly the counters that the
// accounting invariants promise: the coupling field bumps h_calls, the
// individual field bumps f_calls, and the full gradient field bumps both.
// ---------------------------------------------------------------------------

// H(z) = [grad_x I ; -grad_y I]
inline VectorXd coupling_field_raw(const OracleBundle& o, const VectorXd& z) {
  VectorXd out(o.n + o.m);
  out.head(o.n) = o.grad_ix(z.head(o.n), z.tail(o.m));
  out.tail(o.m) = -o.grad_iy(z.head(o.n), z.tail(o.m));
  return out;
}

// grad F(z) = [grad f ; grad g]
inline VectorXd individual_field_raw(const OracleBundle& o, const VectorXd& z) {
  VectorXd out(o.n + o.m);
  out.head(o.n) = o.grad_f(z.head(o.n));
  out.tail(o.m) = o.grad_g(z.tail(o.m));
  return out;
}

inline PairVecD coupling_field(const OracleBundle& o, const PairVecD& z, RunContext& ctx) {
  o.check_point(z);
  ctx.counters.h_calls += 1;
  return PairVecD(coupling_field_raw(o, z.joined()), o.n);
}

inline PairVecD individual_field(const OracleBundle& o, const PairVecD& z, RunContext& ctx) {
  o.check_point(z);
  ctx.counters.f_calls += 1;
  return PairVecD(individual_field_raw(o, z.joined()), o.n);
}

// W(z) = grad F(z) + H(z); calls each of the four sub-oracles exactly once.
inline PairVecD gradient_field(const OracleBundle& o, const PairVecD& z, RunContext& ctx) {
  o.check_point(z);
  ctx.counters.h_calls += 1;
  ctx.counters.f_calls += 1;
  VectorXd out = coupling_field_raw(o, z.joined());
  out += individual_field_raw(o, z.joined());
  return PairVecD(std::move(out), o.n);
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace detail {
// Neumaier-compensated sum of squares; used above the dimension where plain
// accumulation starts losing digits at benchmark tolerances.
template <typename Scalar, typename Expr>
Scalar compensated_squared_norm(const Expr& d) {
  Scalar sum = 0, comp = 0;
  for (Index i = 0; i < d.size(); ++i) {
    const Scalar term = d[i] * d[i];
    const Scalar t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}
}  // namespace detail

inline constexpr Index kCompensatedSumThreshold = 10000;

inline double sq_dist_joined(const VectorXd& a, const VectorXd& b) {
  if (a.size() != b.size()) throw ConfigError("sq_dist: dimension mismatch");
  if (a.size() > kCompensatedSumThreshold) {
    VectorXd d = a - b;
    return detail::compensated_squared_norm<double>(d);
  }
  return (a - b).squaredNorm();
}

template <typename Scalar>
Scalar sq_dist(const PairVec<Scalar>& a, const PairVec<Scalar>& b) {
  if (a.n() != b.n() || a.m() != b.m())
    throw ConfigError("sq_dist: dimension mismatch");
  if (a.size() > kCompensatedSumThreshold) {
    Eigen::Vector<Scalar, Eigen::Dynamic> d = a.joined() - b.joined();
    return detail::compensated_squared_norm<Scalar>(d);
  }
  return (a.joined() - b.joined()).squaredNorm();
}

// Point-wise primal-dual gap V(z, zref) = F(z) - F(zref) + <H(zref), z - zref>.
// Diagnostic only: uses a scratch context so it never perturbs run accounting.
inline double gap_value(const OracleBundle& o, const PairVecD& z, const PairVecD& zref) {
  o.check_point(z);
  o.check_point(zref);
  if (!o.value_f || !o.value_g)
    throw UnsupportedError("gap_value: instance does not expose function values");
  const double fz = o.value_f(z.x()) + o.value_g(z.y());
  const double fref = o.value_f(zref.x()) + o.value_g(zref.y());
  const VectorXd h_ref = coupling_field_raw(o, zref.joined());
  return fz - fref + h_ref.dot(z.joined() - zref.joined());
}

}  // namespace sepmin

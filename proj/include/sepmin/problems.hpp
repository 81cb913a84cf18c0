#pragma once

#include <array>
#include <cstdint>
#include <memory>

#include "sepmin/core.hpp"

namespace sepmin {

// ---------------------------------------------------------------------------
// Synthetic instance specs. Matrices are built as Q diag(lambda) Q' with a
// seeded Haar-random Q, so the requested spectra (and hence every smoothness
// constant) are exact by construction rather than estimated.
// ---------------------------------------------------------------------------

struct EigRange {
  double lo = 0, hi = 0;
};

// Objective x'A1 x + y'A2 x - y'A3 y + b1'x + b2'y, split as
//   f(x) = x'A1 x + b1'x,  I(x,y) = y'A2 x,  g(y) = y'A3 y - b2'y.
struct QuadraticGameSpec {
  Index n = 2, m = 2;
  EigRange a1_eig;      // eigenvalues of A1 (so L_f = 2 hi, mu_f = 2 lo)
  EigRange a3_eig;      // eigenvalues of A3
  EigRange a2tA2_eig;   // eigenvalues of A2'A2 (so I_xy = sqrt(hi))
  double b1_scale = 0;  // norm of the seeded linear offsets; 0 keeps z* = 0
  double b2_scale = 0;
  std::uint64_t seed = 0;
};

// Coupling I(x,y) = x'B y + u_x'x + u_y'y with f = g = 0 and square
// full-rank B.
struct BilinearGameSpec {
  MatrixXd b;
  VectorXd u_x, u_y;
  std::uint64_t seed = 0;
};

BilinearGameSpec random_bilinear_spec(Index n, double sv_lo, double sv_hi,
                                      double u_scale, std::uint64_t seed);

// Policy-evaluation saddle built from a seeded synthetic trajectory, with an
// optional (mu_reg/2)||x||^2 regularizer making the x block strongly convex.
struct MspbeSpec {
  int n_states = 8;
  int feature_dim = 4;
  double gamma = 0.9;
  double mu_reg = 1.0;
  std::uint64_t seed = 0;
};

// Penalized robust least squares 1/2 ||A x - y||^2 - rho ||y - y0||^2 with a
// seeded tall A (rows x cols) and ||y0|| = radius.
struct RobustLsSpec {
  Index rows = 4, cols = 3;
  double rho = 1.0;
  double radius = 1.0;
  std::uint64_t seed = 0;
};

struct NoiseModel {
  enum class Kind { none, additive, matrix_perturbation };
  Kind kind = Kind::none;
  double sigma_h = 0;  // additive: second-moment bound on the coupling oracle;
                       // matrix_perturbation: entrywise deviation of the matrices
  double sigma_f = 0;  // additive only
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

OracleBundle make_quadratic_game(const QuadraticGameSpec& spec);
OracleBundle make_bilinear_game(const BilinearGameSpec& spec);
OracleBundle make_mspbe(const MspbeSpec& spec);
OracleBundle make_mspbe_from_data(const MatrixXd& a, const VectorXd& b,
                                  const MatrixXd& c, double mu_reg);
OracleBundle make_robust_ls(const RobustLsSpec& spec);

// Builds the oracle closures, value oracles and optimum for a closed-form
// instance. Every generator funnels through here.
OracleBundle bundle_from_model(QuadraticModel model, ProblemConstants constants,
                               std::string family, bool attach_optimum = true);

// Solves W(z*) = 0 for linear-gradient instances by dense factorization of
// the assembled system; throws NoUniqueOptimumError when it is singular.
PairVecD exact_minimax(const OracleBundle& oracle);

// The gradient field of a closed-form instance, assembled as W(z) = M z + q.
struct LinearField {
  MatrixXd m;
  VectorXd q;
};
LinearField assemble_linear_field(const QuadraticModel& model);

// Change of variables y = y_scale * yhat applied to the oracle, producing the
// instance the single-stepsize solver sees after scaling reduction.
OracleBundle scale_y_oracle(const OracleBundle& oracle, double y_scale);

// Operator norm via full SVD at desk scale, power iteration above.
double operator_norm(const MatrixXd& m);

// Haar-distributed orthogonal matrix (QR of a Gaussian sample, R-diagonal
// sign fix).
MatrixXd haar_orthogonal(Index n, SeqRng& rng);

// ---------------------------------------------------------------------------
// Stochastic wrapper
// ---------------------------------------------------------------------------

// Unbiased noisy oracles over a deterministic bundle. Noise draw #j is keyed
// by (master_seed ^ model seed, seed_index, oracle kind, call index), so it is
// reproducible independent of evaluation order.
class StochasticOracle {
 public:
  StochasticOracle(OracleBundle base, NoiseModel noise);

  const OracleBundle& base() const { return *base_; }
  const NoiseModel& noise() const { return noise_; }

  // Noisy coupling field; uses and advances ctx.counters.h_calls.
  VectorXd coupling(const VectorXd& z, RunContext& ctx) const;
  // Noisy individual-gradient field; uses and advances ctx.counters.f_calls.
  VectorXd individual(const VectorXd& z, RunContext& ctx) const;

  // Second-moment bounds fed to the schedules. For matrix perturbation the
  // noise is state-dependent, so the bound is taken on the ball
  // ||z|| <= z_bound.
  std::pair<double, double> effective_sigmas(double z_bound) const;

 private:
  std::shared_ptr<const OracleBundle> base_;
  NoiseModel noise_;
};

StochasticOracle wrap_stochastic(OracleBundle oracle, NoiseModel noise);

}  // namespace sepmin

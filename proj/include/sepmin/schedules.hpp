#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "sepmin/core.hpp"

namespace sepmin {

// All closed-form run parameters. Irrational constants are computed from
// library sqrt/e at full precision, never spelled as decimals.

template <typename Scalar = double>
Scalar accel_coupling_coef() {  // sqrt(3 + sqrt(3))
  return std::sqrt(Scalar(3) + std::sqrt(Scalar(3)));
}

template <typename Scalar = double>
Scalar stoch_coupling_coef() {  // sqrt(2 + sqrt(2))
  return std::sqrt(Scalar(2) + std::sqrt(Scalar(2)));
}

template <typename Scalar = double>
Scalar momentum_weight(std::int64_t k) {  // alpha_k = 2/(k+2)
  return Scalar(2) / Scalar(k + 2);
}

// Deterministic stepsize eta_k = (k+2) / (2L + sqrt(3+sqrt(3)) L_H (k+2)).
// Satisfies L_H * eta_k <= 1/sqrt(3+sqrt(3)) for every k.
template <typename Scalar = double>
Scalar agog_stepsize(std::int64_t k, Scalar L, Scalar L_H) {
  if (L <= Scalar(0) && L_H <= Scalar(0))
    throw InvalidSpecError("agog_stepsize: degenerate problem (L = L_H = 0)");
  const Scalar t = Scalar(k + 2);
  return t / (Scalar(2) * L + accel_coupling_coef<Scalar>() * L_H * t);
}

// Stochastic stepsize eta_k = (k+2) / (4L + D + 4 sqrt(2+sqrt(2)) L_H (k+2)).
template <typename Scalar = double>
Scalar sagog_stepsize(std::int64_t k, Scalar L, Scalar L_H, Scalar D) {
  if (L <= Scalar(0) && L_H <= Scalar(0) && D <= Scalar(0))
    throw InvalidSpecError("sagog_stepsize: degenerate problem (L = L_H = D = 0)");
  const Scalar t = Scalar(k + 2);
  return t / (Scalar(4) * L + D + Scalar(4) * stoch_coupling_coef<Scalar>() * L_H * t);
}

// A(K) = sqrt((K+1)(K+2)(2K+3)/6), the accumulated-noise weight of a
// K-iteration stochastic run.
template <typename Scalar = double>
Scalar noise_accumulation(std::int64_t K) {
  const Scalar kk = Scalar(K);
  return std::sqrt((kk + 1) * (kk + 2) * (2 * kk + 3) / Scalar(6));
}

// Overall deviation sigma = sqrt(3 sqrt(2) sigma_H^2 + 2 sigma_F^2).
template <typename Scalar = double>
Scalar combined_sigma(Scalar sigma_h, Scalar sigma_f) {
  return std::sqrt(Scalar(3) * std::sqrt(Scalar(2)) * sigma_h * sigma_h +
                   Scalar(2) * sigma_f * sigma_f);
}

// Change of variables yhat = sqrt(mu_g/mu_f) y mapped onto the constants: the
// solver then runs a single nominal stepsize with the y block scaled by
// y_ratio = mu_f/mu_g.
struct ScaledConstants {
  double l = 0, mu = 0, l_h = 0, y_ratio = 1;
};

inline ScaledConstants reduce_scaling(const ProblemConstants& c) {
  if (c.mu_f <= 0 || c.mu_g <= 0)
    throw InvalidSpecError(
        "reduce_scaling: requires mu_f > 0 and mu_g > 0 (regularize first)");
  const double r = c.mu_f / c.mu_g;
  ScaledConstants s;
  s.l = std::max(c.l_f, r * c.l_g);
  s.l_h = std::max({c.i_xx, c.i_xy * std::sqrt(r), c.i_yy * r});
  s.mu = c.mu_f;
  s.y_ratio = r;
  return s;
}

// Epoch length guaranteeing a squared-distance contraction factor <= 1/e.
inline std::int64_t epoch_length(double L, double mu, double L_H) {
  if (mu <= 0) throw InvalidSpecError("epoch_length: requires mu > 0");
  const double e = std::numbers::e_v<double>;
  const double k = std::max(std::sqrt(8.0 * e * L / mu),
                            4.0 * e * accel_coupling_coef<double>() * L_H / mu);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(k)));
}

// Number of factor-1/e contractions needed to bring sq_dist0 below target_sq.
// Ratios that sit on an integer boundary up to rounding snap down to it.
inline std::int64_t epoch_count(double sq_dist0, double target_sq) {
  if (sq_dist0 <= 0 || target_sq <= 0)
    throw InvalidSpecError("epoch_count: distances must be positive");
  const double r = std::log(sq_dist0 / target_sq);
  if (r <= 0) return 0;
  const double nearest = std::round(r);
  if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, std::abs(r)))
    return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(r));
}

// Bilinear-game epoch length: ceil(8 sqrt(e * lmax/lmin)) iterations make the
// bilinear rate factor 64 kappa / (K+1)^2 at most 1/e.
inline std::int64_t bilinear_epoch_length(double lambda_max, double lambda_min) {
  if (lambda_min <= 0)
    throw InvalidSpecError("bilinear_epoch_length: requires lambda_min > 0");
  const double k = 8.0 * std::sqrt(std::numbers::e_v<double> * lambda_max / lambda_min);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(k)));
}

// The full run parameterization handed to solvers: stepsize rule, scaled
// constants, y-block ratio, stochastic damping and epoch bookkeeping.
struct ScheduleSet {
  enum class Kind { deterministic, stochastic, constant };

  Kind kind = Kind::deterministic;
  double l = 0, mu = 0, l_h = 0;
  double y_ratio = 1.0;
  double d = 0.0;        // stochastic damping term
  double a_k = 0.0;      // noise accumulation A(K) used to build d
  double eta_fixed = 0;  // for Kind::constant
  std::int64_t epoch_len = 0;
  std::int64_t n_epochs = 0;

  double alpha(std::int64_t k) const { return momentum_weight<double>(k); }

  double eta(std::int64_t k) const {
    switch (kind) {
      case Kind::deterministic:
        return agog_stepsize<double>(k, l, l_h);
      case Kind::stochastic:
        return sagog_stepsize<double>(k, l, l_h, d);
      case Kind::constant:
        return eta_fixed;
    }
    return 0;
  }
};

inline ScheduleSet make_agog_schedule(const ProblemConstants& c) {
  const ScaledConstants s = reduce_scaling(c);
  ScheduleSet sched;
  sched.kind = ScheduleSet::Kind::deterministic;
  sched.l = s.l;
  sched.mu = s.mu;
  sched.l_h = s.l_h;
  sched.y_ratio = s.y_ratio;
  return sched;
}

inline ScheduleSet make_sagog_schedule(const ProblemConstants& c, double sigma,
                                       std::int64_t horizon, double gamma0) {
  const ScaledConstants s = reduce_scaling(c);
  ScheduleSet sched;
  sched.kind = ScheduleSet::Kind::stochastic;
  sched.l = s.l;
  sched.mu = s.mu;
  sched.l_h = s.l_h;
  sched.y_ratio = s.y_ratio;
  sched.a_k = noise_accumulation<double>(horizon);
  if (sigma > 0) {
    if (gamma0 <= 0)
      throw InvalidSpecError("make_sagog_schedule: needs gamma0 > 0 when sigma > 0");
    sched.d = sigma * sched.a_k / gamma0;
  }
  return sched;
}

inline ScheduleSet make_constant_schedule(double eta, double l_h = 0) {
  if (eta <= 0) throw InvalidSpecError("make_constant_schedule: eta must be > 0");
  ScheduleSet sched;
  sched.kind = ScheduleSet::Kind::constant;
  sched.eta_fixed = eta;
  sched.l_h = l_h;
  return sched;
}

// Bilinear specialization: eta = 1/(2 L_H), and 1/(2 L_H sqrt(1+beta)) under
// coupling noise.
inline ScheduleSet make_bilinear_schedule(double l_h, double beta = 0.0) {
  if (l_h <= 0) throw InvalidSpecError("make_bilinear_schedule: L_H must be > 0");
  if (beta < 0) throw InvalidSpecError("make_bilinear_schedule: beta must be >= 0");
  return make_constant_schedule(1.0 / (2.0 * l_h * std::sqrt(1.0 + beta)), l_h);
}

}  // namespace sepmin

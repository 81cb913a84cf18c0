#include "sepmin/problems.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>

namespace sepmin {

namespace {

constexpr double kRankTol = 1e-12;
constexpr Index kDenseSvdLimit = 512;

VectorXd spectrum_in_range(Index n, const EigRange& r, SeqRng& rng) {
  if (r.hi < r.lo) throw InvalidSpecError("eigenvalue range has hi < lo");
  VectorXd lam(n);
  if (n == 1) {
    lam[0] = r.lo;
    return lam;
  }
  lam[0] = r.lo;
  lam[n - 1] = r.hi;
  for (Index i = 1; i + 1 < n; ++i) lam[i] = r.lo + (r.hi - r.lo) * rng.uniform();
  return lam;
}

MatrixXd gaussian_matrix(Index rows, Index cols, SeqRng& rng) {
  MatrixXd g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

VectorXd seeded_direction(Index n, double scale, SeqRng& rng) {
  if (scale == 0.0) return VectorXd::Zero(n);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  const double nrm = v.norm();
  return nrm > 0 ? VectorXd(scale / nrm * v) : VectorXd::Zero(n);
}

MatrixXd symmetric_with_spectrum(const VectorXd& lam, SeqRng& rng) {
  const Index n = lam.size();
  const MatrixXd q = haar_orthogonal(n, rng);
  return q * lam.asDiagonal() * q.transpose();
}

// Rectangular matrix with prescribed singular values (shared Haar factors).
MatrixXd matrix_with_singular_values(Index rows, Index cols, const VectorXd& sv,
                                     SeqRng& rng) {
  const MatrixXd u = haar_orthogonal(rows, rng);
  const MatrixXd v = haar_orthogonal(cols, rng);
  MatrixXd s = MatrixXd::Zero(rows, cols);
  for (Index i = 0; i < sv.size(); ++i) s(i, i) = sv[i];
  return u * s * v.transpose();
}

void verify_optimum_residual(const OracleBundle& o, const PairVecD& zstar,
                             const VectorXd& q) {
  const VectorXd w = coupling_field_raw(o, zstar.joined()) +
                     individual_field_raw(o, zstar.joined());
  const double scale = 1.0 + q.norm();
  if (w.norm() > 1e-8 * scale)
    throw InvalidSpecError("synthetic optimum fails the stationarity check");
}

}  // namespace

MatrixXd haar_orthogonal(Index n, SeqRng& rng) {
  const MatrixXd g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

double operator_norm(const MatrixXd& m) {
  if (std::max(m.rows(), m.cols()) <= kDenseSvdLimit)
    return m.rows() == 0 || m.cols() == 0
               ? 0.0
               : Eigen::JacobiSVD<MatrixXd>(m).singularValues()[0];
  // Power iteration on M'M.
  VectorXd v = VectorXd::Ones(m.cols()).normalized();
  double prev = 0;
  for (int it = 0; it < 10000; ++it) {
    VectorXd w = m.transpose() * (m * v);
    const double nrm = w.norm();
    if (nrm == 0) return 0;
    v = w / nrm;
    const double est = std::sqrt(nrm);
    if (std::abs(est - prev) <= 1e-12 * std::max(1.0, est)) return est;
    prev = est;
  }
  return prev;
}

OracleBundle bundle_from_model(QuadraticModel model, ProblemConstants constants,
                               std::string family, bool attach_optimum) {
  constants.validate();
  auto shared = std::make_shared<const QuadraticModel>(std::move(model));
  const QuadraticModel& mm = *shared;

  OracleBundle o;
  o.n = mm.n();
  o.m = mm.m();
  o.family = std::move(family);
  o.constants = constants;
  o.model = shared;

  o.grad_f = [shared](const VectorXd& x) -> VectorXd {
    return shared->hess_f * x + shared->lin_f;
  };
  o.grad_g = [shared](const VectorXd& y) -> VectorXd {
    return shared->hess_g * y + shared->lin_g;
  };
  o.grad_ix = [shared](const VectorXd&, const VectorXd& y) -> VectorXd {
    return shared->coupling * y + shared->lin_ix;
  };
  o.grad_iy = [shared](const VectorXd& x, const VectorXd&) -> VectorXd {
    return shared->coupling.transpose() * x + shared->lin_iy;
  };
  o.value_f = [shared](const VectorXd& x) {
    return 0.5 * x.dot(shared->hess_f * x) + shared->lin_f.dot(x);
  };
  o.value_g = [shared](const VectorXd& y) {
    return 0.5 * y.dot(shared->hess_g * y) + shared->lin_g.dot(y);
  };
  o.value_i = [shared](const VectorXd& x, const VectorXd& y) {
    return x.dot(shared->coupling * y) + shared->lin_ix.dot(x) + shared->lin_iy.dot(y);
  };

  if (attach_optimum) {
    const PairVecD zstar = exact_minimax(o);
    VectorXd q(o.n + o.m);
    q << mm.lin_f + mm.lin_ix, mm.lin_g - mm.lin_iy;
    verify_optimum_residual(o, zstar, q);
    o.optimum = zstar;
  }
  return o;
}

LinearField assemble_linear_field(const QuadraticModel& mm) {
  const Index n = mm.n(), m = mm.m();
  LinearField f;
  f.m.resize(n + m, n + m);
  f.m.topLeftCorner(n, n) = mm.hess_f;
  f.m.topRightCorner(n, m) = mm.coupling;
  f.m.bottomLeftCorner(m, n) = -mm.coupling.transpose();
  f.m.bottomRightCorner(m, m) = mm.hess_g;
  f.q.resize(n + m);
  f.q << mm.lin_f + mm.lin_ix, mm.lin_g - mm.lin_iy;
  return f;
}

PairVecD exact_minimax(const OracleBundle& oracle) {
  if (!oracle.model)
    throw UnsupportedError("exact_minimax: needs a linear-gradient instance");
  const QuadraticModel& mm = *oracle.model;
  const Index n = mm.n();
  LinearField lf = assemble_linear_field(mm);
  const MatrixXd& sys = lf.m;
  const VectorXd& q = lf.q;

  Eigen::FullPivLU<MatrixXd> lu(sys);
  lu.setThreshold(kRankTol);
  if (!lu.isInvertible())
    throw NoUniqueOptimumError(
        "exact_minimax: stationarity system is singular (no unique optimum)");
  VectorXd z = lu.solve(-q);
  const double resid = (sys * z + q).norm();
  if (resid > 1e-10 * (sys.norm() * z.norm() + q.norm()) + 1e-300)
    throw NoUniqueOptimumError("exact_minimax: solve residual too large");
  return PairVecD(std::move(z), n);
}

OracleBundle make_quadratic_game(const QuadraticGameSpec& spec) {
  if (spec.n < 1 || spec.m < 1)
    throw InvalidSpecError("quadratic game: dimensions must be >= 1");
  if (spec.a1_eig.lo <= 0 || spec.a3_eig.lo <= 0)
    throw InvalidSpecError("quadratic game: A1/A3 eigenvalue ranges must be positive");
  if (spec.a2tA2_eig.lo < 0)
    throw InvalidSpecError("quadratic game: A2'A2 eigenvalues must be nonnegative");

  SeqRng rng(spec.seed, 0, StreamKind::generator);
  const VectorXd lam1 = spectrum_in_range(spec.n, spec.a1_eig, rng);
  const VectorXd lam3 = spectrum_in_range(spec.m, spec.a3_eig, rng);
  const Index nsv = std::min(spec.n, spec.m);
  const VectorXd sv2 =
      spectrum_in_range(nsv, {std::sqrt(spec.a2tA2_eig.lo), std::sqrt(spec.a2tA2_eig.hi)},
                        rng);

  const MatrixXd a1 = symmetric_with_spectrum(lam1, rng);
  const MatrixXd a3 = symmetric_with_spectrum(lam3, rng);
  const MatrixXd a2 = matrix_with_singular_values(spec.m, spec.n, sv2, rng);
  const VectorXd b1 = seeded_direction(spec.n, spec.b1_scale, rng);
  const VectorXd b2 = seeded_direction(spec.m, spec.b2_scale, rng);

  QuadraticModel model;
  model.hess_f = 2.0 * a1;
  model.lin_f = b1;
  model.hess_g = 2.0 * a3;
  model.lin_g = -b2;
  model.coupling = a2.transpose();
  model.lin_ix = VectorXd::Zero(spec.n);
  model.lin_iy = VectorXd::Zero(spec.m);

  ProblemConstants c;
  c.l_f = 2.0 * lam1.maxCoeff();
  c.mu_f = 2.0 * lam1.minCoeff();
  c.l_g = 2.0 * lam3.maxCoeff();
  c.mu_g = 2.0 * lam3.minCoeff();
  c.i_xy = sv2.size() ? sv2.maxCoeff() : 0.0;

  OracleBundle o = bundle_from_model(std::move(model), c, "quadratic_game");
  o.coupling_spectrum = CouplingSpectrum{sv2.maxCoeff(), sv2.minCoeff()};
  return o;
}

BilinearGameSpec random_bilinear_spec(Index n, double sv_lo, double sv_hi,
                                      double u_scale, std::uint64_t seed) {
  SeqRng rng(seed, 0, StreamKind::generator);
  const VectorXd sv = spectrum_in_range(n, {sv_lo, sv_hi}, rng);
  BilinearGameSpec spec;
  spec.b = matrix_with_singular_values(n, n, sv, rng);
  spec.u_x = seeded_direction(n, u_scale, rng);
  spec.u_y = seeded_direction(n, u_scale, rng);
  spec.seed = seed;
  return spec;
}

OracleBundle make_bilinear_game(const BilinearGameSpec& spec) {
  const Index n = spec.b.rows();
  if (n < 1 || spec.b.cols() != n)
    throw InvalidSpecError("bilinear game: B must be square");
  if (spec.u_x.size() != n || spec.u_y.size() != n)
    throw InvalidSpecError("bilinear game: offset dimension mismatch");

  Eigen::JacobiSVD<MatrixXd> svd(spec.b);
  const double smax = svd.singularValues()[0];
  const double smin = svd.singularValues()[n - 1];
  if (smin <= kRankTol * smax)
    throw InvalidSpecError("bilinear game: B is rank deficient");

  QuadraticModel model;
  model.hess_f = MatrixXd::Zero(n, n);
  model.hess_g = MatrixXd::Zero(n, n);
  model.lin_f = VectorXd::Zero(n);
  model.lin_g = VectorXd::Zero(n);
  model.coupling = spec.b;
  model.lin_ix = spec.u_x;
  model.lin_iy = spec.u_y;

  ProblemConstants c;
  c.i_xy = smax;

  OracleBundle o = bundle_from_model(std::move(model), c, "bilinear_game");
  o.coupling_spectrum = CouplingSpectrum{smax, smin};
  return o;
}

OracleBundle make_mspbe_from_data(const MatrixXd& a, const VectorXd& b,
                                  const MatrixXd& c, double mu_reg) {
  const Index d = a.rows();
  if (a.cols() != d || c.rows() != d || c.cols() != d || b.size() != d)
    throw InvalidSpecError("mspbe: A, C must be d x d and b length d");
  if (mu_reg < 0) throw InvalidSpecError("mspbe: mu_reg must be >= 0");

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(c);
  const double cmin = es.eigenvalues().minCoeff();
  const double cmax = es.eigenvalues().maxCoeff();
  if (cmin <= kRankTol * std::max(1.0, cmax))
    throw InvalidSpecError("mspbe: feature covariance C is rank deficient");

  QuadraticModel model;
  model.hess_f = mu_reg * MatrixXd::Identity(d, d);
  model.lin_f = VectorXd::Zero(d);
  model.hess_g = c;
  model.lin_g = VectorXd::Zero(d);
  model.coupling = -a.transpose();
  model.lin_ix = VectorXd::Zero(d);
  model.lin_iy = b;

  ProblemConstants pc;
  pc.l_f = mu_reg;
  pc.mu_f = mu_reg;
  pc.l_g = cmax;
  pc.mu_g = cmin;
  pc.i_xy = operator_norm(a);

  return bundle_from_model(std::move(model), pc, "mspbe");
}

OracleBundle make_mspbe(const MspbeSpec& spec) {
  if (spec.gamma < 0 || spec.gamma >= 1)
    throw InvalidSpecError("mspbe: gamma must lie in [0, 1)");
  if (spec.feature_dim < 1 || spec.n_states < spec.feature_dim)
    throw InvalidSpecError("mspbe: need n_states >= feature_dim >= 1");

  SeqRng rng(spec.seed, 0, StreamKind::generator);
  const Index d = spec.feature_dim;
  const Index ns = spec.n_states;
  const MatrixXd features = gaussian_matrix(d, ns, rng);  // column s = phi(s)

  const Index steps = 10 * ns;
  MatrixXd a = MatrixXd::Zero(d, d);
  MatrixXd c = MatrixXd::Zero(d, d);
  VectorXd b = VectorXd::Zero(d);
  Index s = static_cast<Index>(rng.uniform() * ns) % ns;
  for (Index t = 0; t < steps; ++t) {
    const Index s_next = static_cast<Index>(rng.uniform() * ns) % ns;
    const double reward = rng.normal();
    const VectorXd phi = features.col(s);
    a += phi * (phi - spec.gamma * features.col(s_next)).transpose();
    c += phi * phi.transpose();
    b += reward * phi;
    s = s_next;
  }
  a /= double(steps);
  c /= double(steps);
  b /= double(steps);
  return make_mspbe_from_data(a, b, c, spec.mu_reg);
}

OracleBundle make_robust_ls(const RobustLsSpec& spec) {
  if (spec.rho <= 0.5)
    throw InvalidSpecError("robust_ls: rho must be > 1/2 to keep strong concavity");
  if (spec.rows < spec.cols || spec.cols < 1)
    throw InvalidSpecError("robust_ls: needs rows >= cols >= 1");

  SeqRng rng(spec.seed, 0, StreamKind::generator);
  const MatrixXd a = gaussian_matrix(spec.rows, spec.cols, rng);
  const VectorXd y0 = seeded_direction(spec.rows, spec.radius, rng);

  const MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
  const double gmin = es.eigenvalues().minCoeff();
  const double gmax = es.eigenvalues().maxCoeff();
  if (gmin <= kRankTol * std::max(1.0, gmax))
    throw InvalidSpecError("robust_ls: A'A is rank deficient");

  QuadraticModel model;
  model.hess_f = gram;
  model.lin_f = VectorXd::Zero(spec.cols);
  model.hess_g = (2.0 * spec.rho - 1.0) * MatrixXd::Identity(spec.rows, spec.rows);
  model.lin_g = -2.0 * spec.rho * y0;
  model.coupling = -a.transpose();
  model.lin_ix = VectorXd::Zero(spec.cols);
  model.lin_iy = VectorXd::Zero(spec.rows);

  ProblemConstants pc;
  pc.l_f = gmax;
  pc.mu_f = gmin;
  pc.l_g = 2.0 * spec.rho - 1.0;
  pc.mu_g = pc.l_g;
  pc.i_xy = std::sqrt(gmax);  // sigma_max(A)

  return bundle_from_model(std::move(model), pc, "robust_ls");
}

OracleBundle scale_y_oracle(const OracleBundle& oracle, double y_scale) {
  if (!(y_scale > 0)) throw InvalidSpecError("scale_y_oracle: scale must be > 0");
  if (!oracle.model)
    throw UnsupportedError("scale_y_oracle: needs a linear-gradient instance");
  const double s = y_scale;
  const QuadraticModel& mm = *oracle.model;

  QuadraticModel scaled = mm;
  scaled.hess_g = (s * s) * mm.hess_g;
  scaled.lin_g = s * mm.lin_g;
  scaled.coupling = s * mm.coupling;
  scaled.lin_iy = s * mm.lin_iy;

  ProblemConstants c = oracle.constants;
  c.l_g *= s * s;
  c.mu_g *= s * s;
  c.i_xy *= s;
  c.i_yy *= s * s;

  return bundle_from_model(std::move(scaled), c, oracle.family + ":scaled_y",
                           oracle.optimum.has_value());
}

// ---------------------------------------------------------------------------
// Stochastic oracle
// ---------------------------------------------------------------------------

StochasticOracle::StochasticOracle(OracleBundle base, NoiseModel noise)
    : base_(std::make_shared<const OracleBundle>(std::move(base))), noise_(noise) {
  if (noise_.sigma_h < 0 || noise_.sigma_f < 0)
    throw InvalidSpecError("noise model: negative deviation");
  if (noise_.kind == NoiseModel::Kind::matrix_perturbation) {
    const bool quad_like =
        base_->family == "quadratic_game" || base_->family == "bilinear_game";
    if (!quad_like || !base_->model)
      throw InvalidSpecError(
          "matrix_perturbation noise requires a quadratic or bilinear game");
  }
}

StochasticOracle wrap_stochastic(OracleBundle oracle, NoiseModel noise) {
  return StochasticOracle(std::move(oracle), noise);
}

VectorXd StochasticOracle::coupling(const VectorXd& z, RunContext& ctx) const {
  const auto idx = static_cast<std::uint64_t>(ctx.counters.h_calls++);
  VectorXd out = coupling_field_raw(*base_, z);
  if (noise_.kind == NoiseModel::Kind::none || noise_.sigma_h == 0) return out;

  const Index n = base_->n, m = base_->m;
  const NoiseStream st(ctx.master_seed ^ noise_.seed, ctx.seed_index,
                       StreamKind::coupling);
  if (noise_.kind == NoiseModel::Kind::additive) {
    const double scale = noise_.sigma_h / std::sqrt(double(n + m));
    for (Index i = 0; i < n + m; ++i)
      out[i] += scale * st.normal(idx, static_cast<std::uint64_t>(i));
    return out;
  }
  // matrix_perturbation: fresh entrywise perturbation E of the coupling
  // matrix; the noise is [E y; -E' x].
  MatrixXd e(n, m);
  std::uint64_t lane = 0;
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) e(i, j) = noise_.sigma_h * st.normal(idx, lane++);
  out.head(n) += e * z.tail(m);
  out.tail(m) -= e.transpose() * z.head(n);
  return out;
}

VectorXd StochasticOracle::individual(const VectorXd& z, RunContext& ctx) const {
  const auto idx = static_cast<std::uint64_t>(ctx.counters.f_calls++);
  VectorXd out = individual_field_raw(*base_, z);
  if (noise_.kind == NoiseModel::Kind::none) return out;

  const Index n = base_->n, m = base_->m;
  const NoiseStream st(ctx.master_seed ^ noise_.seed, ctx.seed_index,
                       StreamKind::individual);
  if (noise_.kind == NoiseModel::Kind::additive) {
    if (noise_.sigma_f == 0) return out;
    const double scale = noise_.sigma_f / std::sqrt(double(n + m));
    for (Index i = 0; i < n + m; ++i)
      out[i] += scale * st.normal(idx, static_cast<std::uint64_t>(i));
    return out;
  }
  // matrix_perturbation: the individual gradients of a bilinear game are zero
  // almost surely, so only the quadratic blocks are perturbed.
  if (base_->family != "quadratic_game" || noise_.sigma_h == 0) return out;
  const double s = 2.0 * noise_.sigma_h;  // hessians are twice the game matrices
  std::uint64_t lane = 0;
  MatrixXd ef(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) ef(i, j) = s * st.normal(idx, lane++);
  MatrixXd eg(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < m; ++i) eg(i, j) = s * st.normal(idx, lane++);
  out.head(n) += ef * z.head(n);
  out.tail(m) += eg * z.tail(m);
  return out;
}

std::pair<double, double> StochasticOracle::effective_sigmas(double z_bound) const {
  switch (noise_.kind) {
    case NoiseModel::Kind::none:
      return {0.0, 0.0};
    case NoiseModel::Kind::additive:
      return {noise_.sigma_h, noise_.sigma_f};
    case NoiseModel::Kind::matrix_perturbation: {
      const double dmax = double(std::max(base_->n, base_->m));
      const double root = std::sqrt(dmax) * std::max(z_bound, 0.0);
      const double sh = noise_.sigma_h * root;
      const double sf =
          base_->family == "quadratic_game" ? 2.0 * noise_.sigma_h * root : 0.0;
      return {sh, sf};
    }
  }
  return {0.0, 0.0};
}

}  // namespace sepmin

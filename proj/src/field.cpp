#include "aplab/field.hpp"

#include "aplab/sampling.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>

namespace aplab {

std::string_view to_string(BoundDirection d) {
  switch (d) {
    case BoundDirection::exact: return "exact";
    case BoundDirection::lower_bound: return "lower-bound";
    case BoundDirection::upper_bound: return "upper-bound";
    case BoundDirection::two_sided_unresolved: return "two-sided-unresolved";
  }
  return "unknown";
}

std::string_view to_string(EstimateKind k) {
  switch (k) {
    case EstimateKind::rho_k: return "rho_k";
    case EstimateKind::omega_k: return "omega_k";
    case EstimateKind::sigma: return "sigma";
    case EstimateKind::rho_star: return "rho_star";
  }
  return "unknown";
}

// ---------------------------------------------------------------- winding

WindingMatrix::WindingMatrix(MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.cols() < 1) throw ValidationError("WindingMatrix: empty matrix");
  if (!m_.allFinite()) throw ValidationError("WindingMatrix: non-finite entry");
  if (m_.rows() < m_.cols()) throw ValidationError("WindingMatrix: torus dimension m < d");
  Eigen::JacobiSVD<MatrixXd> svd(m_);
  if (svd.singularValues().minCoeff() <= 1e-12)
    throw ValidationError("WindingMatrix: not of full column rank");
}

std::optional<VectorXi> WindingMatrix::find_resonance(int radius, double tol) const {
  const int m = torus_dim();
  std::optional<VectorXi> found;
  for_each_int_box(m, radius, [&](const VectorXi& z) {
    if (found || z.cwiseAbs().maxCoeff() == 0) return;
    const VectorXd v = m_.transpose() * z.cast<double>();
    if (v.cwiseAbs().maxCoeff() <= tol) found = z;
  });
  return found;
}

void WindingMatrix::require_nonresonant(int radius) const {
  if (auto z = find_resonance(radius)) {
    std::string msg = "winding matrix is resonant: M^t z = 0 for z = (";
    for (Index i = 0; i < z->size(); ++i) msg += (i ? ", " : "") + std::to_string((*z)[i]);
    throw ResonanceError(msg + ")");
  }
}

// ---------------------------------------------------------- quasiperiodic

QuasiperiodicField::QuasiperiodicField(WindingMatrix winding, TrigPolynomial lifted)
    : winding_(std::move(winding)), lifted_(std::move(lifted)) {
  if (lifted_.torus_dim() != winding_.torus_dim())
    throw ValidationError("QuasiperiodicField: torus dimension mismatch");
}

VectorXd QuasiperiodicField::gradient(const VectorXd& x) const {
  const VectorXd alpha = winding_.lift(x);
  VectorXd g_torus(winding_.torus_dim());
  for (int i = 0; i < winding_.torus_dim(); ++i) g_torus[i] = lifted_.derivative(i)(alpha);
  return winding_.matrix().transpose() * g_torus;
}

QuasiperiodicField QuasiperiodicField::translated(const VectorXd& y) const {
  return {winding_, lifted_.shifted(winding_.lift(y))};
}

QuasiperiodicField QuasiperiodicField::difference(const VectorXd& y, const VectorXd& z) const {
  return {winding_, lifted_.difference(winding_.lift(y), winding_.lift(z))};
}

QuasiperiodicField QuasiperiodicField::difference_lifted(const VectorXd& beta,
                                                         const VectorXd& gamma) const {
  return {winding_, lifted_.difference(beta, gamma)};
}

QuasiperiodicField QuasiperiodicField::scaled(double s) const {
  return {winding_.scaled(s), lifted_};
}

std::vector<VectorXd> QuasiperiodicField::frequencies() const {
  std::vector<VectorXd> out;
  for (const auto& t : lifted_.terms())
    out.push_back(winding_.matrix().transpose() * t.k.cast<double>());
  return out;
}

double sup_norm(const QuasiperiodicField& f, int n_per_dim) {
  if (f.lifted().empty()) return 0.0;
  return f.lifted().sample_lattice(n_per_dim).cwiseAbs().maxCoeff();
}

// ------------------------------------------------------- coefficient field

CoefficientField::CoefficientField(Unchecked, WindingMatrix winding, MatrixXd shift,
                                   std::vector<TrigPolynomial> entries, double lambda,
                                   HolderRecord holder, double kappa)
    : winding_(std::move(winding)),
      shift_(std::move(shift)),
      entries_(std::move(entries)),
      lambda_(lambda),
      holder_(holder),
      kappa_(kappa) {}

CoefficientField::CoefficientField(WindingMatrix winding, MatrixXd shift,
                                   std::vector<TrigPolynomial> entries, double lambda,
                                   HolderRecord holder, double kappa)
    : CoefficientField(Unchecked{}, std::move(winding), std::move(shift), std::move(entries),
                       lambda, holder, kappa) {
  const int d = dim();
  if (shift_.rows() != d || shift_.cols() != d)
    throw ValidationError("CoefficientField: shift must be d x d");
  if (entries_.size() != static_cast<std::size_t>(d * d))
    throw ValidationError("CoefficientField: expected d*d entry polynomials");
  for (auto& e : entries_) {
    if (e.torus_dim() == 0) e = TrigPolynomial(winding_.torus_dim());
    if (e.torus_dim() != winding_.torus_dim())
      throw ValidationError("CoefficientField: entry torus dimension mismatch");
  }
  if (!(lambda_ >= 1.0) || !std::isfinite(lambda_))
    throw ValidationError("CoefficientField: Lambda must be finite and >= 1");
  validate();
}

CoefficientField CoefficientField::constant(const MatrixXd& a, double lambda) {
  const int d = static_cast<int>(a.rows());
  std::vector<TrigPolynomial> entries(static_cast<std::size_t>(d * d), TrigPolynomial(d));
  return CoefficientField(WindingMatrix::identity(d), a, std::move(entries), lambda);
}

CoefficientField CoefficientField::isotropic(WindingMatrix winding, const TrigPolynomial& g,
                                             double lambda) {
  const int d = winding.dim();
  const int m = winding.torus_dim();
  std::vector<TrigPolynomial> entries(static_cast<std::size_t>(d * d), TrigPolynomial(m));
  for (int i = 0; i < d; ++i) entries[static_cast<std::size_t>(i * d + i)] = g;
  return CoefficientField(std::move(winding), MatrixXd::Zero(d, d), std::move(entries), lambda);
}

double CoefficientField::entry_value(int i, int j, const VectorXd& x) const {
  return shift_(i, j) + entries_[idx(i, j)](winding_.lift(x));
}

MatrixXd CoefficientField::at_torus(const VectorXd& alpha) const {
  const int d = dim();
  MatrixXd a = shift_;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (!entries_[idx(i, j)].empty()) a(i, j) += entries_[idx(i, j)](alpha);
  return a;
}

QuasiperiodicField CoefficientField::entry(int i, int j) const {
  TrigPolynomial p = entries_[idx(i, j)];
  if (shift_(i, j) != 0.0) p += TrigPolynomial::constant(winding_.torus_dim(), shift_(i, j));
  return {winding_, p};
}

CoefficientField CoefficientField::translated(const VectorXd& y) const {
  const VectorXd beta = winding_.lift(y);
  std::vector<TrigPolynomial> shifted;
  shifted.reserve(entries_.size());
  for (const auto& e : entries_) shifted.push_back(e.shifted(beta));
  return CoefficientField(Unchecked{}, winding_, shift_, std::move(shifted), lambda_, holder_,
                          kappa_);
}

CoefficientField CoefficientField::scaled(double s) const {
  return CoefficientField(Unchecked{}, winding_.scaled(s), shift_, entries_, lambda_, holder_,
                          kappa_);
}

bool CoefficientField::is_symmetric() const {
  const int d = dim();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      if (shift_(i, j) != shift_(j, i)) return false;
      const auto& a = entries_[idx(i, j)].terms();
      const auto& b = entries_[idx(j, i)].terms();
      if (a.size() != b.size()) return false;
      for (std::size_t t = 0; t < a.size(); ++t)
        if (a[t].k != b[t].k || a[t].c != b[t].c || a[t].s != b[t].s) return false;
    }
  return true;
}

bool CoefficientField::is_constant() const {
  for (const auto& e : entries_)
    for (const auto& t : e.terms())
      if (t.k.cwiseAbs().sum() != 0 && (t.c != 0.0 || t.s != 0.0)) return false;
  return true;
}

bool CoefficientField::is_diagonal() const {
  const int d = dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j) {
        if (shift_(i, j) != 0.0) return false;
        for (const auto& t : entries_[idx(i, j)].terms())
          if (t.c != 0.0 || t.s != 0.0) return false;
      }
  return true;
}

std::pair<double, double> CoefficientField::ellipticity_range(int n_per_dim) const {
  const int d = dim();
  const int m = winding_.torus_dim();
  std::vector<VectorXd> samples(entries_.size());
  for (std::size_t e = 0; e < entries_.size(); ++e)
    if (!entries_[e].empty()) samples[e] = entries_[e].sample_lattice(n_per_dim);
  Index total = 1;
  for (int i = 0; i < m; ++i) total *= n_per_dim;
  double min_eig = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  MatrixXd a(d, d);
  for (Index p = 0; p < total; ++p) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        a(i, j) = shift_(i, j) + (samples[idx(i, j)].size() ? samples[idx(i, j)][p] : 0.0);
    const MatrixXd sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    max_norm = std::max(max_norm, Eigen::JacobiSVD<MatrixXd>(a).singularValues()(0));
  }
  return {min_eig, max_norm};
}

void CoefficientField::validate() const {
  const int m = winding_.torus_dim();
  const int n = std::max(4, static_cast<int>(std::floor(std::pow(20000.0, 1.0 / m))));
  const auto [min_eig, max_norm] = ellipticity_range(std::min(n, 32));
  constexpr double slack = 1e-12;
  if (min_eig < 1.0 - slack)
    throw ValidationError("CoefficientField: not elliptic (min eigenvalue of symmetric part " +
                          std::to_string(min_eig) + " < 1)");
  if (max_norm > lambda_ + slack)
    throw ValidationError("CoefficientField: |a(x)| = " + std::to_string(max_norm) +
                          " exceeds Lambda = " + std::to_string(lambda_));
}

// ------------------------------------------------------------- diophantine

DiophantineReport diophantine_constant(const WindingMatrix& M, double theta, int Z_max) {
  if (!(theta > 0.0)) throw ValidationError("diophantine_constant: theta must be > 0");
  if (Z_max < 1) throw ValidationError("diophantine_constant: Z_max must be >= 1");
  count_work();
  DiophantineReport rep;
  rep.theta = theta;
  rep.Z_max = Z_max;
  rep.A_est = std::numeric_limits<double>::infinity();
  const MatrixXd Mt = M.matrix().transpose();
  std::optional<VectorXi> resonance;
  bool degenerate = false;
  for_each_int_box(M.torus_dim(), Z_max, [&](const VectorXi& z) {
    if (z.cwiseAbs().maxCoeff() == 0) return;
    const VectorXd v = Mt * z.cast<double>();
    const double vmax = v.cwiseAbs().maxCoeff();
    const double vmin = v.cwiseAbs().minCoeff();
    if (vmax <= 1e-12) {
      if (!resonance) resonance = z;
      return;
    }
    if (vmin <= 1e-12) degenerate = true;
    const double value = vmin * std::pow(z.cast<double>().norm(), theta);
    if (value < rep.A_est) {
      rep.A_est = value;
      rep.argmin_z = z;
    }
  });
  if (resonance) M.require_nonresonant(Z_max);
  if (degenerate)
    throw ValidationError(
        "diophantine_constant: a component of M^t z vanishes for a nonzero integer z");
  return rep;
}

// ------------------------------------------------------------------ sigma

namespace {

double torus_gap(const MatrixXd& M, const VectorXd& beta, const VectorXd& z) {
  const VectorXd t = beta - M * z;
  double g = 0.0;
  for (Index i = 0; i < t.size(); ++i) g = std::max(g, dist_to_int(t[i]));
  return g;
}

// Exact minimum over s in [s0, s1] of max_i dist(beta_i - M_i s, Z) for a
// cell on which every component moves by less than 1/4.
std::pair<double, double> cell_minimum(const VectorXd& col, const VectorXd& beta, double s0,
                                       double s1) {
  const Index m = col.size();
  auto q = [&](double s) {
    double g = 0.0;
    for (Index i = 0; i < m; ++i) g = std::max(g, dist_to_int(beta[i] - col[i] * s));
    return g;
  };
  std::pair<double, double> best{q(s0), s0};
  auto consider = [&](double s) {
    if (!(s > s0 && s < s1)) return;
    const double v = q(s);
    if (v < best.first) best = {v, s};
  };
  consider(0.5 * (s0 + s1));
  {
    const double v1 = q(s1);
    if (v1 < best.first) best = {v1, s1};
  }
  // Integers adjacent to each component along the cell.
  std::vector<std::array<double, 2>> ints(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const double a = beta[i] - col[i] * s0;
    const double b = beta[i] - col[i] * s1;
    ints[static_cast<std::size_t>(i)] = {std::nearbyint(a), std::nearbyint(b)};
    if (col[i] != 0.0)
      for (double n : ints[static_cast<std::size_t>(i)]) consider((beta[i] - n) / col[i]);
  }
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j)
      for (double ni : ints[static_cast<std::size_t>(i)])
        for (double nj : ints[static_cast<std::size_t>(j)])
          for (double sign : {1.0, -1.0}) {
            // beta_i - ni - c_i s = sign (beta_j - nj - c_j s)
            const double denom = col[i] - sign * col[j];
            if (denom == 0.0) continue;
            consider((beta[i] - ni - sign * (beta[j] - nj)) / denom);
          }
  return best;
}


// Cell partition of [-R, R] on which every orbit component moves by < 1/4.
std::pair<long, double> line_cells(const VectorXd& col, double R, int ball_points) {
  const double lip = col.cwiseAbs().maxCoeff();
  const double cell = std::min(2.0 * R / ball_points, 0.25 / lip);
  const long cells = static_cast<long>(std::ceil(2.0 * R / cell));
  return {cells, 2.0 * R / static_cast<double>(cells)};
}

}  // namespace

std::vector<NearReturn> near_returns(const WindingMatrix& W, const VectorXd& beta, double R,
                                     int count, const SigmaConfig& cfg) {
  const MatrixXd& M = W.matrix();
  const int d = W.dim();
  std::vector<NearReturn> best;
  auto offer = [&](double gap, const VectorXd& z, double cell) {
    if (static_cast<int>(best.size()) == count && gap >= best.back().gap) return;
    auto pos = std::upper_bound(best.begin(), best.end(), gap,
                                [](double g, const NearReturn& r) { return g < r.gap; });
    best.insert(pos, NearReturn{z, gap, cell});
    if (static_cast<int>(best.size()) > count) best.pop_back();
  };
  auto bar = [&] {
    return static_cast<int>(best.size()) < count ? std::numeric_limits<double>::infinity()
                                                 : best.back().gap;
  };
  if (d == 1) {
    const VectorXd col = M.col(0);
    const double lip = col.cwiseAbs().maxCoeff();
    const auto [cells, h] = line_cells(col, R, cfg.ball_points);
    VectorXd z(1);
    for (long c = 0; c < cells; ++c) {
      const double s0 = -R + h * static_cast<double>(c);
      double q0 = 0.0;
      for (Index i = 0; i < col.size(); ++i) q0 = std::max(q0, dist_to_int(beta[i] - col[i] * s0));
      if (q0 - lip * h >= bar()) continue;  // Lipschitz pruning
      const auto [gap, s] = cell_minimum(col, beta, s0, s0 + h);
      z[0] = s;
      offer(gap, z, h);
    }
    return best;
  }
  const double step = 2.0 * R / cfg.ball_points;
  for_each_ball_point(d, R, cfg.ball_points,
                      [&](const VectorXd& z) { offer(torus_gap(M, beta, z), z, step); });
  return best;
}

long near_return_resolution(const WindingMatrix& W, double R, const SigmaConfig& cfg) {
  if (W.dim() == 1) return line_cells(W.matrix().col(0), R, cfg.ball_points).first;
  return ball_lattice_size(W.dim(), R, cfg.ball_points);
}

double sigma_inf(const WindingMatrix& W, const VectorXd& beta, double R, const SigmaConfig& cfg) {
  if (W.dim() == 1) return near_returns(W, beta, R, 1, cfg).front().gap;
  const MatrixXd& M = W.matrix();
  auto objective = [&](const VectorXd& z) { return torus_gap(M, beta, z); };
  return ball_minimize(W.dim(), R, cfg.ball_points, cfg.refine_iters, objective).value;
}

RhoEstimate sigma(const WindingMatrix& M, double R, const SigmaConfig& cfg) {
  if (!(R >= 1.0)) throw ValidationError("sigma: R must be >= 1");
  if (cfg.torus_points < 2 || cfg.ball_points < 2)
    throw ValidationError("sigma: sample counts must be >= 2");
  M.require_nonresonant();
  count_work();
  const int m = M.torus_dim();
  double sup = 0.0;
  for_each_torus_point(m, cfg.torus_points, [&](const VectorXd& beta) {
    sup = std::max(sup, sigma_inf(M, beta, R, cfg));
  });
  RhoEstimate est;
  est.kind = EstimateKind::sigma;
  est.k = 0;
  est.R = R;
  est.value = sup;
  long ty = 1;
  for (int i = 0; i < m; ++i) ty *= cfg.torus_points;
  est.res_y = ty;
  if (M.dim() == 1) {
    est.res_z = near_return_resolution(M, R, cfg);
    est.direction = BoundDirection::lower_bound;  // exact inner infimum
  } else {
    est.res_z = near_return_resolution(M, R, cfg);
    est.direction = BoundDirection::two_sided_unresolved;
  }
  return est;
}

}  // namespace aplab

#include "aplab/heat.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>

namespace aplab {

FrequencyField::FrequencyField(QuasiperiodicField field) : field_(std::move(field)) {
  const auto xi = field_.frequencies();
  const auto& terms = field_.lifted().terms();
  constexpr double tol = 1e-12;
  for (std::size_t a = 0; a < xi.size(); ++a) {
    if (terms[a].k.isZero()) continue;
    if (xi[a].norm() <= tol)
      throw ValidationError("FrequencyField: a nonzero mode has zero physical frequency");
    for (std::size_t b = a + 1; b < xi.size(); ++b) {
      if (terms[b].k.isZero()) continue;
      if ((xi[a] - xi[b]).norm() <= tol || (xi[a] + xi[b]).norm() <= tol)
        throw ValidationError("FrequencyField: two modes share a physical frequency");
    }
  }
}

std::vector<FrequencyMode> FrequencyField::modes() const {
  const auto xi = field_.frequencies();
  std::vector<FrequencyMode> out;
  const auto& terms = field_.lifted().terms();
  for (std::size_t i = 0; i < terms.size(); ++i) out.push_back({xi[i], terms[i].c, terms[i].s});
  return out;
}

double heat_kernel(const VectorXd& x, double t) {
  if (!(t > 0.0)) throw ValidationError("heat_kernel: t must be > 0");
  const double d = static_cast<double>(x.size());
  return std::pow(4.0 * kPi * t, -0.5 * d) * std::exp(-x.squaredNorm() / (4.0 * t));
}

double hermite(int n, double t) {
  if (n < 0) throw ValidationError("hermite: n must be >= 0");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * t;
  for (int j = 1; j < n; ++j) {
    const double next = 2.0 * t * cur - 2.0 * j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace {

// Eigenvalues of the symmetric Jacobi matrix with the given off-diagonal.
VectorXd jacobi_eigen(const VectorXd& off, MatrixXd* vectors) {
  const Index n = off.size() + 1;
  MatrixXd J = MatrixXd::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = off[i];
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(J);
  if (vectors) *vectors = es.eigenvectors();
  return es.eigenvalues();
}

}  // namespace

VectorXd hermite_zeros(int n) {
  if (n <= 0) return VectorXd(0);
  if (n == 1) return VectorXd::Zero(1);
  VectorXd off(n - 1);
  for (int i = 1; i < n; ++i) off[i - 1] = std::sqrt(0.5 * i);
  return jacobi_eigen(off, nullptr);
}

std::pair<VectorXd, VectorXd> gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: n must be >= 1");
  if (n == 1) return {VectorXd::Zero(1), VectorXd::Constant(1, 2.0)};
  VectorXd off(n - 1);
  for (int i = 1; i < n; ++i) off[i - 1] = i / std::sqrt(4.0 * i * i - 1.0);
  MatrixXd V;
  VectorXd nodes = jacobi_eigen(off, &V);
  VectorXd weights(n);
  for (int i = 0; i < n; ++i) weights[i] = 2.0 * V(0, i) * V(0, i);
  return {nodes, weights};
}

double grad_heat_l1(int n, double t, int d) {
  if (n < 0) throw ValidationError("grad_heat_l1: n must be >= 0");
  if (!(t > 0.0)) throw ValidationError("grad_heat_l1: t must be > 0");
  if (d < 1 || d > 3) throw GuardError("grad_heat_l1: d must lie in [1, 3]");
  count_work();

  // In s = x / (2 sqrt t): d^n/dx^n of the Gaussian factor is
  // (-1)^n (2 sqrt t)^{-n} H_n(s) times the factor itself.
  const double S = std::sqrt(2.0 * n + 1.0) + 6.5;
  std::vector<double> breaks{-S, S};
  for (int j = 1; j <= n; ++j)
    for (Index i = 0; i < hermite_zeros(j).size(); ++i) breaks.push_back(hermite_zeros(j)[i]);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-13; }),
               breaks.end());
  // The max over multi-indices has kinks off the panel grid in d >= 2.
  const double max_width = d == 1 ? 0.25 : (d == 2 ? 0.125 : 0.5);
  const int order = d == 1 ? 10 : 4;
  const auto [gx, gw] = gauss_legendre(order);

  std::vector<double> nodes, weights;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double a = breaks[b], c = breaks[b + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil((c - a) / max_width)));
    const double h = (c - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
      const double lo = a + p * h;
      for (int q = 0; q < order; ++q) {
        const double s = lo + 0.5 * h * (gx[q] + 1.0);
        nodes.push_back(s);
        weights.push_back(0.5 * h * gw[q] * std::exp(-s * s) / std::sqrt(kPi));
      }
    }
  }
  const std::size_t N = nodes.size();
  // H[j * N + p] = |H_j(s_p)|
  std::vector<double> H(static_cast<std::size_t>(n + 1) * N);
  for (std::size_t p = 0; p < N; ++p)
    for (int j = 0; j <= n; ++j) H[static_cast<std::size_t>(j) * N + p] = std::abs(hermite(j, nodes[p]));
  auto h = [&](int j, std::size_t p) { return H[static_cast<std::size_t>(j) * N + p]; };

  double integral = 0.0;
  if (d == 1) {
    for (std::size_t p = 0; p < N; ++p) integral += weights[p] * h(n, p);
  } else if (d == 2) {
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = 0; q < N; ++q) {
        double best = 0.0;
        for (int a = 0; a <= n; ++a) best = std::max(best, h(a, p) * h(n - a, q));
        integral += weights[p] * weights[q] * best;
      }
  } else {
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = 0; q < N; ++q)
        for (std::size_t r = 0; r < N; ++r) {
          double best = 0.0;
          for (int a = 0; a <= n; ++a)
            for (int b = 0; a + b <= n; ++b) best = std::max(best, h(a, p) * h(b, q) * h(n - a - b, r));
          integral += weights[p] * weights[q] * weights[r] * best;
        }
  }
  return std::pow(2.0 * std::sqrt(t), -n) * integral;
}

double fit_heat_l1_constant(const std::vector<double>& values) {
  double C = 0.0;
  for (std::size_t n = 1; n < values.size(); ++n)
    C = std::max(C, std::pow(values[n], 2.0 / static_cast<double>(n)) / (1.0 + static_cast<double>(n)));
  return C;
}

FrequencyField heat_evolve(const FrequencyField& f, double t) {
  if (!(t >= 0.0)) throw ValidationError("heat_evolve: t must be >= 0");
  const auto& W = f.field().winding();
  std::vector<TrigTerm> terms;
  for (const auto& term : f.field().lifted().terms()) {
    const VectorXd xi = W.matrix().transpose() * term.k.cast<double>();
    const double decay = std::exp(-4.0 * kPi * kPi * xi.squaredNorm() * t);
    terms.push_back({term.k, term.c * decay, term.s * decay});
  }
  return FrequencyField(QuasiperiodicField(W, TrigPolynomial(W.torus_dim(), std::move(terms))));
}

namespace {

long lattice_size(int m, int n) {
  long total = 1;
  for (int i = 0; i < m; ++i) total *= n;
  return total;
}

}  // namespace

Sampled osc(const FrequencyField& f, int n_per_dim) {
  if (n_per_dim < 2) throw ValidationError("osc: need at least 2 points per dimension");
  const auto& W = f.field().winding();
  W.require_nonresonant();
  Sampled out;
  out.resolution = lattice_size(W.torus_dim(), n_per_dim);
  if (f.field().lifted().empty()) return out;
  const VectorXd v = f.field().lifted().sample_lattice(n_per_dim);
  out.value = v.maxCoeff() - v.minCoeff();
  return out;
}

Sampled grad_sup(const FrequencyField& f, int n_per_dim) {
  if (n_per_dim < 2) throw ValidationError("grad_sup: need at least 2 points per dimension");
  const auto& W = f.field().winding();
  W.require_nonresonant();
  const int m = W.torus_dim();
  Sampled out;
  out.resolution = lattice_size(m, n_per_dim);
  if (f.field().lifted().empty()) return out;
  MatrixXd D(out.resolution, m);
  for (int i = 0; i < m; ++i) {
    const auto di = f.field().lifted().derivative(i);
    D.col(i) = di.empty() ? VectorXd::Zero(out.resolution) : di.sample_lattice(n_per_dim);
  }
  const MatrixXd G = D * W.matrix();  // rows: (M^t grad F)^t
  out.value = G.rowwise().norm().maxCoeff();
  return out;
}

ErgodicReport ergodic_bound_check(const FrequencyField& f, const std::vector<double>& t_list,
                                  int k, const std::vector<double>& R_list,
                                  const ErgodicFitConfig& cfg) {
  if (k < 1) throw ValidationError("ergodic_bound_check: k must be >= 1");
  if (t_list.empty() || R_list.empty())
    throw ValidationError("ergodic_bound_check: empty t or R list");
  for (double t : t_list)
    if (!(t >= k)) throw GuardError("ergodic_bound_check: every t must be >= k");
  for (double R : R_list)
    if (!(R >= 1.0)) throw ValidationError("ergodic_bound_check: every R must be >= 1");
  if (k > cfg.search.max_k) throw GuardError("ergodic_bound_check: k exceeds the search guard");
  f.field().winding().require_nonresonant();

  ErgodicReport rep;
  rep.k = k;
  for (double R : R_list) rep.omega_values.push_back(omega_k(f.field(), R, k, cfg.search).value);
  rep.l1_sup = ball_l1_sup(f.field(), cfg.quad_points, cfg.l1_torus_points);

  std::vector<double> lhs_osc, lhs_grad;
  for (double t : t_list) {
    const auto u = heat_evolve(f, t);
    lhs_osc.push_back(osc(u, cfg.torus_points).value);
    lhs_grad.push_back(grad_sup(u, cfg.torus_points).value);
  }

  // min over R of the bracket, and its argmin.
  auto bracket = [&](double t, double c, bool gradient) {
    double best = std::numeric_limits<double>::infinity();
    double arg = R_list.front();
    for (std::size_t r = 0; r < R_list.size(); ++r) {
      const double R = R_list[r];
      const double w = gradient ? rep.omega_values[r] / std::sqrt(t) : rep.omega_values[r];
      const double v = w + std::exp(-c * t / (k * R * R)) * rep.l1_sup;
      if (v < best) {
        best = v;
        arg = R;
      }
    }
    return std::pair{best, arg};
  };
  auto needed_C = [&](double c, bool gradient) {
    const auto& lhs = gradient ? lhs_grad : lhs_osc;
    double ratio = 0.0;
    for (std::size_t i = 0; i < t_list.size(); ++i) {
      const double rhs = bracket(t_list[i], c, gradient).first;
      if (lhs[i] <= 0.0) continue;
      ratio = rhs > 0.0 ? std::max(ratio, lhs[i] / rhs) : std::numeric_limits<double>::infinity();
    }
    return std::pow(ratio, 1.0 / k);
  };

  std::vector<double> grid = cfg.c_grid;
  if (grid.empty())
    for (int i = 0; i <= 30; ++i) grid.push_back(std::pow(10.0, -3.0 + 0.1 * i));
  std::sort(grid.begin(), grid.end());

  double chosen = grid.front();
  double best_worst = std::numeric_limits<double>::infinity();
  bool within = false;
  for (double c : grid) {
    const double worst = std::max(needed_C(c, false), needed_C(c, true));
    if (worst <= cfg.C_cap) {
      chosen = c;  // C is nondecreasing in c; keep the largest admissible
      within = true;
    } else if (!within && worst < best_worst) {
      best_worst = worst;
      chosen = c;
    }
  }
  rep.fitted_c = chosen;
  rep.fitted_C = needed_C(chosen, false);
  rep.fitted_C_grad = needed_C(chosen, true);
  rep.holds = within;

  for (std::size_t i = 0; i < t_list.size(); ++i) {
    ErgodicRow row;
    row.t = t_list[i];
    row.lhs_osc = lhs_osc[i];
    const auto [b, arg] = bracket(row.t, chosen, false);
    row.rhs_min = std::pow(rep.fitted_C, k) * b;
    row.argmin_R = arg;
    row.lhs_grad = lhs_grad[i];
    row.rhs_grad = std::pow(rep.fitted_C_grad, k) * bracket(row.t, chosen, true).first;
    rep.rows.push_back(row);
  }
  return rep;
}

double multiscale_poincare_rhs(const FrequencyField& u, const PoincareQuadrature& q) {
  if (!(q.t_min > 0.0) || !(q.t_max > q.t_min) || q.nodes < 2 || q.torus_points < 2)
    throw ValidationError("multiscale_poincare_rhs: invalid quadrature");
  const auto& W = u.field().winding();
  W.require_nonresonant();
  count_work();
  const int m = W.torus_dim();

  std::vector<double> lambda, amp;
  std::vector<VectorXd> samples;
  for (const auto& term : u.field().lifted().terms()) {
    if (term.k.isZero()) continue;
    const VectorXd xi = W.matrix().transpose() * term.k.cast<double>();
    lambda.push_back(4.0 * kPi * kPi * xi.squaredNorm());
    amp.push_back(std::hypot(term.c, term.s));
    samples.push_back(TrigPolynomial(m, {term}).sample_lattice(q.torus_points));
  }
  if (lambda.empty()) return 0.0;

  const double u0 = std::log(q.t_min), u1 = std::log(q.t_max);
  const double du = (u1 - u0) / (q.nodes - 1);
  VectorXd combined(samples.front().size());
  std::vector<double> g(static_cast<std::size_t>(q.nodes));
  for (int i = 0; i < q.nodes; ++i) {
    const double t = std::exp(u0 + du * i);
    combined.setZero();
    for (std::size_t j = 0; j < lambda.size(); ++j)
      combined += lambda[j] * std::exp(-lambda[j] * t) * samples[j];
    g[static_cast<std::size_t>(i)] = combined.cwiseAbs().maxCoeff() * t;  // dt = t du
  }
  // Trapezoid in log t, plus |T_h - T_2h| as an allowance that over-covers
  // the trapezoid error (the coarse rule finishes with one fine panel when
  // the panel count is odd).
  const int last = q.nodes - 1;
  double fine = 0.0, coarse = 0.0;
  for (int i = 0; i < last; ++i) fine += 0.5 * du * (g[i] + g[i + 1]);
  int i = 0;
  for (; i + 2 <= last; i += 2) coarse += du * (g[i] + g[i + 2]);
  if (i < last) coarse += 0.5 * du * (g[i] + g[last]);
  double integral = fine + std::abs(fine - coarse);
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    integral += amp[j] * (1.0 - std::exp(-lambda[j] * q.t_min));
    integral += amp[j] * std::exp(-lambda[j] * q.t_max);
  }
  return 2.0 * integral;
}

}  // namespace aplab

#include "aplab/homog.hpp"

#include "aplab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aplab {

VectorXd cube_point(const PeriodicGrid& g, long idx) {
  return g.point(idx).array() + 0.5;
}

namespace {

bool in_closed_cube(const PeriodicGrid& g, long idx) {
  const double tol = 1e-12;
  for (int a = 0; a < g.dim(); ++a) {
    const double x = g.coord(g.axis_index(idx, a)) + 0.5;
    if (x < -tol || x > 1.0 + tol) return false;
  }
  return true;
}

bool in_open_cube(const PeriodicGrid& g, long idx) {
  const double tol = 1e-12;
  for (int a = 0; a < g.dim(); ++a) {
    const double x = g.coord(g.axis_index(idx, a)) + 0.5;
    if (x < tol || x > 1.0 - tol) return false;
  }
  return true;
}

bool in_box(const PeriodicGrid& g, long idx, const InteriorBox& V) {
  for (int a = 0; a < g.dim(); ++a) {
    const double x = g.coord(g.axis_index(idx, a)) + 0.5;
    if (x < V.lo[a] - 1e-12 || x > V.hi[a] + 1e-12) return false;
  }
  return true;
}

// W^{1,p} norm over the nodes (values) and forward faces (gradients) whose
// endpoints satisfy `inside`.
template <typename Inside>
double w1p_norm(const PeriodicGrid& g, const VectorXd& w, double p, Inside&& inside) {
  const double vol = std::pow(g.h(), g.dim());
  double sum = 0.0;
  for (long idx = 0; idx < g.size(); ++idx) {
    if (!inside(idx)) continue;
    sum += std::pow(std::abs(w[idx]), p) * vol;
    for (int a = 0; a < g.dim(); ++a) {
      const long q = g.neighbor(idx, a, 1);
      if (!inside(q)) continue;
      sum += std::pow(std::abs((w[q] - w[idx]) / g.h()), p) * vol;
    }
  }
  return std::pow(sum, 1.0 / p);
}

}  // namespace

EffectiveMatrix effective_matrix(const CoefficientField& a, double eps, const PeriodicGrid& grid,
                                 const SolveConfig& cfg) {
  const int d = a.dim();
  if (grid.dim() != d) throw ValidationError("effective_matrix: dimension mismatch");
  EffectiveMatrix out;
  out.abar = MatrixXd::Zero(d, d);
  out.eps = eps;
  out.h = grid.h();
  out.L = grid.side();
  const CorrectorOperator A(a, grid, eps);
  for (int j = 0; j < d; ++j) {
    VectorXd e = VectorXd::Zero(d);
    e[j] = 1.0;
    const CorrectorResult r = solve_corrector(a, e, eps, grid, cfg);
    out.abar.col(j) = A.mean_flux(e, r.phi.values());
    out.residuals.push_back(r.residual);
  }
  const MatrixXd sym = 0.5 * (out.abar + out.abar.transpose());
  const VectorXd ev = Eigen::SelfAdjointEigenSolver<MatrixXd>(sym).eigenvalues();
  out.elliptic = ev.minCoeff() >= 1.0 - 1e-9 && ev.maxCoeff() <= a.lambda() + 1e-9;
  return out;
}

double harmonic_mean(const CoefficientField& a, int n_per_dim) {
  if (a.dim() != 1) throw ValidationError("harmonic_mean: one-dimensional fields only");
  if (n_per_dim < 2) throw ValidationError("harmonic_mean: need at least 2 points per dimension");
  const QuasiperiodicField f = a.entry(0, 0);
  const VectorXd values = f.lifted().sample_lattice(n_per_dim);
  return 1.0 / values.cwiseInverse().mean();
}

double arithmetic_mean(const CoefficientField& a) {
  if (a.dim() != 1) throw ValidationError("arithmetic_mean: one-dimensional fields only");
  return a.entry(0, 0).mean();
}

BoundaryData BoundaryData::affine(double c, const VectorXd& b) {
  BoundaryData g;
  g.constant = c;
  g.linear = b;
  g.quadratic = MatrixXd::Zero(b.size(), b.size());
  return g;
}

double BoundaryData::operator()(const VectorXd& x) const {
  double v = constant;
  if (linear.size() == x.size()) v += linear.dot(x);
  if (quadratic.rows() == x.size() && quadratic.cols() == x.size()) v += x.dot(quadratic * x);
  return v;
}

PeriodicGrid dirichlet_grid(int d, long n) {
  return PeriodicGrid(d, 2.0, n, std::numeric_limits<double>::infinity());
}

GridField dirichlet_solve(const CoefficientField& a, const BoundaryData& g, const PeriodicGrid& grid,
                          const SolveConfig& cfg) {
  const int d = grid.dim();
  if (a.dim() != d) throw ValidationError("dirichlet_solve: dimension mismatch");
  if (grid.side() != 2.0 || grid.n() < 8)
    throw ValidationError("dirichlet_solve: grid must be the box of side 2 with n >= 8");
  std::vector<char> pinned(static_cast<std::size_t>(grid.size()));
  VectorXd boundary = VectorXd::Zero(grid.size());
  for (long idx = 0; idx < grid.size(); ++idx) {
    pinned[static_cast<std::size_t>(idx)] = in_open_cube(grid, idx) ? 0 : 1;
    if (in_closed_cube(grid, idx) && !in_open_cube(grid, idx)) boundary[idx] = g(cube_point(grid, idx));
  }
  const CorrectorOperator A =
      CorrectorOperator::dirichlet(a.translated(VectorXd::Constant(d, 0.5)), grid, std::move(pinned));
  // Unknowns vanish on pinned nodes; the boundary values enter the rhs.
  const VectorXd zero_e = VectorXd::Zero(d);
  VectorXd b = flux_divergence(A.coefficients(), grid, zero_e, boundary);
  for (long idx = 0; idx < grid.size(); ++idx)
    if (A.is_pinned(idx)) b[idx] = 0.0;
  const KrylovResult k = solve_operator(A, b, cfg);
  if (!k.converged)
    throw ConvergenceError("dirichlet_solve: solver stopped at relative residual " +
                           std::to_string(k.residual) + " after " + std::to_string(k.iterations) +
                           " iterations");
  return GridField(grid, k.x + boundary);
}

RateReport dirichlet_rate(const CoefficientField& a, const MatrixXd& abar, const BoundaryData& g,
                          const std::vector<double>& eps_list, const DirichletConfig& cfg) {
  const int d = a.dim();
  if (d < 1 || d > 2) throw ValidationError("dirichlet_rate: d must be 1 or 2");
  if (eps_list.empty()) throw ValidationError("dirichlet_rate: empty eps list");
  for (double eps : eps_list)
    if (!(eps > 0.0) || eps > 1.0) throw ValidationError("dirichlet_rate: eps must lie in (0, 1]");
  if (abar.rows() != d || abar.cols() != d) throw ValidationError("dirichlet_rate: abar has wrong shape");
  if (!(cfg.p >= 1.0)) throw ValidationError("dirichlet_rate: p must be >= 1");
  if ((g.linear.size() != 0 && g.linear.size() != d) ||
      (g.quadratic.size() != 0 && (g.quadratic.rows() != d || g.quadratic.cols() != d)))
    throw ValidationError("dirichlet_rate: boundary data has wrong dimension");
  if (!(cfg.solve.tol > 0.0) || cfg.solve.tol > 1e-6)
    throw ValidationError("dirichlet_rate: tol must lie in (0, 1e-6]");
  long n = cfg.n;
  if (n == 0) {
    const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
    n = 64;
    while (2.0 / static_cast<double>(n) > eps_min / 16.0) n *= 2;
  }
  const PeriodicGrid grid = dirichlet_grid(d, n);

  VectorXd u_hom(grid.size());
  if (cfg.exact_homogenized) {
    for (long idx = 0; idx < grid.size(); ++idx)
      u_hom[idx] = in_closed_cube(grid, idx) ? cfg.exact_homogenized(cube_point(grid, idx)) : 0.0;
  } else {
    const double lambda = std::max(1.0, abar.norm());
    u_hom = dirichlet_solve(CoefficientField::constant(abar, lambda), g, grid, cfg.solve).values();
  }

  RateReport out;
  std::vector<double> xs, ys;
  const auto inside = [&](long idx) { return in_closed_cube(grid, idx); };
  for (double eps : eps_list) {
    const GridField u = dirichlet_solve(a.scaled(1.0 / eps), g, grid, cfg.solve);
    const VectorXd w = u.values() - u_hom;
    RateRow row;
    row.eps = eps;
    row.h = grid.h();
    for (long idx = 0; idx < grid.size(); ++idx)
      if (inside(idx)) row.err_Linf = std::max(row.err_Linf, std::abs(w[idx]));
    row.err_W1p = w1p_norm(grid, w, cfg.p, inside);
    row.under_resolved = grid.h() > eps / 8.0 * (1.0 + 1e-12);
    xs.push_back(eps);
    ys.push_back(row.err_Linf);
    const LogLogFit partial = loglog_fit(xs, ys);
    row.slope_so_far = partial.valid ? partial.slope : std::numeric_limits<double>::quiet_NaN();
    out.rows.push_back(row);
  }
  double scale = 1.0;
  for (long idx = 0; idx < grid.size(); ++idx)
    if (inside(idx)) scale = std::max(scale, std::abs(u_hom[idx]));
  out.degenerate = std::all_of(ys.begin(), ys.end(), [&](double e) { return e <= 1e-9 * scale; });
  if (!out.degenerate) out.fit = loglog_fit(xs, ys);
  return out;
}

double two_scale_error(const GridField& u_eps, const GridField& u_hom, const GridField& Phi,
                       double eps, const InteriorBox& V, double p) {
  const PeriodicGrid& g = u_eps.grid();
  const int d = g.dim();
  if (!(u_hom.grid() == g) || !(Phi.grid() == g))
    throw ValidationError("two_scale_error: fields live on different grids");
  if (Phi.components() != d) throw ValidationError("two_scale_error: Phi needs d components");
  if (V.lo.size() != d || V.hi.size() != d) throw ValidationError("two_scale_error: box has wrong dimension");
  for (int a = 0; a < d; ++a)
    if (V.lo[a] < 0.1 - 1e-12 || V.hi[a] > 0.9 + 1e-12 || !(V.hi[a] > V.lo[a]))
      throw ValidationError("two_scale_error: V must lie in [0.1, 0.9]^d");
  if (!(p >= 1.0)) throw ValidationError("two_scale_error: p must be >= 1");
  if (!(eps > 0.0)) throw ValidationError("two_scale_error: eps must be positive");
  const double h = g.h();
  VectorXd w = u_eps.values() - u_hom.values();
  for (long idx = 0; idx < g.size(); ++idx) {
    if (!in_box(g, idx, V)) continue;
    for (int a = 0; a < d; ++a) {
      const double grad = (u_hom(g.neighbor(idx, a, 1)) - u_hom(g.neighbor(idx, a, -1))) / (2.0 * h);
      w[idx] -= eps * grad * Phi(idx, a);
    }
  }
  return w1p_norm(g, w, p, [&](long idx) { return in_box(g, idx, V); });
}

GridField corrector_profile_1d(const CoefficientField& a, double abar, double eps,
                               const PeriodicGrid& grid) {
  if (a.dim() != 1 || grid.dim() != 1) throw ValidationError("corrector_profile_1d: d must be 1");
  if (!(eps > 0.0) || !(abar > 0.0)) throw ValidationError("corrector_profile_1d: eps, abar must be positive");
  const QuasiperiodicField f = a.entry(0, 0);
  const auto [nodes, weights] = gauss_legendre(8);
  // int over [y0, y1] of abar / a(s) - 1, split into panels of length <= 1/16.
  auto integral = [&](double y0, double y1) {
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(y1 - y0) * 16.0)));
    const double width = (y1 - y0) / panels;
    double s = 0.0;
    VectorXd y(1);
    for (int k = 0; k < panels; ++k) {
      const double mid = y0 + (k + 0.5) * width;
      for (Index q = 0; q < nodes.size(); ++q) {
        y[0] = mid + 0.5 * width * nodes[q];
        s += 0.5 * width * weights[q] * (abar / f(y) - 1.0);
      }
    }
    return s;
  };
  const long n = grid.n();
  GridField out(grid);
  // Node j sits at the cube coordinate coord(j) + 1/2; start from x = 0.
  const long origin = n / 4;
  auto x = [&](long j) { return (grid.coord(j) + 0.5) / eps; };
  for (long j = origin + 1; j < n; ++j) out(j) = out(j - 1) + integral(x(j - 1), x(j));
  for (long j = origin - 1; j >= 0; --j) out(j) = out(j + 1) - integral(x(j), x(j + 1));
  double mean = 0.0;
  long count = 0;
  for (long j = 0; j < n; ++j)
    if (grid.coord(j) + 0.5 >= -1e-12 && grid.coord(j) + 0.5 <= 1.0 + 1e-12) {
      mean += out(j);
      ++count;
    }
  out.values().array() -= mean / static_cast<double>(count);
  return out;
}

}  // namespace aplab

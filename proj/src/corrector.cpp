#include "aplab/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aplab {

namespace {

bool identically_zero(const QuasiperiodicField& f) {
  for (const auto& t : f.lifted().terms())
    if (t.c != 0.0 || t.s != 0.0) return false;
  return true;
}

// Neighbour one step forward (+1) or backward (-1) along an axis.
inline long step(const PeriodicGrid& g, long idx, int axis, int dir) {
  const long s = g.stride(axis);
  const long j = (idx / s) % g.n();
  if (dir > 0) return j == g.n() - 1 ? idx - (g.n() - 1) * s : idx + s;
  return j == 0 ? idx + (g.n() - 1) * s : idx - s;
}

// Calls fn(p, q) for every face (p, q = p + e_axis, wrapped) of the grid.
template <typename Fn>
void for_each_face(const PeriodicGrid& g, int axis, Fn&& fn) {
  const long s = g.stride(axis), n = g.n(), block = s * n;
  for (long base = 0; base < g.size(); base += block)
    for (long j = 0; j < n; ++j) {
      const long row = base + j * s;
      const long next = j == n - 1 ? base : row + s;
      for (long t = 0; t < s; ++t) fn(row + t, next + t);
    }
}

// Corner node indices of the cell with lower corner idx; bit a of the
// position selects the +1 step along axis a.
void cell_corners(const PeriodicGrid& g, long idx, long* corners) {
  const int d = g.dim();
  corners[0] = idx;
  for (int a = 0; a < d; ++a) {
    const int half = 1 << a;
    for (int o = 0; o < half; ++o) corners[o | half] = step(g, corners[o], a, +1);
  }
}

double window_sup(const PeriodicGrid& g, const VectorXd& v, double window) {
  double s = 0.0;
  for (long i = 0; i < g.size(); ++i)
    if (g.in_window(i, window)) s = std::max(s, std::abs(v[i]));
  return s;
}

void require_unit(const VectorXd& e, int d, const char* who) {
  if (e.size() != d) throw ValidationError(std::string(who) + ": direction has wrong dimension");
  if (std::abs(e.norm() - 1.0) > 1e-12)
    throw ValidationError(std::string(who) + ": direction must be a unit vector");
}

void require_solve_config(const SolveConfig& cfg) {
  if (!(cfg.tol > 0.0) || cfg.tol > 1e-6) throw ValidationError("solve: tol must lie in (0, 1e-6]");
  if (cfg.max_iters < 0) throw ValidationError("solve: max_iters must be >= 0");
  if (!(cfg.window > 0.0) || cfg.window > 1.0)
    throw ValidationError("solve: window must lie in (0, 1]");
}

void require_eps(double eps, const PeriodicGrid& grid) {
  if (!(eps > 0.0) || eps > 1.0) throw ValidationError("corrector: eps must lie in (0, 1]");
  if (eps * grid.side() < 8.0 * (1.0 - 1e-12))
    throw ValidationError("corrector: box too small, need eps * L >= 8");
}

}  // namespace

DiscreteCoefficients DiscreteCoefficients::sample(const CoefficientField& a,
                                                  const PeriodicGrid& grid) {
  const int d = grid.dim();
  if (a.dim() != d) throw ValidationError("coefficients: dimension mismatch with grid");
  DiscreteCoefficients out;
  for (int i = 0; i < d; ++i) {
    VectorXd offset = VectorXd::Zero(d);
    offset[i] = 0.5;
    out.diagonal.push_back(sample_on_grid(a.entry(i, i), grid, offset));
  }
  const VectorXd centre = VectorXd::Constant(d, 0.5);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      const QuasiperiodicField f = a.entry(i, j);
      if (identically_zero(f)) continue;
      out.off.push_back({i, j, sample_on_grid(f, grid, centre)});
    }
  return out;
}

DiscreteCoefficients DiscreteCoefficients::combined(const DiscreteCoefficients& other,
                                                    double scale) const {
  if (diagonal.size() != other.diagonal.size())
    throw ValidationError("coefficients: dimension mismatch");
  DiscreteCoefficients out;
  for (std::size_t i = 0; i < diagonal.size(); ++i)
    out.diagonal.push_back(scale * (diagonal[i] - other.diagonal[i]));
  // Union of the off-diagonal patterns.
  auto find = [](const std::vector<OffDiagonal>& v, int i, int j) -> const OffDiagonal* {
    for (const auto& o : v)
      if (o.i == i && o.j == j) return &o;
    return nullptr;
  };
  const long size = diagonal.empty() ? 0 : diagonal[0].size();
  const int d = static_cast<int>(diagonal.size());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const OffDiagonal* p = find(off, i, j);
      const OffDiagonal* q = find(other.off, i, j);
      if (!p && !q) continue;
      VectorXd v = VectorXd::Zero(size);
      if (p) v += p->values;
      if (q) v -= q->values;
      out.off.push_back({i, j, scale * v});
    }
  return out;
}

bool DiscreteCoefficients::symmetric() const {
  for (const auto& o : off) {
    bool matched = false;
    for (const auto& t : off)
      if (t.i == o.j && t.j == o.i) {
        matched = (t.values - o.values).cwiseAbs().maxCoeff() == 0.0;
        break;
      }
    if (!matched) return false;
  }
  return true;
}

VectorXd flux_divergence(const DiscreteCoefficients& c, const PeriodicGrid& grid,
                         const VectorXd& e, const VectorXd& v) {
  const int d = grid.dim();
  const long N = grid.size();
  const double h = grid.h();
  const bool has_v = v.size() != 0;
  VectorXd out = VectorXd::Zero(N);
  for (int i = 0; i < d; ++i) {
    const VectorXd& ci = c.diagonal[static_cast<std::size_t>(i)];
    const double ei = e[i];
    for_each_face(grid, i, [&](long p, long q) {
      const double grad = ei + (has_v ? (v[q] - v[p]) / h : 0.0);
      const double F = ci[p] * grad / h;
      out[p] += F;
      out[q] -= F;
    });
  }
  if (c.off.empty()) return out;
  const int corners_count = 1 << d;
  const double w = 1.0 / (static_cast<double>(corners_count / 2) * h);
  std::vector<long> q(static_cast<std::size_t>(corners_count));
  VectorXd grad(d), flux(d);
  for (long p = 0; p < N; ++p) {
    cell_corners(grid, p, q.data());
    for (int j = 0; j < d; ++j) {
      double g = 0.0;
      if (has_v)
        for (int o = 0; o < corners_count; ++o)
          if (!(o & (1 << j))) g += v[q[static_cast<std::size_t>(o | (1 << j))]] - v[q[static_cast<std::size_t>(o)]];
      grad[j] = e[j] + g * w;
    }
    flux.setZero();
    for (const auto& o : c.off) flux[o.i] += o.values[p] * grad[o.j];
    for (int i = 0; i < d; ++i) {
      if (flux[i] == 0.0) continue;
      const double f = flux[i] * w;
      for (int o = 0; o < corners_count; ++o) {
        if (o & (1 << i)) continue;
        out[q[static_cast<std::size_t>(o | (1 << i))]] -= f;
        out[q[static_cast<std::size_t>(o)]] += f;
      }
    }
  }
  return out;
}

CorrectorOperator::CorrectorOperator(const CoefficientField& a, const PeriodicGrid& grid,
                                     double eps)
    : CorrectorOperator((require_eps(eps, grid), DiscreteCoefficients::sample(a, grid)), grid,
                        eps, {}) {}

CorrectorOperator::CorrectorOperator(DiscreteCoefficients coeffs, PeriodicGrid grid, double eps,
                                     std::vector<char> pinned)
    : coeffs_(std::move(coeffs)), grid_(std::move(grid)), eps_(eps), pinned_(std::move(pinned)) {
  build_lines();
}

CorrectorOperator CorrectorOperator::dirichlet(const CoefficientField& a, const PeriodicGrid& grid,
                                               std::vector<char> pinned) {
  if (static_cast<long>(pinned.size()) != grid.size())
    throw ValidationError("dirichlet: mask size does not match the grid");
  if (std::none_of(pinned.begin(), pinned.end(), [](char c) { return c != 0; }))
    throw ValidationError("dirichlet: no pinned nodes");
  return CorrectorOperator(DiscreteCoefficients::sample(a, grid), grid, 0.0, std::move(pinned));
}

void CorrectorOperator::build_lines() {
  const int d = grid_.dim();
  const long N = grid_.size();
  const double h2 = grid_.h() * grid_.h();
  line_diag_ = VectorXd::Constant(N, eps_ * eps_);
  line_off_ = VectorXd::Zero(N);
  for (int i = 0; i < d; ++i) {
    const VectorXd& ci = coeffs_.diagonal[static_cast<std::size_t>(i)];
    for_each_face(grid_, i, [&](long p, long q) {
      const double c = ci[p] / h2;
      line_diag_[p] += c;
      line_diag_[q] += c;
    });
  }
  const VectorXd& last = coeffs_.diagonal[static_cast<std::size_t>(d - 1)];
  for (long p = 0; p < N; ++p) line_off_[p] = -last[p] / h2;
  if (!pinned_.empty())
    for (long p = 0; p < N; ++p) {
      if (is_pinned(p)) line_diag_[p] = 1.0;
      if (is_pinned(p) || is_pinned(step(grid_, p, d - 1, +1))) line_off_[p] = 0.0;
    }
  factor_lines();
}

// Each line along the last axis is cyclic tridiagonal; the corner coupling
// is removed by Sherman-Morrison and the remaining tridiagonal matrix is
// factored once (Thomas).
void CorrectorOperator::factor_lines() {
  const long n = grid_.n();
  const long N = grid_.size();
  super_ = VectorXd::Zero(N);
  inv_pivot_ = VectorXd::Zero(N);
  correction_ = VectorXd::Zero(N);
  const long lines = N / n;
  corner_ = VectorXd::Zero(lines);
  sm_denominator_ = VectorXd::Ones(lines);
  std::vector<double> bd(static_cast<std::size_t>(n));
  for (long line = 0; line < lines; ++line) {
    const long s0 = line * n;
    const double* diag = line_diag_.data() + s0;
    const double* off = line_off_.data() + s0;
    const double alpha = n > 2 ? off[n - 1] : 0.0;
    std::copy(diag, diag + n, bd.begin());
    const double gamma = -diag[0];
    if (alpha != 0.0) {
      bd[0] -= gamma;
      bd[static_cast<std::size_t>(n - 1)] -= alpha * alpha / gamma;
    }
    double* c = super_.data() + s0;
    double* inv = inv_pivot_.data() + s0;
    inv[0] = 1.0 / bd[0];
    c[0] = n > 1 ? off[0] * inv[0] : 0.0;
    for (long k = 1; k < n; ++k) {
      inv[k] = 1.0 / (bd[static_cast<std::size_t>(k)] - off[k - 1] * c[k - 1]);
      c[k] = k < n - 1 ? off[k] * inv[k] : 0.0;
    }
    corner_[line] = alpha;
    if (alpha == 0.0) continue;
    double* u = correction_.data() + s0;
    u[0] = gamma;
    u[n - 1] = alpha;
    thomas_line(s0, u, u);
    sm_denominator_[line] = 1.0 + u[0] + alpha * u[n - 1] / gamma;
  }
}

void CorrectorOperator::thomas_line(long s0, const double* r, double* x) const {
  const long n = grid_.n();
  const double* off = line_off_.data() + s0;
  const double* c = super_.data() + s0;
  const double* inv = inv_pivot_.data() + s0;
  x[0] = r[0] * inv[0];
  for (long k = 1; k < n; ++k) x[k] = (r[k] - off[k - 1] * x[k - 1]) * inv[k];
  for (long k = n - 2; k >= 0; --k) x[k] -= c[k] * x[k + 1];
}

void CorrectorOperator::apply(const VectorXd& v, VectorXd& out) const {
  const VectorXd zero_e = VectorXd::Zero(grid_.dim());
  if (pinned_.empty()) {
    out = eps_ * eps_ * v - flux_divergence(coeffs_, grid_, zero_e, v);
    return;
  }
  VectorXd masked = v;
  for (long p = 0; p < grid_.size(); ++p)
    if (is_pinned(p)) masked[p] = 0.0;
  out = eps_ * eps_ * masked - flux_divergence(coeffs_, grid_, zero_e, masked);
  for (long p = 0; p < grid_.size(); ++p)
    if (is_pinned(p)) out[p] = v[p];
}

void CorrectorOperator::precondition(const VectorXd& r, VectorXd& z, Preconditioner kind) const {
  if (kind == Preconditioner::jacobi) {
    z = r.cwiseQuotient(line_diag_);
    return;
  }
  const long n = grid_.n();
  z.resize(r.size());
  for (long line = 0, s0 = 0; s0 < grid_.size(); ++line, s0 += n) {
    double* x = z.data() + s0;
    thomas_line(s0, r.data() + s0, x);
    const double alpha = corner_[line];
    if (alpha == 0.0) continue;
    const double gamma = -line_diag_[s0];
    const double* u = correction_.data() + s0;
    const double fact = (x[0] + alpha * x[n - 1] / gamma) / sm_denominator_[line];
    for (long k = 0; k < n; ++k) x[k] -= fact * u[k];
  }
}

VectorXd CorrectorOperator::rhs(const VectorXd& e) const {
  if (e.size() != grid_.dim()) throw ValidationError("rhs: direction has wrong dimension");
  return flux_divergence(coeffs_, grid_, e, VectorXd());
}

VectorXd CorrectorOperator::mean_flux(const VectorXd& e, const VectorXd& v) const {
  const int d = grid_.dim();
  const long N = grid_.size();
  const double h = grid_.h();
  VectorXd out = VectorXd::Zero(d);
  for (int i = 0; i < d; ++i) {
    const VectorXd& ci = coeffs_.diagonal[static_cast<std::size_t>(i)];
    double s = 0.0;
    for_each_face(grid_, i, [&](long p, long q) { s += ci[p] * (e[i] + (v[q] - v[p]) / h); });
    out[i] = s / static_cast<double>(N);
  }
  if (coeffs_.off.empty()) return out;
  const int corners_count = 1 << d;
  const double w = 1.0 / (static_cast<double>(corners_count / 2) * h);
  std::vector<long> q(static_cast<std::size_t>(corners_count));
  VectorXd sum = VectorXd::Zero(d);
  for (long p = 0; p < N; ++p) {
    cell_corners(grid_, p, q.data());
    for (const auto& o : coeffs_.off) {
      double g = 0.0;
      for (int c = 0; c < corners_count; ++c)
        if (!(c & (1 << o.j)))
          g += v[q[static_cast<std::size_t>(c | (1 << o.j))]] - v[q[static_cast<std::size_t>(c)]];
      sum[o.i] += o.values[p] * (e[o.j] + g * w);
    }
  }
  return out + sum / static_cast<double>(N);
}

CorrectorOperator assemble_apply(const CoefficientField& a, const PeriodicGrid& grid, double eps) {
  return CorrectorOperator(a, grid, eps);
}

KrylovResult solve_operator(const CorrectorOperator& A, const VectorXd& b, const SolveConfig& cfg) {
  KrylovConfig kc;
  kc.tol = cfg.tol;
  kc.max_iters = cfg.max_iters > 0 ? cfg.max_iters : 50 * A.grid().n();
  const LinearMap op = [&](const VectorXd& x, VectorXd& y) { A.apply(x, y); };
  const LinearMap pre = [&](const VectorXd& x, VectorXd& y) { A.precondition(x, y, cfg.preconditioner); };
  const VectorXd x0 = VectorXd::Zero(b.size());
  return A.symmetric() ? pcg(op, pre, b, x0, kc) : gmres(op, pre, b, x0, kc);
}

double sup_centered_gradient(const GridField& v, double window) {
  const PeriodicGrid& g = v.grid();
  const double h = g.h();
  double s = 0.0;
  for (long p = 0; p < g.size(); ++p) {
    if (!g.in_window(p, window)) continue;
    double n2 = 0.0;
    for (int c = 0; c < v.components(); ++c)
      for (int a = 0; a < g.dim(); ++a) {
        const double dv = (v(step(g, p, a, +1), c) - v(step(g, p, a, -1), c)) / (2.0 * h);
        n2 += dv * dv;
      }
    s = std::max(s, std::sqrt(n2));
  }
  return s;
}

namespace {

void throw_unconverged(const char* who, const KrylovResult& r) {
  std::ostringstream msg;
  msg << who << ": solver stopped at relative residual " << r.residual << " after "
      << r.iterations << " iterations; history";
  const std::size_t n = r.history.size();
  const std::size_t stride = std::max<std::size_t>(1, n / 8);
  for (std::size_t i = 0; i < n; i += stride) msg << ' ' << r.history[i];
  throw ConvergenceError(msg.str());
}

CorrectorResult corrector_from(const CorrectorOperator& A, const VectorXd& e, const SolveConfig& cfg) {
  const KrylovResult k = solve_operator(A, A.rhs(e), cfg);
  if (!k.converged) throw_unconverged("solve_corrector", k);
  CorrectorResult out{GridField(A.grid(), k.x), A.eps(), e};
  out.residual = k.residual;
  out.solver_iters = k.iterations;
  out.window = cfg.window;
  out.sup_phi = out.phi.sup(cfg.window);
  out.sup_grad_phi = sup_centered_gradient(out.phi, cfg.window);
  out.mean_phi = out.phi.mean();
  return out;
}

}  // namespace

CorrectorResult solve_corrector(const CoefficientField& a, const VectorXd& e, double eps,
                                const PeriodicGrid& grid, const SolveConfig& cfg) {
  require_solve_config(cfg);
  require_unit(e, grid.dim(), "solve_corrector");
  require_eps(eps, grid);
  if (a.dim() != grid.dim()) throw ValidationError("solve_corrector: dimension mismatch");
  return corrector_from(CorrectorOperator(a, grid, eps), e, cfg);
}

LipschitzReport lipschitz_report(const CorrectorResult& r) {
  return {r.eps * r.sup_phi, r.sup_grad_phi, r.phi.grid().h()};
}

PsiResult psi(const CoefficientField& a, const VectorXd& e, double eps, const PeriodicGrid& grid,
              const SolveConfig& cfg) {
  require_solve_config(cfg);
  require_unit(e, grid.dim(), "psi");
  if (!(eps > 0.0) || 2.0 * eps > 1.0) throw ValidationError("psi: need 0 < eps <= 1/2");
  require_eps(eps, grid);
  if (a.dim() != grid.dim()) throw ValidationError("psi: dimension mismatch");
  const CorrectorOperator fine_op(a, grid, eps);
  CorrectorResult fine = corrector_from(fine_op, e, cfg);
  CorrectorResult coarse = solve_corrector(a, e, 2.0 * eps, grid, cfg);
  GridField diff(grid, fine.phi.values() - coarse.phi.values());
  // A_eps psi = 3 eps^2 phi_2eps holds exactly for the discrete solutions.
  VectorXd lhs(grid.size());
  fine_op.apply(diff.values(), lhs);
  const VectorXd target = 3.0 * eps * eps * coarse.phi.values();
  const double bnorm = fine_op.rhs(e).norm();
  const double sup_psi = diff.sup(cfg.window);
  const double residual = bnorm > 0.0 ? (lhs - target).norm() / bnorm : (lhs - target).norm();
  return PsiResult{std::move(diff), sup_psi, residual, residual <= 10.0 * cfg.tol, std::move(fine),
                   std::move(coarse)};
}

CorrectorLimit corrector_limit(const CoefficientField& a, const VectorXd& e,
                               const std::vector<double>& eps_list, const SweepConfig& cfg) {
  require_solve_config(cfg.solve);
  require_unit(e, a.dim(), "corrector_limit");
  if (eps_list.size() < 2) throw ValidationError("corrector_limit: need at least two scales");
  if (!(eps_list[0] > 0.0) || eps_list[0] > 0.5)
    throw ValidationError("corrector_limit: scales must lie in (0, 1/2]");
  for (std::size_t k = 1; k < eps_list.size(); ++k)
    if (std::abs(eps_list[k] * 2.0 - eps_list[k - 1]) > 1e-12 * eps_list[k - 1])
      throw ValidationError("corrector_limit: each scale must be half the previous one");
  if (cfg.epsL < 8.0) throw ValidationError("corrector_limit: epsL must be >= 8");

  const int d = a.dim();
  CorrectorLimit out{GridField(PeriodicGrid::for_eps(d, eps_list.back(), cfg.epsL, cfg.h_max)), {}, {}, {}, {}};
  {
    const PeriodicGrid g0 = PeriodicGrid::for_eps(d, eps_list[0], cfg.epsL, cfg.h_max);
    const CorrectorResult r0 = solve_corrector(a, e, eps_list[0], g0, cfg.solve);
    out.eps.push_back(eps_list[0]);
    out.sup_phi.push_back(r0.sup_phi);
    out.sup_grad.push_back(r0.sup_grad_phi);
  }
  double partial = 0.0;
  for (std::size_t k = 1; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    const PeriodicGrid g = PeriodicGrid::for_eps(d, eps, cfg.epsL, cfg.h_max);
    PsiResult p = psi(a, e, eps, g, cfg.solve);
    partial += p.sup_psi;
    out.table.push_back({eps, p.sup_psi, partial});
    out.eps.push_back(eps);
    out.sup_phi.push_back(p.fine.sup_phi);
    out.sup_grad.push_back(p.fine.sup_grad_phi);
    if (k + 1 == eps_list.size()) out.phi_limit = std::move(p.fine.phi);
  }
  // Geometric ratio per step: fit sup_psi against 2^k on log-log axes.
  std::vector<double> steps, val;
  for (std::size_t k = 0; k < out.table.size(); ++k) {
    steps.push_back(std::ldexp(1.0, static_cast<int>(k)));
    val.push_back(out.table[k].sup_psi);
    if (k > 0 && out.table[k].sup_psi > 2.0 * out.table[k - 1].sup_psi) out.flagged = true;
  }
  const LogLogFit fit = loglog_fit(steps, val);
  if (fit.valid) out.step_factor = std::exp2(fit.slope);
  return out;
}

ZetaCheck difference_corrector_check(const CoefficientField& a, const VectorXd& y,
                                     const VectorXd& z, const VectorXd& e, double eps,
                                     const PeriodicGrid& grid, const SolveConfig& cfg) {
  require_solve_config(cfg);
  require_unit(e, grid.dim(), "difference_corrector_check");
  require_eps(eps, grid);
  if (y.size() != grid.dim() || z.size() != grid.dim())
    throw ValidationError("difference_corrector_check: translation has wrong dimension");
  const CorrectorOperator Ay(a.translated(y), grid, eps);
  const CorrectorOperator Az(a.translated(z), grid, eps);
  const CorrectorResult phi_y = corrector_from(Ay, e, cfg);
  const CorrectorResult phi_z = corrector_from(Az, e, cfg);
  const VectorXd delta_phi = 0.5 * (phi_y.phi.values() - phi_z.phi.values());

  const DiscreteCoefficients delta_a = Ay.coefficients().combined(Az.coefficients(), 0.5);
  const VectorXd b = flux_divergence(delta_a, grid, e, phi_y.phi.values());
  ZetaCheck out;
  out.sup_delta_phi = window_sup(grid, delta_phi, cfg.window);
  VectorXd zeta = VectorXd::Zero(grid.size());
  if (b.norm() > 0.0) {
    const KrylovResult k = solve_operator(Az, b, cfg);
    if (!k.converged) throw_unconverged("difference_corrector_check", k);
    zeta = k.x;
  }
  out.mismatch = window_sup(grid, zeta - delta_phi, cfg.window);
  out.relative = out.sup_delta_phi > 0.0 ? out.mismatch / out.sup_delta_phi : out.mismatch;
  return out;
}

std::vector<Rho1Row> corrector_rho1(const GridField& phi, const CoefficientField& a,
                                    const std::vector<double>& R_list, const GridRhoConfig& cfg) {
  const PeriodicGrid& g = phi.grid();
  const int d = g.dim();
  if (a.dim() != d) throw ValidationError("corrector_rho1: dimension mismatch");
  if (cfg.y_per_dim < 1 || cfg.z_stride < 1 || cfg.x_samples < 1)
    throw ValidationError("corrector_rho1: sample counts must be positive");
  if (!(cfg.window > 0.0) || cfg.window > 1.0)
    throw ValidationError("corrector_rho1: window must lie in (0, 1]");
  for (double R : R_list)
    if (!(R >= 1.0)) throw ValidationError("corrector_rho1: R must be >= 1");
  const double h = g.h();
  const long n = g.n();
  const double Rmax = R_list.empty() ? 0.0 : *std::max_element(R_list.begin(), R_list.end());
  const long zr = static_cast<long>(std::floor(Rmax / h + 1e-9));
  // Translations y span a quarter of the window; x runs over the window
  // shrunk so every shifted point stays inside it.
  const long half_window = static_cast<long>(std::floor(cfg.window * n / 2.0));
  const long y_span = std::max<long>(1, half_window / 4);
  const long x_half = half_window - y_span - zr;
  if (x_half <= 0) throw ValidationError("corrector_rho1: window too small for the largest R");
  const long x_step = std::max<long>(1, (2 * x_half + 1) / cfg.x_samples);
  const long y_step = std::max<long>(1, y_span / cfg.y_per_dim);
  // Flat offsets of the lattices of x, y and z around the origin node.
  auto offsets = [&](long lo, long hi, long stride, std::vector<double>* norms) {
    std::vector<long> out;
    std::vector<long> j(static_cast<std::size_t>(d), lo);
    while (true) {
      long off = 0;
      double n2 = 0.0;
      for (int a2 = 0; a2 < d; ++a2) {
        off += j[static_cast<std::size_t>(a2)] * g.stride(a2);
        n2 += static_cast<double>(j[static_cast<std::size_t>(a2)]) * j[static_cast<std::size_t>(a2)];
      }
      out.push_back(off);
      if (norms) norms->push_back(std::sqrt(n2) * h);
      int a2 = d - 1;
      while (a2 >= 0 && j[static_cast<std::size_t>(a2)] + stride > hi) j[static_cast<std::size_t>(a2--)] = lo;
      if (a2 < 0) return out;
      j[static_cast<std::size_t>(a2)] += stride;
    }
  };
  long origin_idx = 0;
  for (int a2 = 0; a2 < d; ++a2) origin_idx += (n / 2) * g.stride(a2);
  const std::vector<long> xs = offsets(-x_half, x_half, x_step, nullptr);
  const std::vector<long> ys = offsets(0, y_span - 1, y_step, nullptr);
  std::vector<double> znorm;
  const std::vector<long> zs = offsets(-zr, zr, cfg.z_stride, &znorm);
  const double* v = phi.values().data();

  // For each y: min over |z| <= R of sup_x |phi(x+y) - phi(x+z)| / 2, for
  // every R in one pass over z.
  std::vector<double> best(R_list.size(), 0.0);
  for (long y : ys) {
    std::vector<double> inner(R_list.size(), std::numeric_limits<double>::infinity());
    for (std::size_t iz = 0; iz < zs.size(); ++iz) {
      if (znorm[iz] > Rmax * (1.0 + 1e-12)) continue;
      const long z = zs[iz];
      double sup = 0.0;
      for (long x : xs) sup = std::max(sup, std::abs(v[origin_idx + x + y] - v[origin_idx + x + z]));
      sup *= 0.5;
      for (std::size_t r = 0; r < R_list.size(); ++r)
        if (znorm[iz] <= R_list[r] * (1.0 + 1e-12)) inner[r] = std::min(inner[r], sup);
    }
    for (std::size_t r = 0; r < R_list.size(); ++r) best[r] = std::max(best[r], inner[r]);
  }

  std::vector<Rho1Row> out;
  const QuasiperiodicField a00 = a.entry(0, 0);
  for (std::size_t r = 0; r < R_list.size(); ++r) {
    Rho1Row row;
    row.R = R_list[r];
    row.rho_phi = best[r];
    row.rho_a = rho_k(a00, R_list[r], 1, cfg.search).value;
    out.push_back(row);
  }
  return out;
}

}  // namespace aplab

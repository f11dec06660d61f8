#include "aplab/krylov.hpp"

namespace aplab {

namespace {

double true_residual(const LinearMap& A, const VectorXd& b, const VectorXd& x, double bnorm) {
  VectorXd r(b.size());
  A(x, r);
  return (b - r).norm() / bnorm;
}

}  // namespace

KrylovResult pcg(const LinearMap& A, const LinearMap& M, const VectorXd& b, VectorXd x0,
                 const KrylovConfig& cfg) {
  KrylovResult out;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x = VectorXd::Zero(b.size());
    out.converged = true;
    return out;
  }
  VectorXd& x = x0;
  VectorXd r(b.size()), z(b.size()), p(b.size()), q(b.size());
  A(x, q);
  r = b - q;
  M(r, z);
  p = z;
  double rz = r.dot(z);
  double rel = r.norm() / bnorm;
  for (long it = 0; it < cfg.max_iters && rel > cfg.tol; ++it) {
    count_work();
    A(p, q);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) break;  // breakdown: not positive definite
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    rel = r.norm() / bnorm;
    out.history.push_back(rel);
    ++out.iterations;
    if (rel <= cfg.tol) break;
    M(r, z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  out.residual = true_residual(A, b, x, bnorm);
  out.converged = out.residual <= cfg.tol * 10.0 && rel <= cfg.tol;
  out.x = std::move(x);
  return out;
}

KrylovResult gmres(const LinearMap& A, const LinearMap& M, const VectorXd& b, VectorXd x0,
                   const KrylovConfig& cfg) {
  KrylovResult out;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x = VectorXd::Zero(b.size());
    out.converged = true;
    return out;
  }
  const Index n = b.size();
  const int m = std::max(1, cfg.restart);
  VectorXd& x = x0;
  VectorXd r(n), w(n), z(n);
  double rel = true_residual(A, b, x, bnorm);
  while (out.iterations < cfg.max_iters && rel > cfg.tol) {
    A(x, w);
    r = b - w;
    const double beta = r.norm();
    std::vector<VectorXd> V{r / beta};
    MatrixXd H = MatrixXd::Zero(m + 1, m);
    VectorXd cs = VectorXd::Zero(m), sn = VectorXd::Zero(m), g = VectorXd::Zero(m + 1);
    g[0] = beta;
    int j = 0;
    for (; j < m && out.iterations < cfg.max_iters; ++j) {
      count_work();
      M(V[static_cast<std::size_t>(j)], z);
      A(z, w);
      // Modified Gram-Schmidt.
      for (int i = 0; i <= j; ++i) {
        H(i, j) = w.dot(V[static_cast<std::size_t>(i)]);
        w -= H(i, j) * V[static_cast<std::size_t>(i)];
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0.0) V.push_back(w / H(j + 1, j));
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = H(j, j) / denom;
      sn[j] = H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++out.iterations;
      rel = std::abs(g[j + 1]) / bnorm;
      out.history.push_back(rel);
      if (rel <= cfg.tol || static_cast<int>(V.size()) <= j + 1) {
        ++j;
        break;
      }
    }
    // Back substitution on the triangular part and update x = x + M V y.
    VectorXd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    VectorXd update = VectorXd::Zero(n);
    for (int i = 0; i < j; ++i) update += y[i] * V[static_cast<std::size_t>(i)];
    M(update, z);
    x += z;
    rel = true_residual(A, b, x, bnorm);
  }
  out.residual = rel;
  out.converged = rel <= cfg.tol;
  out.x = std::move(x);
  return out;
}

}  // namespace aplab

#pragma once

#include "aplab/core.hpp"

#include <functional>
#include <vector>

namespace aplab {

/// y = A x, with y preallocated to the size of x.
using LinearMap = std::function<void(const VectorXd& x, VectorXd& y)>;

struct KrylovConfig {
  double tol = 1e-10;  // on ||b - A x|| / ||b||
  long max_iters = 1000;
  int restart = 60;    // GMRES only
};

struct KrylovResult {
  VectorXd x;
  long iterations = 0;
  double residual = 0.0;  // relative, recomputed from b - A x at exit
  bool converged = false;
  std::vector<double> history;  // relative residual per iteration
};

/// Preconditioned conjugate gradients for symmetric positive-definite A and
/// a symmetric positive-definite preconditioner M ~ A^{-1}.
KrylovResult pcg(const LinearMap& A, const LinearMap& M, const VectorXd& b, VectorXd x0,
                 const KrylovConfig& cfg = {});

/// Restarted GMRES with right preconditioning; minimizes the true residual
/// over each cycle.
KrylovResult gmres(const LinearMap& A, const LinearMap& M, const VectorXd& b, VectorXd x0,
                   const KrylovConfig& cfg = {});

}  // namespace aplab

#pragma once

#include "aplab/corrector.hpp"
#include "aplab/fit.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace aplab {

struct EffectiveMatrix {
  MatrixXd abar;
  std::vector<double> residuals;  // corrector residual per direction
  double eps = 0.0;
  double h = 0.0;
  double L = 0.0;
  /// Symmetric-part eigenvalues lie in [1, Lambda] (to 1e-9).
  bool elliptic = false;
};

/// Column j is the grid mean of a (e_j + grad phi_{eps, e_j}).
EffectiveMatrix effective_matrix(const CoefficientField& a, double eps, const PeriodicGrid& grid,
                                 const SolveConfig& cfg = {});

/// 1 / <1/a> and <a> for a scalar 1D field, averaged over the torus lattice
/// with n points per dimension.
double harmonic_mean(const CoefficientField& a, int n_per_dim = 256);
double arithmetic_mean(const CoefficientField& a);

/// Boundary data g(x) = c + b.x + x^t Q x.
struct BoundaryData {
  double constant = 0.0;
  VectorXd linear;
  MatrixXd quadratic;

  static BoundaryData affine(double c, const VectorXd& b);
  double operator()(const VectorXd& x) const;
};

struct DirichletConfig {
  long n = 0;     // nodes per side of the box [-1, 1)^d; 0: h <= min eps / 16
  double p = 2.0; // exponent of the W^{1,p} error
  SolveConfig solve;
  /// Homogenized solution in closed form; solved numerically when empty.
  std::function<double(const VectorXd&)> exact_homogenized;
};

/// Grid of side 2 holding the unit cube U = [0, 1]^d: node x represents the
/// cube point x + 1/2, so U occupies the central half of the box.
PeriodicGrid dirichlet_grid(int d, long n);
VectorXd cube_point(const PeriodicGrid& g, long idx);

/// -div(a grad u) = 0 in the unit cube, u = g on its boundary, solved with
/// the corrector operator (eps = 0) and a boundary mask. Values outside the
/// closed cube are zero; a and g are given in cube coordinates.
GridField dirichlet_solve(const CoefficientField& a, const BoundaryData& g, const PeriodicGrid& grid,
                          const SolveConfig& cfg = {});

struct RateRow {
  double eps = 0.0;
  double h = 0.0;
  double err_Linf = 0.0;
  double err_W1p = 0.0;
  double slope_so_far = 0.0;  // NaN until two rows exist
  bool under_resolved = false;  // h > eps / 8
};

struct RateReport {
  std::vector<RateRow> rows;
  LogLogFit fit;            // err_Linf against eps
  bool degenerate = false;  // every error at rounding level; no fit
};

RateReport dirichlet_rate(const CoefficientField& a, const MatrixXd& abar, const BoundaryData& g,
                          const std::vector<double>& eps_list, const DirichletConfig& cfg = {});

/// Axis-aligned box lo <= x <= hi.
struct InteriorBox {
  VectorXd lo;
  VectorXd hi;
};

/// W^{1,p}(V) norm of u_eps - u_hom - eps grad u_hom . Phi, by nodal
/// quadrature. Phi holds the corrector values Phi(x / eps) at the nodes, one
/// component per direction. V must keep a margin of 0.1 inside U.
double two_scale_error(const GridField& u_eps, const GridField& u_hom, const GridField& Phi,
                       double eps, const InteriorBox& V, double p = 2.0);

/// Phi(x / eps) at the grid nodes for a 1D field, with
/// Phi(y) = int_0^y (abar / a(s) - 1) ds shifted to mean zero over U.
GridField corrector_profile_1d(const CoefficientField& a, double abar, double eps,
                               const PeriodicGrid& grid);

}  // namespace aplab

#pragma once

#include "aplab/diffcalc.hpp"
#include "aplab/field.hpp"

#include <vector>

namespace aplab {

/// One real mode c cos(2 pi xi.x) + s sin(2 pi xi.x).
struct FrequencyMode {
  VectorXd xi;
  double c = 0.0;
  double s = 0.0;
};

/// A quasiperiodic function viewed through its physical frequencies
/// xi = M^t k. Frequencies are distinct (ValidationError otherwise); the
/// zero frequency carries the mean.
class FrequencyField {
 public:
  explicit FrequencyField(QuasiperiodicField field);

  int dim() const { return field_.dim(); }
  const QuasiperiodicField& field() const { return field_; }
  double mean() const { return field_.mean(); }
  std::vector<FrequencyMode> modes() const;
  double operator()(const VectorXd& x) const { return field_(x); }

 private:
  QuasiperiodicField field_;
};

/// Phi(x, t) = (4 pi t)^{-d/2} exp(-|x|^2 / 4t); ValidationError for t <= 0.
double heat_kernel(const VectorXd& x, double t);

/// Physicists' Hermite polynomial: H_0 = 1, H_1 = 2t,
/// H_{n+1} = 2t H_n - 2n H_{n-1}.
double hermite(int n, double t);

/// Zeros of H_n, ascending.
VectorXd hermite_zeros(int n);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<VectorXd, VectorXd> gauss_legendre(int n);

/// Integral over R^d of the largest entry (in absolute value) of the n-th
/// derivative tensor of Phi(., t). Requires n >= 0, t > 0, 1 <= d <= 3.
/// Composite Gauss-Legendre on panels split at the Hermite zeros, with the
/// exact product formula for the derivatives.
double grad_heat_l1(int n, double t, int d);

/// Smallest C with value_n <= (C (1 + n))^{n/2} for every n >= 1, where
/// values[n] is the integral for order n.
double fit_heat_l1_constant(const std::vector<double>& values);

/// Every mode amplitude multiplied by exp(-4 pi^2 |xi|^2 t); exact.
FrequencyField heat_evolve(const FrequencyField& f, double t);

/// A sampled quantity with its resolution (total sample count).
struct Sampled {
  double value = 0.0;
  long resolution = 0;
};

/// sup - inf over the torus lattice with n_per_dim points per dimension.
/// ResonanceError for a resonant winding.
Sampled osc(const FrequencyField& f, int n_per_dim = 64);

/// sup |grad f| over the same lattice.
Sampled grad_sup(const FrequencyField& f, int n_per_dim = 64);

struct ErgodicFitConfig {
  SearchConfig search;          // for omega_k
  int torus_points = 64;        // osc and gradient sampling
  int quad_points = 32;         // L^1(B_1) quadrature
  int l1_torus_points = 16;     // z' samples for the L^1 sup
  std::vector<double> c_grid;   // candidates for c; default 1e-3 .. 1 log-spaced
  double C_cap = 1e3;           // c is the largest grid value keeping C <= C_cap
};

struct ErgodicRow {
  double t = 0.0;
  double lhs_osc = 0.0;
  double rhs_min = 0.0;   // C^k min_R (...) at the fitted (C, c)
  double argmin_R = 0.0;
  double lhs_grad = 0.0;
  double rhs_grad = 0.0;  // gradient bound at the fitted (C_grad, c)
};

struct ErgodicReport {
  int k = 1;
  std::vector<ErgodicRow> rows;
  std::vector<double> omega_values;  // omega_k(f, R) per R
  double l1_sup = 0.0;
  double fitted_C = 0.0;
  double fitted_c = 0.0;
  double fitted_C_grad = 0.0;
  bool holds = false;  // LHS <= RHS at every t for both bounds
};

/// Checks osc u(t) <= C^k min_R (omega_k(f,R) + exp(-c t/(k R^2)) L1) and
/// sup|grad u(t)| <= C^k min_R (t^{-1/2} omega_k(f,R) + exp(...) L1) over
/// t_list, fitting C and c. Requires every t >= k (GuardError otherwise).
ErgodicReport ergodic_bound_check(const FrequencyField& f, const std::vector<double>& t_list,
                                  int k, const std::vector<double>& R_list,
                                  const ErgodicFitConfig& cfg = {});

struct PoincareQuadrature {
  double t_min = 1e-4;
  double t_max = 1e3;
  int nodes = 200;        // log-spaced
  int torus_points = 64;  // sup over y
};

/// 2 int_0^infty sup_y |int grad u . grad Phi(y - x, t) dx| dt. The inner
/// convolution is exact per mode; outside [t_min, t_max] the analytic mode
/// sums bound the integral.
double multiscale_poincare_rhs(const FrequencyField& u, const PoincareQuadrature& q = {});

}  // namespace aplab

#pragma once

#include "aplab/diffcalc.hpp"
#include "aplab/fit.hpp"
#include "aplab/grid.hpp"
#include "aplab/krylov.hpp"

#include <optional>
#include <vector>

namespace aplab {

/// A coefficient field sampled for the flux discretization: diagonal entries
/// a_ii on the faces x + (h/2) e_i, off-diagonal entries at cell centres
/// x + (h/2)(1, ..., 1).
struct DiscreteCoefficients {
  struct OffDiagonal {
    int i = 0;
    int j = 0;
    VectorXd values;
  };
  std::vector<VectorXd> diagonal;  // one array per axis
  std::vector<OffDiagonal> off;    // nonzero off-diagonal entries only

  static DiscreteCoefficients sample(const CoefficientField& a, const PeriodicGrid& grid);
  /// (this - other) * scale, entry by entry; both must share a pattern.
  DiscreteCoefficients combined(const DiscreteCoefficients& other, double scale) const;
  bool symmetric() const;
};

/// D^-.(c (e + grad v)) with forward differences on faces and cell-centred
/// gradients for the off-diagonal part; v may be empty (treated as 0).
VectorXd flux_divergence(const DiscreteCoefficients& c, const PeriodicGrid& grid,
                         const VectorXd& e, const VectorXd& v);

enum class Preconditioner { line, jacobi };

/// v -> eps^2 v - D^-.(a D^+ v) on a periodic grid (apply-only). The
/// Dirichlet variant pins masked nodes: P A P + (I - P).
class CorrectorOperator {
 public:
  /// Requires eps in (0, 1] and eps L >= 8.
  CorrectorOperator(const CoefficientField& a, const PeriodicGrid& grid, double eps);
  /// eps = 0 operator with pinned nodes (pinned[i] != 0).
  static CorrectorOperator dirichlet(const CoefficientField& a, const PeriodicGrid& grid,
                                     std::vector<char> pinned);

  const PeriodicGrid& grid() const { return grid_; }
  double eps() const { return eps_; }
  const DiscreteCoefficients& coefficients() const { return coeffs_; }
  bool symmetric() const { return coeffs_.symmetric(); }
  bool is_pinned(long i) const { return !pinned_.empty() && pinned_[static_cast<std::size_t>(i)]; }

  void apply(const VectorXd& v, VectorXd& out) const;
  /// Tridiagonal solve along the last axis (exact in 1D) or diagonal scaling.
  void precondition(const VectorXd& r, VectorXd& z, Preconditioner kind = Preconditioner::line) const;
  /// D^-.(a e), the corrector right-hand side.
  VectorXd rhs(const VectorXd& e) const;
  /// Grid means of the flux components a (e + grad v).
  VectorXd mean_flux(const VectorXd& e, const VectorXd& v) const;

 private:
  CorrectorOperator(DiscreteCoefficients coeffs, PeriodicGrid grid, double eps,
                    std::vector<char> pinned);
  void build_lines();
  void factor_lines();
  void thomas_line(long start, const double* r, double* x) const;

  DiscreteCoefficients coeffs_;
  PeriodicGrid grid_;
  double eps_;
  std::vector<char> pinned_;
  VectorXd line_diag_;
  VectorXd line_off_;  // coupling between node and its successor on the last axis
  VectorXd super_, inv_pivot_, correction_;
  VectorXd corner_, sm_denominator_;  // per line
};

/// The operator of the regularized corrector equation.
CorrectorOperator assemble_apply(const CoefficientField& a, const PeriodicGrid& grid, double eps);

struct SolveConfig {
  double tol = 1e-10;
  long max_iters = 0;   // 0: 50 n
  double window = 0.5;  // measurements on |x_i| <= window L / 2
  Preconditioner preconditioner = Preconditioner::line;
};

struct CorrectorResult {
  GridField phi;
  double eps = 0.0;
  VectorXd e;
  double residual = 0.0;
  double sup_phi = 0.0;
  double sup_grad_phi = 0.0;
  double mean_phi = 0.0;
  long solver_iters = 0;
  double window = 0.5;
};

/// Solves A phi = D^-.(a e); PCG for symmetric a, GMRES otherwise. Throws
/// ConvergenceError (with the residual history) when tol is not reached.
CorrectorResult solve_corrector(const CoefficientField& a, const VectorXd& e, double eps,
                                const PeriodicGrid& grid, const SolveConfig& cfg = {});

/// Generic solve with the corrector machinery; used by the Dirichlet and
/// difference problems.
KrylovResult solve_operator(const CorrectorOperator& A, const VectorXd& b, const SolveConfig& cfg);

/// sup over the window of the centred-difference gradient norm.
double sup_centered_gradient(const GridField& v, double window);

struct LipschitzReport {
  double eps_sup_phi = 0.0;
  double sup_grad_phi = 0.0;
  double h = 0.0;
};

LipschitzReport lipschitz_report(const CorrectorResult& r);

struct PsiResult {
  GridField psi;
  double sup_psi = 0.0;
  double equation_residual = 0.0;  // |A_eps psi - 3 eps^2 phi_2eps| / |b|
  bool equation_ok = false;        // residual <= 10 tol
  CorrectorResult fine;
  CorrectorResult coarse;
};

/// psi_eps = phi_eps - phi_2eps, both solved on `grid`.
PsiResult psi(const CoefficientField& a, const VectorXd& e, double eps, const PeriodicGrid& grid,
              const SolveConfig& cfg = {});

struct SweepConfig {
  double epsL = 64.0;  // box side L = epsL / eps
  double h_max = 1.0 / 16.0;
  SolveConfig solve;
};

struct CauchyRow {
  double eps = 0.0;      // finer scale of the pair
  double sup_psi = 0.0;  // sup |phi_eps - phi_2eps|
  double partial_sum = 0.0;
};

struct CorrectorLimit {
  GridField phi_limit;
  std::vector<double> eps;        // every scale of the sweep
  std::vector<double> sup_phi;    // sup |phi_eps| on each scale's own grid
  std::vector<double> sup_grad;   // sup |grad phi_eps|
  std::vector<CauchyRow> table;
  double step_factor = 0.0;       // fitted geometric ratio of sup_psi per step
  bool flagged = false;           // some step grew by more than 2x
};

/// Dyadic scheme over eps_list (each entry half the previous). Each pair
/// shares the grid of its finer scale.
CorrectorLimit corrector_limit(const CoefficientField& a, const VectorXd& e,
                               const std::vector<double>& eps_list, const SweepConfig& cfg = {});

struct ZetaCheck {
  double mismatch = 0.0;         // sup |zeta_1 - Delta_yz phi|
  double sup_delta_phi = 0.0;
  double relative = 0.0;         // mismatch / sup |Delta_yz phi| (0 when both vanish)
};

/// Solves the first difference equation with coefficient T_z a and
/// right-hand side D^-.((Delta_yz a)(e + grad T_y phi)), compares with the
/// difference of the two translated correctors.
ZetaCheck difference_corrector_check(const CoefficientField& a, const VectorXd& y,
                                     const VectorXd& z, const VectorXd& e, double eps,
                                     const PeriodicGrid& grid, const SolveConfig& cfg = {});

struct GridRhoConfig {
  int y_per_dim = 16;     // translations sampled per axis
  long z_stride = 1;      // node stride of the z search
  long x_samples = 2048;  // evaluation points per axis inside the window
  double window = 0.5;
  SearchConfig search;    // for rho_1 of the coefficient
};

struct Rho1Row {
  double R = 0.0;
  double rho_phi = 0.0;
  double rho_a = 0.0;  // rho_1 of a_00 (qualitative comparison)
};

/// rho_1 of a grid function restricted to grid translations, next to rho_1
/// of the coefficient.
std::vector<Rho1Row> corrector_rho1(const GridField& phi, const CoefficientField& a,
                                    const std::vector<double>& R_list,
                                    const GridRhoConfig& cfg = {});

}  // namespace aplab

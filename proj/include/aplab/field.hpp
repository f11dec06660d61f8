#pragma once

#include "aplab/core.hpp"
#include "aplab/estimate.hpp"
#include "aplab/trig_polynomial.hpp"

#include <optional>
#include <vector>

namespace aplab {

/// Linear lift M : R^d -> R^m of physical space into the torus T^m.
class WindingMatrix {
 public:
  /// Throws ValidationError unless entries are finite, m >= d and M has full
  /// column rank (smallest singular value > 1e-12).
  explicit WindingMatrix(MatrixXd m);

  static WindingMatrix identity(int d) { return WindingMatrix(MatrixXd::Identity(d, d)); }

  int torus_dim() const { return static_cast<int>(m_.rows()); }
  int dim() const { return static_cast<int>(m_.cols()); }
  const MatrixXd& matrix() const { return m_; }

  template <typename Derived>
  VectorXd lift(const Eigen::MatrixBase<Derived>& x) const {
    return m_ * x;
  }

  /// A nonzero integer vector z with |z|_inf <= radius and |M^t z|_inf <=
  /// tol, if one exists.
  std::optional<VectorXi> find_resonance(int radius = 24, double tol = 1e-10) const;
  /// Throws ResonanceError when find_resonance succeeds.
  void require_nonresonant(int radius = 24) const;

  /// x -> M (s x).
  WindingMatrix scaled(double s) const { return WindingMatrix(m_ * s); }

 private:
  MatrixXd m_;
};

/// Scalar quasiperiodic function f(x) = F(M x).
class QuasiperiodicField {
 public:
  QuasiperiodicField(WindingMatrix winding, TrigPolynomial lifted);

  int dim() const { return winding_.dim(); }
  const WindingMatrix& winding() const { return winding_; }
  const TrigPolynomial& lifted() const { return lifted_; }
  double mean() const { return lifted_.mean(); }

  double operator()(const VectorXd& x) const { return lifted_(winding_.lift(x)); }
  VectorXd gradient(const VectorXd& x) const;

  /// x -> f(x + y).
  QuasiperiodicField translated(const VectorXd& y) const;
  /// x -> (f(x + y) - f(x + z)) / 2, in closed form.
  QuasiperiodicField difference(const VectorXd& y, const VectorXd& z) const;
  /// Same as difference() with the translations given directly as torus
  /// shifts beta = M y, gamma = M z.
  QuasiperiodicField difference_lifted(const VectorXd& beta, const VectorXd& gamma) const;
  /// x -> f(s x).
  QuasiperiodicField scaled(double s) const;

  /// Physical frequency vectors xi = M^t k, one per term.
  std::vector<VectorXd> frequencies() const;

 private:
  WindingMatrix winding_;
  TrigPolynomial lifted_;
};

/// Sampled sup |f| over R^d, taken as the max over the lattice of n^m points
/// of the torus (the orbit of a non-resonant winding is dense).
double sup_norm(const QuasiperiodicField& f, int n_per_dim);

/// Hoelder record (gamma, K); reported, not enforced.
struct HolderRecord {
  double gamma = 1.0;
  double K = 0.0;
};

/// Matrix-valued quasiperiodic field a(x) = shift + [F_ij(M x)], every entry
/// sharing one winding matrix. Construction validates ellipticity
/// xi.a(x)xi >= |xi|^2 and |a(x)| <= Lambda on a torus lattice.
class CoefficientField {
 public:
  /// `entries` is row-major with d*d polynomials on the torus of `winding`.
  CoefficientField(WindingMatrix winding, MatrixXd shift, std::vector<TrigPolynomial> entries,
                   double lambda, HolderRecord holder = {}, double kappa = 0.0);

  /// Constant field a(x) = a.
  static CoefficientField constant(const MatrixXd& a, double lambda);
  /// Isotropic field a(x) = g(M x) I.
  static CoefficientField isotropic(WindingMatrix winding, const TrigPolynomial& g, double lambda);

  int dim() const { return winding_.dim(); }
  const WindingMatrix& winding() const { return winding_; }
  double lambda() const { return lambda_; }
  const HolderRecord& holder() const { return holder_; }
  double kappa() const { return kappa_; }
  const MatrixXd& shift() const { return shift_; }
  const TrigPolynomial& lifted_entry(int i, int j) const { return entries_[idx(i, j)]; }

  MatrixXd operator()(const VectorXd& x) const { return at_torus(winding_.lift(x)); }
  double entry_value(int i, int j, const VectorXd& x) const;
  MatrixXd at_torus(const VectorXd& alpha) const;
  /// Entry (i,j) with its shift folded into the zero frequency.
  QuasiperiodicField entry(int i, int j) const;

  /// x -> a(x + y).
  CoefficientField translated(const VectorXd& y) const;
  /// x -> a(s x).
  CoefficientField scaled(double s) const;

  bool is_symmetric() const;
  bool is_constant() const;
  /// True when every off-diagonal entry vanishes identically.
  bool is_diagonal() const;

  /// Smallest eigenvalue of the symmetric part and largest operator norm
  /// observed on the torus lattice with n points per dimension.
  std::pair<double, double> ellipticity_range(int n_per_dim) const;

 private:
  struct Unchecked {};
  CoefficientField(Unchecked, WindingMatrix winding, MatrixXd shift,
                   std::vector<TrigPolynomial> entries, double lambda, HolderRecord holder,
                   double kappa);
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i * dim() + j); }
  void validate() const;

  WindingMatrix winding_;
  MatrixXd shift_;
  std::vector<TrigPolynomial> entries_;
  double lambda_ = 1.0;
  HolderRecord holder_;
  double kappa_ = 0.0;
};

/// Result of the lattice search for the Diophantine constant.
struct DiophantineReport {
  double theta = 1.0;
  double A_est = 0.0;
  int Z_max = 0;
  VectorXi argmin_z;
};

/// min over 0 < |z|_inf <= Z_max and i of |e_i . M^t z| |z|^theta (|z|
/// Euclidean). Throws ResonanceError if M^t z = 0 for a searched z, and
/// ValidationError if a single component vanishes (the condition fails).
DiophantineReport diophantine_constant(const WindingMatrix& M, double theta, int Z_max);

/// Options for the discrepancy estimate.
struct SigmaConfig {
  int torus_points = 64;  // per torus dimension, for the supremum over y
  int ball_points = 64;   // coarse steps across the radius, for the infimum
  int refine_iters = 60;  // golden-section iterations (d >= 2)
};

/// sup_y inf_{|z| <= R} max_i dist((M y - M z)_i, Z). In d = 1 the infimum
/// over z is computed exactly on cells of a fine partition of [-R, R]; in
/// higher dimension a lattice with golden-section refinement is used.
RhoEstimate sigma(const WindingMatrix& M, double R, const SigmaConfig& cfg = {});

/// A point z of the ball whose orbit point M z lies close to beta on the torus.
struct NearReturn {
  VectorXd z;
  double gap = 0.0;   // max_i dist((beta - M z)_i, Z)
  double cell = 0.0;  // width of the search cell containing z
};

/// The `count` best near returns to beta within B_R, smallest gap first. In
/// d = 1 one exact minimizer per cell of the sigma partition; otherwise the
/// best points of the coarse ball lattice.
std::vector<NearReturn> near_returns(const WindingMatrix& M, const VectorXd& beta, double R,
                                     int count, const SigmaConfig& cfg = {});

/// Number of cells (d = 1) or lattice points searched by near_returns.
long near_return_resolution(const WindingMatrix& M, double R, const SigmaConfig& cfg = {});

/// Inner infimum of sigma for one torus point beta (exposed for testing).
double sigma_inf(const WindingMatrix& M, const VectorXd& beta, double R, const SigmaConfig& cfg);

}  // namespace aplab

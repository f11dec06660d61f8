#pragma once

#include "aplab/core.hpp"

#include <vector>

namespace aplab {

/// One term c cos(2 pi k.alpha) + s sin(2 pi k.alpha) of a lifted function.
struct TrigTerm {
  VectorXi k;
  double c = 0.0;
  double s = 0.0;
};

/// Finite real trigonometric polynomial on the torus T^m,
///   F(alpha) = sum_j c_j cos(2 pi k_j.alpha) + s_j sin(2 pi k_j.alpha).
///
/// Frequencies are stored in canonical sign (first nonzero entry positive,
/// the sine amplitude flipped accordingly) and are pairwise distinct.
class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  explicit TrigPolynomial(int m);
  /// Throws ValidationError on duplicate frequencies (after sign
  /// canonicalization), wrong frequency length, or non-finite amplitudes.
  TrigPolynomial(int m, std::vector<TrigTerm> terms);

  static TrigPolynomial constant(int m, double value);
  /// Single mode c cos(2 pi k.alpha) + s sin(2 pi k.alpha).
  static TrigPolynomial mode(const VectorXi& k, double c, double s = 0.0);

  int torus_dim() const { return m_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  /// Amplitude of the zero frequency.
  double mean() const;

  template <typename Scalar>
  Scalar evaluate(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& alpha) const {
    Scalar value(0);
    for (const auto& t : terms_) {
      Scalar phase(0);
      for (int i = 0; i < m_; ++i) phase += Scalar(t.k[i]) * alpha[i];
      phase *= Scalar(kTwoPi);
      value += Scalar(t.c) * cos(phase) + Scalar(t.s) * sin(phase);
    }
    return value;
  }
  double operator()(const VectorXd& alpha) const { return evaluate<double>(alpha); }

  /// alpha -> F(alpha + beta), computed on the coefficients.
  TrigPolynomial shifted(const VectorXd& beta) const;
  /// alpha -> (F(alpha + beta) - F(alpha + gamma)) / 2, computed on the
  /// coefficients. The zero frequency cancels exactly.
  TrigPolynomial difference(const VectorXd& beta, const VectorXd& gamma) const;
  /// Partial derivative along torus axis `axis`.
  TrigPolynomial derivative(int axis) const;
  /// Drop terms whose amplitudes are both below `tol` in magnitude.
  TrigPolynomial pruned(double tol) const;

  TrigPolynomial& operator+=(const TrigPolynomial& other);
  TrigPolynomial& operator*=(double factor);
  friend TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) { return a += b; }
  friend TrigPolynomial operator*(double f, TrigPolynomial a) { return a *= f; }

  /// Pointwise product, expanded with the product-to-sum identities.
  friend TrigPolynomial operator*(const TrigPolynomial& a, const TrigPolynomial& b);

  /// Values on the uniform lattice {i/n : i in [0,n)^m}, flattened with the
  /// last torus index fastest. Phases are reduced with integer arithmetic.
  VectorXd sample_lattice(int n) const;

 private:
  void add_term(const VectorXi& k, double c, double s);

  int m_ = 0;
  std::vector<TrigTerm> terms_;
};

/// F(alpha) for a point of the torus (any real lift).
double lifted_eval(const TrigPolynomial& F, const VectorXd& alpha);

/// Coefficient-sum bound sum (|c|+|s|) (2 pi |k|_1)^j on every j-th order
/// partial derivative of F.
double derivative_norm_bound(const TrigPolynomial& F, int order);

/// Amplitude mass carried by frequencies that involve a torus coordinate
/// beyond index m_cut. Bounds the sup of those tail terms, i.e. the distance
/// from F to its part depending on the first m_cut coordinates only. The
/// coordinate-zeroing difference sup |F(alpha) - F(P alpha)| is at most
/// twice this value.
double chi_m(const TrigPolynomial& F, int m_cut);

}  // namespace aplab

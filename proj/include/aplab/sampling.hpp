#pragma once

#include "aplab/core.hpp"

#include <functional>
#include <utility>

namespace aplab {

/// Calls fn(z) for every integer vector z in [-radius, radius]^m, in
/// lexicographic order.
template <typename Fn>
void for_each_int_box(int m, int radius, Fn&& fn) {
  VectorXi z = VectorXi::Constant(m, -radius);
  while (true) {
    fn(static_cast<const VectorXi&>(z));
    int i = m - 1;
    while (i >= 0 && z[i] == radius) z[i--] = -radius;
    if (i < 0) return;
    ++z[i];
  }
}

/// Calls fn(beta) for the lattice {j/n : j in [0,n)^m} of the torus, last
/// index fastest (matching TrigPolynomial::sample_lattice).
template <typename Fn>
void for_each_torus_point(int m, int n, Fn&& fn) {
  VectorXi j = VectorXi::Zero(m);
  VectorXd beta = VectorXd::Zero(m);
  while (true) {
    fn(static_cast<const VectorXd&>(beta));
    int i = m - 1;
    while (i >= 0 && j[i] == n - 1) {
      j[i] = 0;
      beta[i] = 0.0;
      --i;
    }
    if (i < 0) return;
    ++j[i];
    beta[i] = static_cast<double>(j[i]) / n;
  }
}

/// Calls fn(z) for the points of the lattice -R + (2R/n) j, j in [0,n]^d,
/// that lie in the closed ball |z| <= R.
template <typename Fn>
void for_each_ball_point(int d, double R, int n, Fn&& fn) {
  const double step = 2.0 * R / n;
  VectorXi j = VectorXi::Zero(d);
  VectorXd z(d);
  while (true) {
    for (int i = 0; i < d; ++i) z[i] = -R + step * j[i];
    if (z.norm() <= R * (1.0 + 1e-12)) fn(static_cast<const VectorXd&>(z));
    int i = d - 1;
    while (i >= 0 && j[i] == n) j[i--] = 0;
    if (i < 0) return;
    ++j[i];
  }
}

/// Number of points of the coarse ball lattice used by ball_minimize.
long ball_lattice_size(int d, double R, int n_per_dim);

struct BallMinimum {
  double value = 0.0;
  VectorXd argmin;
};

/// Minimizes objective over the closed ball |z| <= R: a uniform lattice with
/// n_per_dim steps across [-R, R]^d (points outside the ball dropped), then
/// golden-section refinement around the coarse argmin (coordinate-wise for
/// d >= 2). The result never exceeds the coarse minimum.
BallMinimum ball_minimize(int d, double R, int n_per_dim, int refine_iters,
                          const std::function<double(const VectorXd&)>& objective);

/// Coordinate golden-section passes within +-step of start.argmin, clamped to
/// the ball; never returns more than start.value.
BallMinimum refine_in_ball(double R, BallMinimum start, double step, int refine_iters,
                           const std::function<double(const VectorXd&)>& objective);

/// Golden-section search for a minimum of fn on [a, b]; returns the best
/// (x, fn(x)) seen, endpoints included.
std::pair<double, double> golden_section(const std::function<double(double)>& fn, double a,
                                         double b, int iters);

}  // namespace aplab

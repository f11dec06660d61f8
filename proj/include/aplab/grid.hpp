#pragma once

#include "aplab/field.hpp"

#include <string>
#include <vector>

namespace aplab {

/// Periodic box [-L/2, L/2)^d with n nodes per dimension, nodes at
/// -L/2 + j h. Node indices are row-major with the last axis fastest.
class PeriodicGrid {
 public:
  /// n must be a power of two (>= 4) and h = L/n <= max_h.
  PeriodicGrid(int d, double L, long n, double max_h = 1.0 / 16.0);

  /// Smallest power-of-two node count with h <= h_max on a box of side
  /// epsL / eps.
  static PeriodicGrid for_eps(int d, double eps, double epsL = 64.0, double h_max = 1.0 / 16.0);

  int dim() const { return d_; }
  double side() const { return L_; }
  long n() const { return n_; }
  double h() const { return L_ / static_cast<double>(n_); }
  long size() const { return size_; }
  long stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

  double coord(long j) const { return -0.5 * L_ + static_cast<double>(j) * h(); }
  long axis_index(long idx, int axis) const { return (idx / stride(axis)) % n_; }
  VectorXd point(long idx) const;
  /// Index of the node offset by `steps` along `axis`, wrapping periodically.
  long neighbor(long idx, int axis, long steps) const;
  /// True when every coordinate satisfies |x_i| <= fraction * L / 2.
  bool in_window(long idx, double fraction) const;

  friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) {
    return a.d_ == b.d_ && a.L_ == b.L_ && a.n_ == b.n_;
  }

 private:
  int d_;
  double L_;
  long n_;
  long size_;
  std::vector<long> strides_;
};

/// Scalar (components = 1) or vector values on the nodes of a grid, stored
/// component-major.
class GridField {
 public:
  GridField(PeriodicGrid grid, int components = 1);
  GridField(PeriodicGrid grid, VectorXd values, int components = 1);

  const PeriodicGrid& grid() const { return grid_; }
  int components() const { return components_; }
  VectorXd& values() { return values_; }
  const VectorXd& values() const { return values_; }

  double& operator()(long idx, int c = 0) { return values_[c * grid_.size() + idx]; }
  double operator()(long idx, int c = 0) const { return values_[c * grid_.size() + idx]; }
  auto component(int c) { return values_.segment(c * grid_.size(), grid_.size()); }
  auto component(int c) const { return values_.segment(c * grid_.size(), grid_.size()); }

  /// max |value| over nodes inside the window (fraction 1: whole grid).
  double sup(double window = 1.0) const;
  double mean() const;

  /// Flat float64 little-endian binary at `path` plus a JSON sidecar at
  /// `path + ".json"`; both written atomically.
  void save(const std::string& path) const;
  static GridField load(const std::string& path);

 private:
  PeriodicGrid grid_;
  int components_;
  VectorXd values_;
};

/// f at the nodes shifted by offset * h (offset in units of the mesh size).
VectorXd sample_on_grid(const QuasiperiodicField& f, const PeriodicGrid& grid,
                        const VectorXd& offset);

}  // namespace aplab

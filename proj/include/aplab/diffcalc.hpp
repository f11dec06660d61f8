#pragma once

#include "aplab/estimate.hpp"
#include "aplab/field.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace aplab {

/// One translation pair (y, z) of an iterated difference.
struct TranslationPair {
  VectorXd y;
  VectorXd z;
};

/// The k-tuple ((y_1, z_1), ..., (y_k, z_k)); k >= 1, entries finite.
class TranslationTuple {
 public:
  explicit TranslationTuple(std::vector<TranslationPair> pairs);

  int size() const { return static_cast<int>(pairs_.size()); }
  const TranslationPair& operator[](int j) const { return pairs_[static_cast<std::size_t>(j)]; }
  const std::vector<TranslationPair>& pairs() const { return pairs_; }

 private:
  std::vector<TranslationPair> pairs_;
};

/// Increasing subset zeta of {1, ..., k}, stored as a bit mask (bit j-1 set
/// when j is a member).
class PartitionIndex {
 public:
  PartitionIndex(std::uint32_t mask, int k);

  int k() const { return k_; }
  std::uint32_t mask() const { return mask_; }
  int size() const;
  bool empty() const { return mask_ == 0; }
  /// Members in increasing order, 1-based.
  std::vector<int> members() const;
  PartitionIndex complement() const;

  friend bool operator==(const PartitionIndex&, const PartitionIndex&) = default;

 private:
  std::uint32_t mask_;
  int k_;
};

/// All C(k, j) increasing subsets of size j, in lexicographic order; j = 0
/// yields the single empty subset.
std::vector<PartitionIndex> partitions(int j, int k);

/// The k-tuples (zeta^1, ..., zeta^k) of increasing subsets whose sizes sum
/// to k, stored flat (k masks per family).
class PartitionFamilies {
 public:
  PartitionFamilies(int k, std::vector<std::uint32_t> masks);

  int k() const { return k_; }
  std::size_t size() const { return masks_.size() / static_cast<std::size_t>(k_); }
  std::span<const std::uint32_t> operator[](std::size_t i) const {
    return {masks_.data() + i * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
  }
  /// True when the nonempty members of family i are pairwise disjoint (so
  /// they partition {1, ..., k}).
  bool is_disjoint(std::size_t i) const;

 private:
  int k_;
  std::vector<std::uint32_t> masks_;
};

/// Enumerates the families for 1 <= k <= max_k; throws GuardError beyond.
PartitionFamilies partition_families(int k, int max_k = 6);

/// x -> (f(x + y) - f(x + z)) / 2 in closed form.
QuasiperiodicField difference(const QuasiperiodicField& f, const VectorXd& y, const VectorXd& z);

/// Delta_{y_k z_k} ... Delta_{y_1 z_1} f, pair 1 applied first.
QuasiperiodicField iterated_difference(const QuasiperiodicField& f, const TranslationTuple& T);

/// Resolution of sampled sup norms: `base_points` per torus dimension for a
/// first-order difference, doubled for every further order.
struct SupSampler {
  int base_points = 16;
  bool double_per_order = true;
  int max_points = 256;

  int points_for_order(int order) const;
};

/// max over the partition families with pairwise disjoint members of the
/// product of sampled sup norms of the member differences (empty members
/// contribute 1).
double g_k(const QuasiperiodicField& f, const TranslationTuple& T, const SupSampler& sampler = {},
           int max_k = 6);

/// The recursion F_1 = |Delta_{y1 z1} f|,
/// F_j = |Delta_{T_j} f| + sum_{m<j} sum_{zeta in P_{m,j}} |Delta_{zeta^c(T_j)} f| F_m(zeta(T_j)).
double f_k(const QuasiperiodicField& f, const TranslationTuple& T, const SupSampler& sampler = {},
           int max_k = 6);

/// Knobs of the nested sup/inf searches. Each infimum over z evaluates the
/// objective at the best `candidates` near returns of the orbit (see
/// near_returns) and refines around the winner. Cost grows like
/// (torus_points^m * (candidates + refinement))^k.
struct SearchConfig {
  int torus_points = 8;    // y samples per torus dimension
  int ball_points = 16;    // z lattice steps across [-R, R] (d >= 2; d = 1 cells are finer)
  int candidates = 4;      // near returns tried per infimum
  int refine_iters = 20;   // golden-section iterations around the best candidate
  SupSampler sup;          // x samples for sup norms
  int max_k = 4;           // nested search guard
  int quad_points = 32;    // omega: midpoint rule points per dimension on B_1
  int omega_torus_points = 16;  // omega: z' samples per torus dimension
};

/// sup_{y1} inf_{z1} ... sup_{yk} inf_{zk} G_k(f, T_k), y on the torus lift,
/// z in the ball B_R. Throws ResonanceError for a resonant winding.
RhoEstimate rho_k(const QuasiperiodicField& f, double R, int k, const SearchConfig& cfg = {});

/// min over k <= min(k_max, floor R) of C^k k! rho_k(f, R / k).
RhoEstimate rho_star(const QuasiperiodicField& f, double R, double C = 2.0, int k_max = 4,
                     const SearchConfig& cfg = {});

/// sup_{z'} integral over B_1(z') of |Delta_T f|, midpoint rule with
/// quad_points^d cells on the bounding box of B_1, z' on the torus lift.
double omega(const QuasiperiodicField& f, const TranslationTuple& T, int quad_points,
             int torus_points);

/// sup_{z'} ||f||_{L^1(B_1(z'))} with the same quadrature as omega.
double ball_l1_sup(const QuasiperiodicField& f, int quad_points, int torus_points);

/// Nested sup/inf of omega(f, T_k).
RhoEstimate omega_k(const QuasiperiodicField& f, double R, int k, const SearchConfig& cfg = {});

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

}  // namespace aplab

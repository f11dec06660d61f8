#include "aplab/diffcalc.hpp"

#include "aplab/sampling.hpp"

#include <algorithm>
#include <bit>
#include <complex>
#include <functional>
#include <limits>

namespace aplab {

using Complex = std::complex<double>;

// ---------------------------------------------------------------- tuples

TranslationTuple::TranslationTuple(std::vector<TranslationPair> pairs) : pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw ValidationError("TranslationTuple: k must be >= 1");
  const Index d = pairs_.front().y.size();
  for (const auto& p : pairs_) {
    if (p.y.size() != d || p.z.size() != d)
      throw ValidationError("TranslationTuple: inconsistent dimensions");
    if (!p.y.allFinite() || !p.z.allFinite())
      throw ValidationError("TranslationTuple: non-finite translation");
  }
}

PartitionIndex::PartitionIndex(std::uint32_t mask, int k) : mask_(mask), k_(k) {
  if (k < 0 || k > 31) throw ValidationError("PartitionIndex: k out of range");
  if (k < 32 && (mask >> k) != 0) throw ValidationError("PartitionIndex: member beyond k");
}

int PartitionIndex::size() const { return std::popcount(mask_); }

std::vector<int> PartitionIndex::members() const {
  std::vector<int> out;
  for (int j = 0; j < k_; ++j)
    if (mask_ & (1u << j)) out.push_back(j + 1);
  return out;
}

PartitionIndex PartitionIndex::complement() const {
  const std::uint32_t full = k_ == 0 ? 0u : ((1u << k_) - 1u);
  return PartitionIndex(full & ~mask_, k_);
}

std::vector<PartitionIndex> partitions(int j, int k) {
  if (k < 0 || j < 0 || j > k) throw ValidationError("partitions: need 0 <= j <= k");
  std::vector<PartitionIndex> out;
  std::vector<int> comb(static_cast<std::size_t>(j));
  for (int i = 0; i < j; ++i) comb[static_cast<std::size_t>(i)] = i;
  while (true) {
    std::uint32_t mask = 0;
    for (int c : comb) mask |= 1u << c;
    out.emplace_back(mask, k);
    int i = j - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == k - j + i) --i;
    if (i < 0) break;
    ++comb[static_cast<std::size_t>(i)];
    for (int t = i + 1; t < j; ++t)
      comb[static_cast<std::size_t>(t)] = comb[static_cast<std::size_t>(t - 1)] + 1;
  }
  return out;
}

PartitionFamilies::PartitionFamilies(int k, std::vector<std::uint32_t> masks)
    : k_(k), masks_(std::move(masks)) {}

bool PartitionFamilies::is_disjoint(std::size_t i) const {
  std::uint32_t seen = 0;
  for (std::uint32_t m : (*this)[i]) {
    if (seen & m) return false;
    seen |= m;
  }
  return true;
}

PartitionFamilies partition_families(int k, int max_k) {
  if (k < 1) throw ValidationError("partition_families: k must be >= 1");
  if (k > max_k)
    throw GuardError("partition_families: k = " + std::to_string(k) + " exceeds the guard " +
                     std::to_string(max_k));
  std::vector<std::vector<std::uint32_t>> by_size(static_cast<std::size_t>(k + 1));
  for (int j = 0; j <= k; ++j)
    for (const auto& p : partitions(j, k)) by_size[static_cast<std::size_t>(j)].push_back(p.mask());

  std::vector<std::uint32_t> flat;
  std::vector<std::uint32_t> current(static_cast<std::size_t>(k));
  // Depth-first over positions; `left` is the size budget still to place.
  std::function<void(int, int)> place = [&](int pos, int left) {
    if (pos == k) {
      if (left == 0) flat.insert(flat.end(), current.begin(), current.end());
      return;
    }
    for (int j = 0; j <= left; ++j)
      for (std::uint32_t m : by_size[static_cast<std::size_t>(j)]) {
        current[static_cast<std::size_t>(pos)] = m;
        place(pos + 1, left - j);
      }
  };
  place(0, k);
  return PartitionFamilies(k, std::move(flat));
}

// ----------------------------------------------------------- differences

QuasiperiodicField difference(const QuasiperiodicField& f, const VectorXd& y, const VectorXd& z) {
  return f.difference(y, z);
}

QuasiperiodicField iterated_difference(const QuasiperiodicField& f, const TranslationTuple& T) {
  QuasiperiodicField out = f;
  for (const auto& p : T.pairs()) out = out.difference(p.y, p.z);
  return out;
}

int SupSampler::points_for_order(int order) const {
  int n = base_points;
  if (double_per_order)
    for (int i = 1; i < order && n < max_points; ++i) n *= 2;
  return std::min(n, std::max(base_points, max_points));
}

double unit_ball_volume(int d) {
  return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

namespace {

// Complex-amplitude form f(x) = Re sum_k B_k exp(2 pi i k.alpha), alpha = M x.
struct ModeSet {
  int m = 0;
  std::vector<VectorXi> freq;
  std::vector<Complex> amp;

  static ModeSet from(const TrigPolynomial& p) {
    ModeSet s;
    s.m = p.torus_dim();
    for (const auto& t : p.terms()) {
      s.freq.push_back(t.k);
      s.amp.emplace_back(t.c, -t.s);
    }
    return s;
  }

  // exp(2 pi i k.beta) for every mode.
  std::vector<Complex> phases(const VectorXd& beta) const {
    std::vector<Complex> out(freq.size());
    for (std::size_t i = 0; i < freq.size(); ++i)
      out[i] = std::polar(1.0, kTwoPi * freq[i].cast<double>().dot(beta));
    return out;
  }

  // Half-difference multipliers (e^{i k.beta} - e^{i k.gamma}) / 2.
  std::vector<Complex> diff_factors(const VectorXd& beta, const VectorXd& gamma) const {
    auto pb = phases(beta);
    const auto pg = phases(gamma);
    for (std::size_t i = 0; i < pb.size(); ++i) pb[i] = 0.5 * (pb[i] - pg[i]);
    return pb;
  }

  // max |Re sum B_k e^{2 pi i k.alpha}| over the lattice {j/n}^m.
  double sup_abs(const std::vector<Complex>& b, int n) const {
    bool any = false;
    for (const auto& v : b)
      if (v != Complex(0.0)) any = true;
    if (!any) return 0.0;
    Index total = 1;
    for (int i = 0; i < m; ++i) total *= n;
    std::vector<double> values(static_cast<std::size_t>(total), 0.0);
    std::vector<Complex> table(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) table[static_cast<std::size_t>(j)] = std::polar(1.0, kTwoPi * j / n);
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::vector<int> step(static_cast<std::size_t>(m));
    for (std::size_t t = 0; t < freq.size(); ++t) {
      if (b[t] == Complex(0.0)) continue;
      for (int i = 0; i < m; ++i) step[static_cast<std::size_t>(i)] = ((freq[t][i] % n) + n) % n;
      std::fill(idx.begin(), idx.end(), 0);
      int phase = 0;
      for (Index p = 0; p < total; ++p) {
        const Complex& e = table[static_cast<std::size_t>(phase)];
        values[static_cast<std::size_t>(p)] += b[t].real() * e.real() - b[t].imag() * e.imag();
        for (int i = m - 1; i >= 0; --i) {
          phase = (phase + step[static_cast<std::size_t>(i)]) % n;
          if (++idx[static_cast<std::size_t>(i)] < n) break;
          idx[static_cast<std::size_t>(i)] = 0;
        }
      }
    }
    double best = 0.0;
    for (double v : values) best = std::max(best, std::abs(v));
    return best;
  }
};

// Set partitions of {0, ..., k-1} as lists of block masks.
std::vector<std::vector<std::uint32_t>> set_partitions(int k) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<int> block(static_cast<std::size_t>(k), 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == k) {
      std::vector<std::uint32_t> masks(static_cast<std::size_t>(used), 0u);
      for (int j = 0; j < k; ++j) masks[static_cast<std::size_t>(block[static_cast<std::size_t>(j)])] |= 1u << j;
      out.push_back(std::move(masks));
      return;
    }
    for (int b = 0; b <= used && b < k; ++b) {
      block[static_cast<std::size_t>(i)] = b;
      rec(i + 1, std::max(used, b + 1));
    }
  };
  rec(0, 0);
  return out;
}

// Sampled sup norms of Delta_S f for every nonempty subset S of the pairs.
std::vector<double> subset_norms(const ModeSet& modes,
                                 const std::vector<std::vector<Complex>>& factors,
                                 const SupSampler& sampler) {
  const int k = static_cast<int>(factors.size());
  const std::uint32_t count = 1u << k;
  std::vector<double> norms(count, 1.0);
  std::vector<Complex> b(modes.amp.size());
  for (std::uint32_t mask = 1; mask < count; ++mask) {
    for (std::size_t t = 0; t < b.size(); ++t) {
      Complex v = modes.amp[t];
      for (int j = 0; j < k; ++j)
        if (mask & (1u << j)) v *= factors[static_cast<std::size_t>(j)][t];
      b[t] = v;
    }
    norms[mask] = modes.sup_abs(b, sampler.points_for_order(std::popcount(mask)));
  }
  return norms;
}

double g_from_norms(const std::vector<double>& norms, const std::vector<std::vector<std::uint32_t>>& parts) {
  double best = 0.0;
  for (const auto& p : parts) {
    double prod = 1.0;
    for (std::uint32_t m : p) prod *= norms[m];
    best = std::max(best, prod);
  }
  return best;
}

double f_from_norms(const std::vector<double>& norms, int k) {
  const std::uint32_t count = 1u << k;
  std::vector<double> F(count, 0.0);
  // Masks in increasing popcount order so sub-tuples are ready.
  std::vector<std::uint32_t> order;
  for (std::uint32_t m = 1; m < count; ++m) order.push_back(m);
  std::stable_sort(order.begin(), order.end(),
                   [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) < std::popcount(b); });
  for (std::uint32_t S : order) {
    double value = norms[S];
    // Proper nonempty subsets zeta of S.
    for (std::uint32_t z = (S - 1) & S; z != 0; z = (z - 1) & S) value += norms[S & ~z] * F[z];
    F[S] = value;
  }
  return F[count - 1];
}

std::vector<std::vector<Complex>> pair_factors(const ModeSet& modes, const QuasiperiodicField& f,
                                               const TranslationTuple& T) {
  std::vector<std::vector<Complex>> factors;
  for (const auto& p : T.pairs())
    factors.push_back(modes.diff_factors(f.winding().lift(p.y), f.winding().lift(p.z)));
  return factors;
}

void check_tuple(const QuasiperiodicField& f, const TranslationTuple& T, int max_k) {
  if (T.size() > max_k)
    throw GuardError("k = " + std::to_string(T.size()) + " exceeds the guard " + std::to_string(max_k));
  if (T[0].y.size() != f.dim()) throw ValidationError("translation dimension != field dimension");
}

}  // namespace

double g_k(const QuasiperiodicField& f, const TranslationTuple& T, const SupSampler& sampler,
           int max_k) {
  check_tuple(f, T, max_k);
  const ModeSet modes = ModeSet::from(f.lifted());
  const auto norms = subset_norms(modes, pair_factors(modes, f, T), sampler);
  return g_from_norms(norms, set_partitions(T.size()));
}

double f_k(const QuasiperiodicField& f, const TranslationTuple& T, const SupSampler& sampler,
           int max_k) {
  check_tuple(f, T, max_k);
  const ModeSet modes = ModeSet::from(f.lifted());
  const auto norms = subset_norms(modes, pair_factors(modes, f, T), sampler);
  return f_from_norms(norms, T.size());
}

// --------------------------------------------------------- omega helpers

namespace {

// Midpoint rule on [-1,1]^d restricted to the unit ball.
struct BallQuadrature {
  std::vector<VectorXd> points;
  double weight = 0.0;

  BallQuadrature(int d, int n) {
    const double h = 2.0 / n;
    weight = std::pow(h, d);
    VectorXi j = VectorXi::Zero(d);
    VectorXd x(d);
    while (true) {
      for (int i = 0; i < d; ++i) x[i] = -1.0 + h * (j[i] + 0.5);
      if (x.norm() <= 1.0) points.push_back(x);
      int i = d - 1;
      while (i >= 0 && j[i] == n - 1) j[i--] = 0;
      if (i < 0) break;
      ++j[i];
    }
  }
};

// sup over z' on the torus lattice of sum_q w |Re sum_k b_k e^{2 pi i k.(z' + M x_q)}|.
double ball_l1_sup_modes(const ModeSet& modes, const std::vector<Complex>& b,
                         const MatrixXd& M, const BallQuadrature& quad, int torus_points) {
  const std::size_t K = b.size();
  if (K == 0) return 0.0;
  // E(q, k) = exp(2 pi i k . M x_q)
  std::vector<Complex> E(quad.points.size() * K);
  for (std::size_t q = 0; q < quad.points.size(); ++q) {
    const VectorXd alpha = M * quad.points[q];
    for (std::size_t t = 0; t < K; ++t)
      E[q * K + t] = std::polar(1.0, kTwoPi * modes.freq[t].cast<double>().dot(alpha));
  }
  double best = 0.0;
  std::vector<Complex> shifted(K);
  for_each_torus_point(modes.m, torus_points, [&](const VectorXd& gamma) {
    const auto ph = modes.phases(gamma);
    for (std::size_t t = 0; t < K; ++t) shifted[t] = b[t] * ph[t];
    double integral = 0.0;
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      double v = 0.0;
      for (std::size_t t = 0; t < K; ++t) {
        const Complex& e = E[q * K + t];
        v += shifted[t].real() * e.real() - shifted[t].imag() * e.imag();
      }
      integral += std::abs(v);
    }
    best = std::max(best, integral * quad.weight);
  });
  return best;
}

}  // namespace

double omega(const QuasiperiodicField& f, const TranslationTuple& T, int quad_points,
             int torus_points) {
  const ModeSet modes = ModeSet::from(f.lifted());
  std::vector<Complex> b = modes.amp;
  for (const auto& fac : pair_factors(modes, f, T))
    for (std::size_t t = 0; t < b.size(); ++t) b[t] *= fac[t];
  const BallQuadrature quad(f.dim(), quad_points);
  return ball_l1_sup_modes(modes, b, f.winding().matrix(), quad, torus_points);
}

double ball_l1_sup(const QuasiperiodicField& f, int quad_points, int torus_points) {
  const ModeSet modes = ModeSet::from(f.lifted());
  const BallQuadrature quad(f.dim(), quad_points);
  return ball_l1_sup_modes(modes, modes.amp, f.winding().matrix(), quad, torus_points);
}

// ------------------------------------------------------- nested searches

namespace {

void validate_search(const QuasiperiodicField& f, double R, int k, const SearchConfig& cfg) {
  if (!(R >= 1.0)) throw ValidationError("R must be >= 1");
  if (k < 1) throw ValidationError("k must be >= 1");
  if (k > cfg.max_k)
    throw GuardError("k = " + std::to_string(k) + " exceeds the nested search guard " +
                     std::to_string(cfg.max_k));
  if (cfg.torus_points < 1 || cfg.ball_points < 2 || cfg.sup.base_points < 2)
    throw ValidationError("sampler resolutions too small");
  f.winding().require_nonresonant();
}

// sup over torus y_j, inf over ball z_j, nested k deep; leaf(factors).
double nested_search(const ModeSet& modes, const WindingMatrix& W, double R, int k,
                     const SearchConfig& cfg,
                     const std::function<double(const std::vector<std::vector<Complex>>&)>& leaf) {
  std::vector<std::vector<Complex>> factors(static_cast<std::size_t>(k));
  const MatrixXd& M = W.matrix();
  SigmaConfig near;
  near.ball_points = cfg.ball_points;
  std::function<double(int)> level = [&](int j) -> double {
    if (j == k) return leaf(factors);
    double sup = 0.0;
    for_each_torus_point(modes.m, cfg.torus_points, [&](const VectorXd& beta) {
      const auto pb = modes.phases(beta);
      auto objective = [&](const VectorXd& z) {
        const auto pg = modes.phases(M * z);
        auto& fac = factors[static_cast<std::size_t>(j)];
        fac.resize(pb.size());
        for (std::size_t t = 0; t < pb.size(); ++t) fac[t] = 0.5 * (pb[t] - pg[t]);
        return level(j + 1);
      };
      BallMinimum best;
      best.value = std::numeric_limits<double>::infinity();
      double cell = 0.0;
      for (const auto& c : near_returns(W, beta, R, cfg.candidates, near)) {
        const double v = objective(c.z);
        if (v < best.value) {
          best.value = v;
          best.argmin = c.z;
          cell = c.cell;
        }
      }
      if (cfg.refine_iters > 0 && best.value > 0.0)
        best = refine_in_ball(R, best, cell, cfg.refine_iters, objective);
      sup = std::max(sup, best.value);
    });
    return sup;
  };
  return level(0);
}

RhoEstimate make_estimate(EstimateKind kind, int k, double R, double value, const QuasiperiodicField& f,
                          const SearchConfig& cfg) {
  RhoEstimate est;
  est.kind = kind;
  est.k = k;
  est.R = R;
  est.value = value;
  long ty = 1;
  for (int i = 0; i < f.winding().torus_dim(); ++i) ty *= cfg.torus_points;
  est.res_y = ty;
  SigmaConfig near;
  near.ball_points = cfg.ball_points;
  est.res_z = near_return_resolution(f.winding(), R, near);
  est.direction = BoundDirection::two_sided_unresolved;
  return est;
}

}  // namespace

RhoEstimate rho_k(const QuasiperiodicField& f, double R, int k, const SearchConfig& cfg) {
  validate_search(f, R, k, cfg);
  count_work();
  const ModeSet modes = ModeSet::from(f.lifted());
  const auto parts = set_partitions(k);
  const double value = nested_search(
      modes, f.winding(), R, k, cfg, [&](const std::vector<std::vector<Complex>>& fac) {
        return g_from_norms(subset_norms(modes, fac, cfg.sup), parts);
      });
  return make_estimate(EstimateKind::rho_k, k, R, value, f, cfg);
}

RhoEstimate rho_star(const QuasiperiodicField& f, double R, double C, int k_max,
                     const SearchConfig& cfg) {
  if (!(R >= 1.0)) throw ValidationError("rho_star: R must be >= 1");
  if (!(C >= 1.0)) throw ValidationError("rho_star: C must be >= 1");
  if (k_max < 1 || k_max > cfg.max_k)
    throw GuardError("rho_star: k_max must lie in [1, " + std::to_string(cfg.max_k) + "]");
  const int top = std::min(k_max, static_cast<int>(std::floor(R)));
  RhoEstimate best;
  best.value = std::numeric_limits<double>::infinity();
  double factorial = 1.0;
  for (int k = 1; k <= top; ++k) {
    factorial *= k;
    const RhoEstimate rk = rho_k(f, R / k, k, cfg);
    const double v = std::pow(C, k) * factorial * rk.value;
    if (v < best.value) {
      best = rk;
      best.value = v;
      best.argmin_k = k;
    }
  }
  best.kind = EstimateKind::rho_star;
  best.R = R;
  best.k = best.argmin_k;
  return best;
}

RhoEstimate omega_k(const QuasiperiodicField& f, double R, int k, const SearchConfig& cfg) {
  validate_search(f, R, k, cfg);
  if (cfg.quad_points < 2 || cfg.omega_torus_points < 1)
    throw ValidationError("omega_k: quadrature resolution too small");
  count_work();
  const ModeSet modes = ModeSet::from(f.lifted());
  const BallQuadrature quad(f.dim(), cfg.quad_points);
  const MatrixXd& M = f.winding().matrix();
  std::vector<Complex> b(modes.amp.size());
  const double value =
      nested_search(modes, f.winding(), R, k, cfg, [&](const std::vector<std::vector<Complex>>& fac) {
        for (std::size_t t = 0; t < b.size(); ++t) {
          Complex v = modes.amp[t];
          for (const auto& fj : fac) v *= fj[t];
          b[t] = v;
        }
        return ball_l1_sup_modes(modes, b, M, quad, cfg.omega_torus_points);
      });
  return make_estimate(EstimateKind::omega_k, k, R, value, f, cfg);
}

}  // namespace aplab

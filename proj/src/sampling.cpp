#include "aplab/sampling.hpp"

#include <atomic>
#include <cmath>
#include <limits>

namespace aplab {

namespace {
std::atomic<std::uint64_t> g_work{0};
}

std::uint64_t work_counter() { return g_work.load(); }
void count_work() { g_work.fetch_add(1, std::memory_order_relaxed); }
void reset_work_counter() { g_work.store(0); }


long ball_lattice_size(int d, double R, int n_per_dim) {
  long count = 0;
  for_each_ball_point(d, R, n_per_dim, [&](const VectorXd&) { ++count; });
  return count;
}

std::pair<double, double> golden_section(const std::function<double(double)>& fn, double a,
                                         double b, int iters) {
  constexpr double inv_phi = 0.6180339887498949;
  double best_x = a, best_f = fn(a);
  const double fb = fn(b);
  if (fb < best_f) {
    best_x = b;
    best_f = fb;
  }
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double fc = fn(c), fe = fn(e);
  for (int it = 0; it < iters; ++it) {
    if (fc < best_f) {
      best_f = fc;
      best_x = c;
    }
    if (fe < best_f) {
      best_f = fe;
      best_x = e;
    }
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = fn(e);
    }
  }
  if (fc < best_f) {
    best_f = fc;
    best_x = c;
  }
  if (fe < best_f) {
    best_f = fe;
    best_x = e;
  }
  return {best_x, best_f};
}

BallMinimum ball_minimize(int d, double R, int n_per_dim, int refine_iters,
                          const std::function<double(const VectorXd&)>& objective) {
  BallMinimum best;
  best.value = std::numeric_limits<double>::infinity();
  for_each_ball_point(d, R, n_per_dim, [&](const VectorXd& z) {
    const double v = objective(z);
    if (v < best.value) {
      best.value = v;
      best.argmin = z;
    }
  });
  if (refine_iters <= 0 || best.value == 0.0) return best;
  return refine_in_ball(R, best, 2.0 * R / n_per_dim, refine_iters, objective);
}

BallMinimum refine_in_ball(double R, BallMinimum start, double step, int refine_iters,
                           const std::function<double(const VectorXd&)>& objective) {
  BallMinimum best = std::move(start);
  const int d = static_cast<int>(best.argmin.size());
  // Coordinate-wise golden section inside the ball; one sweep per axis.
  const int sweeps = d == 1 ? 1 : 2;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int axis = 0; axis < d; ++axis) {
      VectorXd z = best.argmin;
      const double others = (z.squaredNorm() - z[axis] * z[axis]);
      const double half = std::sqrt(std::max(0.0, R * R - others));
      const double lo = std::max(-half, z[axis] - step);
      const double hi = std::min(half, z[axis] + step);
      if (!(hi > lo)) continue;
      auto line = [&](double s) {
        z[axis] = s;
        return objective(z);
      };
      const auto [x, fx] = golden_section(line, lo, hi, refine_iters);
      if (fx < best.value) {
        best.value = fx;
        best.argmin[axis] = x;
      }
    }
  }
  return best;
}

}  // namespace aplab

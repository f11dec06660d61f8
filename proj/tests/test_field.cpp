#include <doctest.h>

#include "aplab/field.hpp"
#include "aplab/fixtures.hpp"
#include "aplab/fit.hpp"

#include <random>

using namespace aplab;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TrigPolynomial random_poly(std::mt19937_64& rng, int m, int terms, int kmax) {
  std::uniform_int_distribution<int> kd(-kmax, kmax);
  std::uniform_real_distribution<double> ad(-1.0, 1.0);
  TrigPolynomial p(m);
  for (int t = 0; t < terms; ++t) {
    VectorXi k(m);
    for (int i = 0; i < m; ++i) k[i] = kd(rng);
    p += TrigPolynomial::mode(k, ad(rng), ad(rng));
  }
  return p;
}

}  // namespace

TEST_CASE("eval_field on constant and one-dimensional fixtures") {
  const auto c = fixtures::constant(2);
  CHECK(c(vec({0.3, -7.1})).isApprox(MatrixXd::Identity(2, 2)));

  const auto a = fixtures::cos1d();
  CHECK(a(vec({0.0}))(0, 0) == doctest::Approx(3.0).epsilon(1e-15));

  // Independent scalar summation for the golden field at x = 1.
  const double phi = fixtures::kGolden;
  const double expected = 2.5 + 0.5 * std::cos(kTwoPi * 1.0) + 0.5 * std::cos(kTwoPi * phi);
  CHECK(fixtures::golden1d()(vec({1.0}))(0, 0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("lifted_eval: constants, quarter period and periodicity") {
  CHECK(lifted_eval(TrigPolynomial::constant(3, 1.0), vec({0.1, 0.2, 0.3})) == 1.0);
  VectorXi k1(2);
  k1 << 1, 0;
  CHECK(std::abs(lifted_eval(TrigPolynomial::mode(k1, 1.0), vec({0.25, 0.7}))) < 1e-15);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto F = random_poly(rng, 3, 6, 4);
    VectorXd alpha = vec({u(rng), u(rng), u(rng)});
    for (int axis = 0; axis < 3; ++axis) {
      VectorXd shifted = alpha;
      shifted[axis] += 1.0;
      CHECK(std::abs(lifted_eval(F, alpha) - lifted_eval(F, shifted)) < 1e-12);
    }
  }
}

TEST_CASE("TrigPolynomial rejects duplicate frequencies after sign canonicalization") {
  VectorXi k(2), mk(2);
  k << 1, 2;
  mk << -1, -2;
  CHECK_THROWS_AS(TrigPolynomial(2, {TrigTerm{k, 1.0, 0.0}, TrigTerm{mk, 0.5, 0.0}}),
                  ValidationError);
}

TEST_CASE("derivative_norm_bound") {
  CHECK(derivative_norm_bound(TrigPolynomial::constant(2, 4.0), 1) == 0.0);
  VectorXi k(2);
  k << 1, 0;
  CHECK(derivative_norm_bound(TrigPolynomial::mode(k, 1.0), 1) == doctest::Approx(kTwoPi));

  // Two modes; dense-grid maximum of every analytic second partial.
  VectorXi ka(2), kb(2);
  ka << 1, 2;
  kb << 3, -1;
  TrigPolynomial F(2, {TrigTerm{ka, 0.7, -0.2}, TrigTerm{kb, 0.3, 0.4}});
  const double bound = derivative_norm_bound(F, 2);
  const double expected = (0.9) * std::pow(kTwoPi * 3, 2) + (0.7) * std::pow(kTwoPi * 4, 2);
  CHECK(bound == doctest::Approx(expected));
  double dense_max = 0.0;
  const int n = 200;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double a1 = double(i) / n, a2 = double(j) / n;
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) {
          double v = 0.0;
          for (const auto& t : F.terms()) {
            const double th = kTwoPi * (t.k[0] * a1 + t.k[1] * a2);
            const double w = -kTwoPi * kTwoPi * t.k[p] * t.k[q];
            v += w * (t.c * std::cos(th) + t.s * std::sin(th));
          }
          dense_max = std::max(dense_max, std::abs(v));
        }
    }
  CHECK(dense_max <= bound);
}

TEST_CASE("chi_m tail mass") {
  std::mt19937_64 rng(3);
  const auto F = random_poly(rng, 3, 5, 2);
  CHECK(chi_m(F, 3) == 0.0);
  VectorXi k2(2);
  k2 << 0, 1;
  CHECK(chi_m(TrigPolynomial::mode(k2, 1.0), 1) == doctest::Approx(1.0));

  // Dense-grid sup of the tail terms (frequencies touching coordinate 2)
  // must not exceed the bound; zeroing the coordinate instead costs at most 2x.
  VectorXi ka(2), kb(2), kc(2);
  ka << 1, 0;
  kb << 1, 1;
  kc << 0, 2;
  TrigPolynomial G(2, {TrigTerm{ka, 0.8, 0.1}, TrigTerm{kb, 0.3, -0.2}, TrigTerm{kc, 0.1, 0.25}});
  TrigPolynomial head(2, {TrigTerm{ka, 0.8, 0.1}});
  const double bound = chi_m(G, 1);
  CHECK(bound == doctest::Approx(0.5 + 0.35));
  double tail_sup = 0.0, zeroed_sup = 0.0;
  for (int i = 0; i < 256; ++i)
    for (int j = 0; j < 256; ++j) {
      const VectorXd a = vec({i / 256.0, j / 256.0});
      const VectorXd pa = vec({i / 256.0, 0.0});
      tail_sup = std::max(tail_sup, std::abs(G(a) - head(a)));
      zeroed_sup = std::max(zeroed_sup, std::abs(G(a) - G(pa)));
    }
  CHECK(tail_sup <= bound + 1e-12);
  CHECK(zeroed_sup <= 2.0 * bound + 1e-12);
}

TEST_CASE("diophantine_constant") {
  const auto one = WindingMatrix::identity(1);
  const auto rep = diophantine_constant(one, 1.0, 100);
  CHECK(rep.A_est == doctest::Approx(1.0));
  CHECK(std::abs(rep.argmin_z[0]) == 1);

  // Exhaustive lattice scan oracle for the golden winding.
  const double phi = fixtures::kGolden;
  double oracle = 1e300;
  for (int z1 = -200; z1 <= 200; ++z1)
    for (int z2 = -200; z2 <= 200; ++z2) {
      if (z1 == 0 && z2 == 0) continue;
      const double v = std::abs(z1 + phi * z2) * std::hypot(double(z1), double(z2));
      oracle = std::min(oracle, v);
    }
  const auto golden = diophantine_constant(fixtures::golden_winding(), 1.0, 200);
  CHECK(golden.A_est == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(golden.A_est > 0.0);

  MatrixXd resonant(2, 1);
  resonant << 1.0, 0.5;
  CHECK_THROWS_AS(diophantine_constant(WindingMatrix(resonant), 1.0, 10), ResonanceError);
  CHECK_THROWS_AS(diophantine_constant(WindingMatrix(resonant), 2.5, 10), ResonanceError);
}

TEST_CASE("diophantine_constant is antitone in the search radius") {
  double previous = 1e300;
  for (int Z : {1, 2, 5, 10, 20, 50, 100}) {
    const double a = diophantine_constant(fixtures::golden_winding(), 1.0, Z).A_est;
    CHECK(a <= previous);
    previous = a;
  }
}

TEST_CASE("sigma: periodic case and resonance") {
  const auto est = sigma(WindingMatrix::identity(1), 2.0);
  CHECK(est.value < 1e-12);
  CHECK(est.kind == EstimateKind::sigma);
  MatrixXd resonant(2, 1);
  resonant << 1.0, 0.5;
  CHECK_THROWS_AS(sigma(WindingMatrix(resonant), 4.0), ResonanceError);
  CHECK_THROWS_AS(sigma(WindingMatrix::identity(1), 0.5), ValidationError);
}

TEST_CASE("sigma is monotone in R") {
  SigmaConfig cfg;
  cfg.torus_points = 24;
  const auto M = fixtures::golden_winding();
  for (double R : {1.0, 3.0, 10.0, 30.0}) {
    CHECK(sigma(M, 2 * R, cfg).value <= sigma(M, R, cfg).value + 1e-15);
  }
}

TEST_CASE("sigma matches a dense brute-force scan at 4x resolution") {
  SigmaConfig cfg;
  cfg.torus_points = 8;
  const auto M = fixtures::golden_winding();
  const double R = 10.0;
  const double est = sigma(M, R, cfg).value;

  const double phi = fixtures::kGolden;
  const int ny = 32;
  const int nz = 100000;
  double oracle = 0.0;
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < ny; ++j) {
      const double b1 = double(i) / ny, b2 = double(j) / ny;
      double inf = 1.0;
      for (int s = 0; s <= nz; ++s) {
        const double z = -R + 2.0 * R * s / nz;
        inf = std::min(inf, std::max(dist_to_int(b1 - z), dist_to_int(b2 - phi * z)));
      }
      oracle = std::max(oracle, inf);
    }
  CHECK(est <= 2.0 * oracle);
  CHECK(oracle <= 2.0 * est);
}

TEST_CASE("sigma decays with the Diophantine rate for the golden winding") {
  const auto M = fixtures::golden_winding();
  const auto dio = diophantine_constant(M, 1.0, 100);
  CHECK(dio.A_est > 0.0);
  std::vector<double> rs, ss;
  SigmaConfig cfg;
  cfg.torus_points = 32;
  for (double R = 4; R <= 256; R *= 2) {
    rs.push_back(R);
    ss.push_back(sigma(M, R, cfg).value);
  }
  const double slope = loglog_fit(rs, ss).slope;
  const int m = 2;
  CHECK(slope <= -1.0 / (m * (dio.theta + 1.0)) + 0.1);
}

TEST_CASE("CoefficientField: ellipticity is validated at construction") {
  TrigPolynomial g(1, {TrigTerm{VectorXi::Zero(1), 1.2, 0.0},
                       TrigTerm{VectorXi::Ones(1), 0.5, 0.0}});
  CHECK_THROWS_AS(CoefficientField::isotropic(WindingMatrix::identity(1), g, 3.0), ValidationError);
  TrigPolynomial h(1, {TrigTerm{VectorXi::Zero(1), 3.0, 0.0},
                       TrigTerm{VectorXi::Ones(1), 0.5, 0.0}});
  CHECK_THROWS_AS(CoefficientField::isotropic(WindingMatrix::identity(1), h, 3.0), ValidationError);
  CHECK_NOTHROW(CoefficientField::isotropic(WindingMatrix::identity(1), h, 3.5));
}

TEST_CASE("ellipticity sandwich on random points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (const auto& a : {fixtures::golden1d(), fixtures::golden2d(), fixtures::cos2d()}) {
    const int d = a.dim();
    for (int trial = 0; trial < 10000; ++trial) {
      VectorXd x(d);
      for (int i = 0; i < d; ++i) x[i] = u(rng);
      const MatrixXd m = a(x);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
      REQUIRE(es.eigenvalues().minCoeff() >= 1.0 - 1e-12);
      REQUIRE(es.eigenvalues().maxCoeff() <= a.lambda() + 1e-12);
    }
  }
}

TEST_CASE("quasiperiodicity along rational approximants") {
  // q = F_n makes M q = (F_n, golden F_n) within |golden F_n - F_{n+1}| of Z^2.
  const auto a = fixtures::golden1d();
  const double lip = derivative_norm_bound(a.lifted_entry(0, 0), 1);
  long f0 = 1, f1 = 1;
  for (int n = 0; n < 20; ++n) {
    const long next = f0 + f1;
    f0 = f1;
    f1 = next;
    const double gap = dist_to_int(fixtures::kGolden * double(f0));
    for (double x : {0.0, 0.37, 12.5}) {
      const double diff = std::abs(a(vec({x + double(f0)}))(0, 0) - a(vec({x}))(0, 0));
      CHECK(diff <= lip * gap + 1e-9);
    }
  }
}

TEST_CASE("near_returns: sorted, inside the ball, first one is the sigma infimum") {
  const auto M = fixtures::golden_winding();
  const VectorXd beta = vec({0.3, 0.71});
  const auto best = near_returns(M, beta, 12.0, 5);
  REQUIRE(best.size() == 5);
  for (std::size_t i = 1; i < best.size(); ++i) CHECK(best[i - 1].gap <= best[i].gap);
  for (const auto& r : best) {
    CHECK(std::abs(r.z[0]) <= 12.0);
    double gap = 0.0;
    const VectorXd t = beta - M.lift(r.z);
    for (Index i = 0; i < 2; ++i) gap = std::max(gap, dist_to_int(t[i]));
    CHECK(gap == doctest::Approx(r.gap).epsilon(1e-12));
  }
  CHECK(best[0].gap == sigma_inf(M, beta, 12.0, SigmaConfig{}));
}

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Criteria 1-12 write their reports under <work>/run1; criterion 13 repeats
// them under <work>/run2 and compares every CSV byte for byte.

#include "aplab/diffcalc.hpp"
#include "aplab/fixtures.hpp"
#include "aplab/heat.hpp"
#include "aplab/report.hpp"
#include "cli.hpp"
#include "csv_read.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

using namespace aplab;
using testing::read_csv;
namespace fs = std::filesystem;

namespace {

const std::string kSpecs = APLAB_SPEC_DIR;

std::string spec(const std::string& name) { return kSpecs + "/" + name + ".toml"; }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

/// Runs the CLI; a nonzero exit is reported by the caller.
int cli_run(std::vector<std::string> args, const fs::path& out) {
  args.insert(args.begin(), "aplab");
  args.push_back("--out");
  args.push_back(out.string());
  std::ostringstream sink, err;
  const int code = cli::run(args, sink, err);
  if (code != 0 && code != cli::property_flag) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

std::vector<std::string> dyadic(int first, int last) {
  std::vector<std::string> out;
  for (int k = first; k <= last; ++k) out.push_back(format_number(std::ldexp(1.0, -k)));
  return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

VectorXd scalar(double x) {
  VectorXd v(1);
  v[0] = x;
  return v;
}

QuasiperiodicField random_golden(std::mt19937_64& rng, int terms) {
  std::uniform_int_distribution<int> kd(-3, 3);
  std::uniform_real_distribution<double> ad(-1.0, 1.0);
  TrigPolynomial p(2);
  for (int t = 0; t < terms; ++t) {
    VectorXi k(2);
    k << kd(rng), kd(rng);
    bool dup = k.isZero();
    for (const auto& e : p.terms()) dup = dup || e.k == k || e.k == -k;
    if (!dup) p += TrigPolynomial::mode(k, ad(rng), ad(rng));
  }
  return QuasiperiodicField(fixtures::golden_winding(), p);
}

TranslationTuple random_tuple(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<TranslationPair> pairs;
  for (int j = 0; j < k; ++j) pairs.push_back({scalar(u(rng)), scalar(u(rng))});
  return TranslationTuple(pairs);
}

// ---------------------------------------------------------------- criteria

Outcome zero_corrector(const fs::path& dir) {
  double worst = 0.0;
  for (const char* name : {"constant1d", "constant2d"}) {
    const fs::path out = dir / name;
    if (cli_run({"corrector", "--spec", spec(name), "--eps", "0.0625", "--epsL", "8", "--h-max", "0.5"}, out) != 0)
      return {false, std::string("corrector failed on ") + name};
    const auto csv = read_csv(out / "corrector.csv");
    if (csv.at(0, "n") != 256.0) return {false, "unexpected grid size"};
    worst = std::max(worst, csv.at(0, "sup_phi"));
  }
  return {worst <= 1e-9, "d=1,2, n=256: sup|phi| = " + format_number(worst) + " (<= 1e-9)"};
}

Outcome harmonic_mean_oracle(const fs::path& dir) {
  if (cli_run({"effective", "--spec", spec("cos1d"), "--eps", "0.015625", "--h-max", "0.00390625"}, dir) != 0)
    return {false, "effective failed"};
  const double abar = read_csv(dir / "effective.csv").at(0, "abar");
  const double err = std::abs(abar - std::sqrt(3.0));
  return {err <= 1e-3, "abar = " + format_number(abar) + ", |abar - sqrt 3| = " + fmt("%.2e", err) + " (<= 1e-3)"};
}

Outcome boundedness_plateau(const fs::path& dir) {
  if (cli_run(concat({"sweep", "--spec", spec("golden1d"), "--eps"}, dyadic(3, 8)), dir) != 0)
    return {false, "sweep failed or flagged"};
  const double slope = testing::number_after(read_csv(dir / "sweep.csv").note("fit"), "slope=");
  return {slope <= 0.05, "eps = 2^-3..2^-8: slope of log sup|phi| vs log(1/eps) = " + fmt("%.4f", slope) +
                             " (<= 0.05)"};
}

Outcome psi_decay(const fs::path& dir) {
  const int code = cli_run(concat({"psi-decay", "--spec", spec("golden1d"), "--eps"}, dyadic(2, 7)), dir);
  if (code != 0 && code != cli::property_flag) return {false, "psi-decay failed"};
  const auto csv = read_csv(dir / "psi-decay.csv");
  bool monotone = csv.rows.size() == 5;
  for (std::size_t i = 1; i < csv.rows.size(); ++i)
    monotone = monotone && csv.at(i, "sup_psi") < csv.at(i - 1, "sup_psi");
  const double factor = std::stod(csv.note("step_factor"));
  const double limit = std::pow(2.0, -0.1);
  return {monotone && factor <= limit && code == 0,
          std::string("k = 3..7: ") + (monotone ? "strictly decreasing" : "NOT strictly decreasing") +
              ", step factor = " + fmt("%.4f", factor) + " (<= 2^-0.1 = " + fmt("%.4f", limit) + ")"};
}

Outcome periodic_rho1(const fs::path& dir) {
  if (cli_run({"rho", "--spec", spec("cos1d"), "--k", "1", "--R", "2"}, dir) != 0) return {false, "rho failed"};
  const double v = read_csv(dir / "rho.csv").at(0, "value");
  return {std::abs(v) <= 1e-6, "1-periodic, R = 2: rho_1 = " + format_number(v) + " (<= 1e-6)"};
}

Outcome sigma_decay(const fs::path& dir) {
  if (cli_run({"sigma", "--spec", spec("golden1d"), "--R", "4", "8", "16", "32", "64", "128", "256"}, dir) != 0)
    return {false, "sigma failed"};
  const double slope = testing::number_after(read_csv(dir / "sigma.csv").note("fit"), "slope=");
  return {slope <= -0.15, "golden M, R = 4..256: fitted slope = " + fmt("%.4f", slope) + " (<= -0.15)"};
}

Outcome poincare_equality(const fs::path& dir) {
  if (cli_run({"poincare", "--spec", spec("cos1d")}, dir) != 0) return {false, "poincare failed"};
  const auto cos = read_csv(dir / "poincare.csv");
  const double rhs = cos.at(0, "rhs"), o = cos.at(0, "osc");
  bool ok = rhs >= 2.0 && rhs <= 2.02 && std::abs(o - 2.0) <= 1e-3;

  std::mt19937_64 rng(21);
  CsvTable table({"trial", "osc", "rhs"});
  int violations = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const FrequencyField u(random_golden(rng, 4));
    const double lhs = osc(u).value;
    const double bound = multiscale_poincare_rhs(u);
    table.add_row({static_cast<double>(trial), lhs, bound});
    if (lhs > bound) ++violations;
    if (bound > 0.0) worst_ratio = std::max(worst_ratio, lhs / bound);
  }
  table.write((dir / "poincare_random.csv").string(), Provenance{"acceptance-7", "golden-random-seed21", {}});
  ok = ok && violations == 0;
  return {ok, "cos: rhs = " + fmt("%.6f", rhs) + " in [2, 2.02], osc = " + fmt("%.6f", o) +
                  "; 50 random fixtures: " + std::to_string(violations) + " violations, max osc/rhs = " +
                  fmt("%.4f", worst_ratio)};
}

Outcome hermite_l1(const fs::path& dir) {
  std::vector<std::vector<double>> values;
  double C = 0.0;
  for (int d = 1; d <= 2; ++d) {
    const fs::path out = dir / ("d" + std::to_string(d));
    if (cli_run({"hermite", "--n-max", "8", "--t", "0.25", "--d", std::to_string(d)}, out) != 0)
      return {false, "hermite failed"};
    const auto csv = read_csv(out / "hermite.csv");
    std::vector<double> v;
    for (std::size_t i = 0; i < csv.rows.size(); ++i) v.push_back(csv.at(i, "l1"));
    values.push_back(v);
    C = std::max(C, testing::number_after(csv.note("fitted"), "C="));
  }
  bool bound_ok = true;
  for (const auto& v : values)
    for (std::size_t n = 1; n < v.size(); ++n)
      bound_ok = bound_ok && v[n] <= std::pow(C * (1.0 + n), 0.5 * n) * (1.0 + 1e-12);
  const double exact_err = std::abs(values[0][1] - 2.0 / std::sqrt(kPi));
  return {C <= 16.0 && bound_ok && exact_err <= 1e-8,
          "n <= 8, d <= 2: C = " + fmt("%.4f", C) + " (<= 16), bound " + (bound_ok ? "holds" : "FAILS") +
              "; |L1(n=1) - 2/sqrt(pi)| = " + fmt("%.1e", exact_err) + " (<= 1e-8)"};
}

Outcome ergodic_bound(const fs::path& dir) {
  VectorXi e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  const FrequencyField f(QuasiperiodicField(fixtures::golden_winding(),
                                            TrigPolynomial::mode(e1, 0.5) + TrigPolynomial::mode(e2, 0.5)));
  const std::vector<double> R{1.0, 2.0, 4.0, 8.0, 16.0};
  ErgodicFitConfig cfg;
  cfg.search.torus_points = 4;
  cfg.search.refine_iters = 10;
  cfg.search.quad_points = 16;
  cfg.search.omega_torus_points = 8;
  cfg.torus_points = 32;

  std::vector<ErgodicReport> reps;
  double C = 0.0, c = 1.0;
  for (int k = 1; k <= 2; ++k) {
    std::vector<double> ts;
    for (double t : {1.0, 4.0, 16.0, 64.0, 256.0})
      if (t >= k) ts.push_back(t);
    reps.push_back(ergodic_bound_check(f, ts, k, R, cfg));
    C = std::max({C, reps.back().fitted_C, reps.back().fitted_C_grad});
    c = std::min(c, reps.back().fitted_c);
  }

  // Re-evaluate both bounds at the common pair.
  CsvTable table({"k", "t", "lhs_osc", "rhs_osc", "lhs_grad", "rhs_grad"});
  bool holds = true;
  for (const auto& rep : reps) {
    const double Ck = std::pow(C, rep.k);
    for (const auto& row : rep.rows) {
      double best_osc = INFINITY, best_grad = INFINITY;
      for (std::size_t i = 0; i < R.size(); ++i) {
        const double decay = std::exp(-c * row.t / (rep.k * R[i] * R[i])) * rep.l1_sup;
        best_osc = std::min(best_osc, rep.omega_values[i] + decay);
        best_grad = std::min(best_grad, rep.omega_values[i] / std::sqrt(row.t) + decay);
      }
      const double rhs_osc = Ck * best_osc, rhs_grad = Ck * best_grad;
      holds = holds && row.lhs_osc <= rhs_osc * (1 + 1e-12) && row.lhs_grad <= rhs_grad * (1 + 1e-12);
      table.add_row({static_cast<double>(rep.k), row.t, row.lhs_osc, rhs_osc, row.lhs_grad, rhs_grad});
    }
  }
  Provenance p{"acceptance-9", "golden-two-mode", {}};
  p.add("C", C);
  p.add("c", c);
  table.write((dir / "ergodic.csv").string(), p);
  return {holds && C <= 1e3 && c > 0.0, "k = 1,2, t = 1..256: common C = " + fmt("%.4g", C) +
                                             " (<= 1e3), c = " + fmt("%.4g", c) + ", LHS <= RHS " +
                                             (holds ? "at every t" : "FAILS")};
}

Outcome algebraic_identities(const fs::path& dir) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  CsvTable table({"check", "k", "max_error", "worst_ratio"});

  double product_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_golden(rng, 4), g = random_golden(rng, 4);
    const QuasiperiodicField fg(f.winding(), f.lifted() * g.lifted());
    const VectorXd y = scalar(u(rng)), z = scalar(u(rng));
    const auto lhs = fg.difference(y, z), df = f.difference(y, z), dg = g.difference(y, z);
    const auto gy = g.translated(y), fz = f.translated(z);
    for (int i = 0; i < 20; ++i) {
      const VectorXd x = scalar(u(rng));
      product_err = std::max(product_err, std::abs(lhs(x) - (df(x) * gy(x) + dg(x) * fz(x))));
    }
  }
  table.add_row({0.0, 1.0, product_err, 0.0});

  double iterated_err = 0.0;
  for (int k = 2; k <= 3; ++k) {
    double err_k = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = random_golden(rng, 4), g = random_golden(rng, 4);
      const QuasiperiodicField fg(f.winding(), f.lifted() * g.lifted());
      const auto T = random_tuple(rng, k);
      const auto lhs = iterated_difference(fg, T);
      auto restrict = [&](const QuasiperiodicField& h, std::uint32_t mask) {
        QuasiperiodicField out = h;
        for (int j = 0; j < k; ++j)
          if (mask & (1u << j)) out = out.difference(T[j].y, T[j].z);
        return out;
      };
      std::vector<std::pair<QuasiperiodicField, QuasiperiodicField>> terms;
      for (int j = 0; j <= k; ++j)
        for (const auto& zeta : partitions(j, k)) {
          VectorXd zsum = VectorXd::Zero(1), ysum = VectorXd::Zero(1);
          for (int i = 0; i < k; ++i) {
            if (zeta.mask() & (1u << i))
              zsum += T[i].z;
            else
              ysum += T[i].y;
          }
          terms.emplace_back(restrict(f.translated(zsum), zeta.complement().mask()),
                             restrict(g.translated(ysum), zeta.mask()));
        }
      for (int i = 0; i < 20; ++i) {
        const VectorXd x = scalar(u(rng));
        double rhs = 0.0;
        for (const auto& [a, b] : terms) rhs += a(x) * b(x);
        err_k = std::max(err_k, std::abs(lhs(x) - rhs));
      }
    }
    table.add_row({1.0, static_cast<double>(k), err_k, 0.0});
    iterated_err = std::max(iterated_err, err_k);
  }

  const auto f = random_golden(rng, 5);
  SupSampler sampler;
  sampler.base_points = 8;
  double worst_ratio = 0.0;
  for (int k = 1; k <= 4; ++k) {
    double factor = std::pow(2.0, k);
    for (int i = 2; i <= k; ++i) factor *= i;
    double ratio_k = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto T = random_tuple(rng, k);
      const double G = g_k(f, T, sampler);
      const double F = f_k(f, T, sampler);
      ratio_k = std::max(ratio_k, G > 0.0 ? F / (factor * G) : (F > 0.0 ? INFINITY : 0.0));
    }
    table.add_row({2.0, static_cast<double>(k), 0.0, ratio_k});
    worst_ratio = std::max(worst_ratio, ratio_k);
  }

  bool counts_ok = true;
  for (int k = 1; k <= 8; ++k) {
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      counts_ok = counts_ok && static_cast<double>(partitions(j, k).size()) == std::round(binom);
      binom = binom * (k - j) / (j + 1);
    }
  }
  table.add_note("checks", "0 product rule, 1 iterated product rule, 2 F_k / (2^k k! G_k)");
  table.write((dir / "identities.csv").string(), Provenance{"acceptance-10", "golden-random-seed15", {}});

  const bool ok = product_err <= 1e-10 && iterated_err <= 1e-10 && worst_ratio <= 1.0 + 1e-12 && counts_ok;
  return {ok, "product rule err = " + fmt("%.1e", product_err) + ", k=2,3 err = " + fmt("%.1e", iterated_err) +
                  " (<= 1e-10); max F_k/(2^k k! G_k) = " + fmt("%.4f", worst_ratio) +
                  " (<= 1); partition counts " + (counts_ok ? "match" : "DIFFER")};
}

Outcome zeta_crosscheck(const fs::path& dir) {
  const int code = cli_run({"zeta-check", "--spec", spec("golden1d"), "--eps", "0.125", "--samples", "10",
                            "--max-relative", "1e-5"},
                           dir);
  if (code != 0 && code != cli::property_flag) return {false, "zeta-check failed"};
  const double worst = std::stod(read_csv(dir / "zeta-check.csv").note("worst_relative"));
  return {worst <= 1e-5 && code == 0, "10 random (y, z): max relative mismatch = " + fmt("%.2e", worst) +
                                          " (<= 1e-5)"};
}

Outcome homogenization_rate(const fs::path& dir) {
  if (cli_run(concat({"rate", "--spec", spec("cos1d"), "--eps"}, dyadic(3, 7)), dir) != 0)
    return {false, "rate failed"};
  const double slope = testing::number_after(read_csv(dir / "rate.csv").note("fit"), "slope=");
  return {slope >= 0.8 && slope <= 1.2, "d = 1, eps = 2^-3..2^-7: L-infinity slope = " + fmt("%.4f", slope) +
                                            " (in [0.8, 1.2])"};
}

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds; 0: none
  std::function<Outcome(const fs::path&)> run;
};

std::vector<Criterion> criteria() {
  return {
      {1, "zero corrector", 10.0, zero_corrector},
      {2, "harmonic mean", 30.0, harmonic_mean_oracle},
      {3, "corrector plateau", 300.0, boundedness_plateau},
      {4, "psi decay", 0.0, psi_decay},
      {5, "periodic rho_1", 0.0, periodic_rho1},
      {6, "sigma decay", 60.0, sigma_decay},
      {7, "multiscale Poincare", 0.0, poincare_equality},
      {8, "heat-kernel L1", 0.0, hermite_l1},
      {9, "ergodic bound", 0.0, ergodic_bound},
      {10, "algebraic identities", 30.0, algebraic_identities},
      {11, "difference corrector", 0.0, zeta_crosscheck},
      {12, "homogenization rate", 0.0, homogenization_rate},
  };
}

std::vector<fs::path> csv_files(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(fs::relative(e.path(), root));
  std::sort(out.begin(), out.end());
  return out;
}

void print(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("criterion %2d %s  %-22s %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "aplab_acceptance";
  fs::remove_all(work);
  int failures = 0;

  auto run_all = [&](const fs::path& root, bool report) {
    for (const auto& c : criteria()) {
      const fs::path dir = root / ("c" + std::string(c.id < 10 ? "0" : "") + std::to_string(c.id));
      fs::create_directories(dir);
      const auto start = std::chrono::steady_clock::now();
      Outcome o;
      try {
        o = c.run(dir);
      } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (!report) continue;
      bool pass = o.pass;
      std::string detail = o.detail + "; " + fmt("%.2f s", secs);
      if (c.time_limit > 0.0) {
        detail += " (< " + fmt("%g", c.time_limit) + " s)";
        pass = pass && secs < c.time_limit;
      }
      if (!pass) ++failures;
      print(c.id, c.name, pass, detail);
    }
  };

  run_all(work / "run1", true);
  run_all(work / "run2", false);

  const auto first = csv_files(work / "run1");
  const auto second = csv_files(work / "run2");
  std::size_t identical = 0;
  std::string mismatch;
  for (const auto& rel : first) {
    if (std::find(second.begin(), second.end(), rel) == second.end()) {
      mismatch = rel.string() + " missing";
      continue;
    }
    if (testing::slurp(work / "run1" / rel) == testing::slurp(work / "run2" / rel))
      ++identical;
    else
      mismatch = rel.string();
  }
  const bool det = !first.empty() && identical == first.size() && first.size() == second.size();
  if (!det) ++failures;
  print(13, "determinism", det,
        std::to_string(identical) + "/" + std::to_string(first.size()) + " CSVs byte-identical across two runs" +
            (mismatch.empty() ? "" : ", differs: " + mismatch));

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}

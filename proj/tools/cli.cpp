#include "cli.hpp"

#include "aplab/corrector.hpp"
#include "aplab/diffcalc.hpp"
#include "aplab/field_spec.hpp"
#include "aplab/heat.hpp"
#include "aplab/homog.hpp"
#include "aplab/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>

namespace aplab::cli {

namespace {

constexpr long kMaxNodes = 1L << 24;

struct Knobs {
  std::string spec;
  std::string out = ".";
  std::vector<int> entry{0, 0};

  // moduli
  std::vector<double> R;
  int k = 1;
  int k_max = 2;
  double C = 2.0;
  int torus_points = 8;
  int ball_points = 16;
  int candidates = 4;
  int sup_points = 16;
  int quad_points = 32;
  int z_max = 16;

  // heat
  std::vector<double> t_list{1.0, 4.0, 16.0, 64.0, 256.0};
  double C_cap = 1e3;
  int nodes = 200;
  double t_min = 1e-4;
  double t_max = 1e3;
  int n_max = 8;
  double t = 0.25;
  int d = 1;

  // corrector
  std::vector<double> eps;
  std::vector<double> direction;
  double epsL = 64.0;
  double h_max = 1.0 / 16.0;
  double tol = 1e-10;
  long max_iters = 0;
  double window = 0.5;
  std::string preconditioner = "line";
  std::string save;

  // zeta-check
  int samples = 10;
  unsigned seed = 1;
  double span = 4.0;
  double max_relative = 1e-5;

  // rate
  long n = 0;
  double p = 2.0;
  double g_constant = 0.0;
  std::vector<double> g_linear;
  double abar_eps = 0.125;

  // fit window [fit_first, fit_last), -1: to the end
  long fit_first = 0;
  long fit_last = -1;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

struct Context {
  const Knobs& k;
  std::optional<FieldSpec> spec;
  Provenance prov;
  std::filesystem::path out;
  std::ostream& log;
  int status = ExitCode::ok;

  const CoefficientField& field() const { return spec->field; }
  int dim() const { return spec->field.dim(); }

  QuasiperiodicField scalar() const { return field().entry(k.entry[0], k.entry[1]); }

  VectorXd direction() const {
    if (k.direction.empty()) return VectorXd::Unit(dim(), 0);
    return Eigen::Map<const VectorXd>(k.direction.data(), static_cast<Index>(k.direction.size()));
  }

  SolveConfig solve() const {
    SolveConfig c;
    c.tol = k.tol;
    c.max_iters = k.max_iters;
    c.window = k.window;
    c.preconditioner = k.preconditioner == "jacobi" ? Preconditioner::jacobi : Preconditioner::line;
    return c;
  }

  SweepConfig sweep() const { return {k.epsL, k.h_max, solve()}; }

  SearchConfig search() const {
    SearchConfig c;
    c.torus_points = k.torus_points;
    c.ball_points = k.ball_points;
    c.candidates = k.candidates;
    c.sup.base_points = k.sup_points;
    c.quad_points = k.quad_points;
    return c;
  }

  std::string path(const std::string& name, const std::string& ext) const {
    return (out / (name + ext)).string();
  }

  void flag(const std::string& what) {
    log << "property flagged: " << what << "\n";
    status = ExitCode::property_flag;
  }
};

// ------------------------------------------------------------- validation

void check_entry(const Context& c) {
  require(c.k.entry.size() == 2, "--entry takes two indices");
  for (int i : c.k.entry) require(i >= 0 && i < c.dim(), "--entry index out of range");
}

void check_R(const Knobs& k) {
  require(!k.R.empty(), "--R list is empty");
  for (double R : k.R) require(std::isfinite(R) && R >= 1.0, "every R must be >= 1");
}

void check_search(const Knobs& k, int order) {
  const SearchConfig defaults;
  require(order >= 1, "--k must be >= 1");
  if (order > defaults.max_k)
    throw GuardError("k = " + std::to_string(order) + " exceeds the nested search guard " +
                     std::to_string(defaults.max_k));
  require(k.torus_points >= 2 && k.ball_points >= 2 && k.candidates >= 1 && k.sup_points >= 2,
          "sampler resolutions too small");
  require(k.quad_points >= 2, "--quad-points must be >= 2");
}

void check_fit(const Knobs& k) {
  require(k.fit_first >= 0, "--fit-first must be >= 0");
  require(k.fit_last == -1 || k.fit_last > k.fit_first, "--fit-last must exceed --fit-first");
}

void check_eps(double eps) { require(std::isfinite(eps) && eps > 0.0 && eps <= 1.0, "eps must lie in (0, 1]"); }

void check_solve(const Context& c) {
  const Knobs& k = c.k;
  require(k.tol > 0.0 && k.tol <= 1e-6, "--tol must lie in (0, 1e-6]");
  require(k.max_iters >= 0, "--max-iters must be >= 0");
  require(k.window > 0.0 && k.window <= 1.0, "--window must lie in (0, 1]");
  require(k.preconditioner == "line" || k.preconditioner == "jacobi",
          "--preconditioner must be line or jacobi");
  require(k.epsL >= 8.0, "--epsL must be >= 8");
  require(k.h_max > 0.0 && std::isfinite(k.h_max), "--h-max must be > 0");
  const VectorXd e = c.direction();
  require(e.size() == c.dim(), "--direction has wrong dimension");
  require(std::abs(e.norm() - 1.0) <= 1e-12, "--direction must be a unit vector");
}

PeriodicGrid checked_grid(const Context& c, double eps) {
  check_eps(eps);
  const PeriodicGrid g = PeriodicGrid::for_eps(c.dim(), eps, c.k.epsL, c.k.h_max);
  if (g.size() > kMaxNodes)
    throw GuardError("grid of " + std::to_string(g.size()) + " nodes exceeds the guard " +
                     std::to_string(kMaxNodes));
  return g;
}

void check_dyadic(const Context& c) {
  const auto& eps = c.k.eps;
  require(eps.size() >= 2, "--eps needs at least two scales");
  require(eps[0] > 0.0 && eps[0] <= 0.5, "scales must lie in (0, 1/2]");
  for (std::size_t i = 1; i < eps.size(); ++i)
    require(std::abs(eps[i] * 2.0 - eps[i - 1]) <= 1e-12 * eps[i - 1],
            "each scale must be half the previous one");
  for (double e : eps) checked_grid(c, e);
}

// ---------------------------------------------------------------- output

std::size_t fit_end(const Knobs& k, std::size_t n) {
  return k.fit_last < 0 ? n : std::min(n, static_cast<std::size_t>(k.fit_last));
}

/// Adds the fit note (always echoing the window) and writes the plot when it
/// has a plottable point.
LogLogFit finish_plot(Context& c, CsvTable& table, Plot plot, const std::string& name) {
  const std::size_t n = plot.series.front().x.size();
  plot.fit_first = static_cast<std::size_t>(c.k.fit_first);
  plot.fit_last = fit_end(c.k, n);
  const LogLogFit fit = plot_fit(plot);
  std::string note = std::string(plot.kind == PlotKind::loglog ? "loglog" : "semilogy") + " " +
                     plot.ylabel + " vs " + plot.xlabel + " points " +
                     std::to_string(plot.fit_first) + ".." + std::to_string(plot.fit_last);
  if (fit.valid)
    note += " slope=" + format_number(fit.slope) + " intercept=" + format_number(fit.intercept);
  else
    note += " no fit";
  table.add_note("fit", note);

  bool plottable = false;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const bool x_ok = plot.kind == PlotKind::semilogy || s.x[i] > 0.0;
      if (x_ok && s.y[i] > 0.0 && std::isfinite(s.y[i])) plottable = true;
    }
  if (plottable) emit_plot(c.path(name, ".svg"), plot);
  return fit;
}

void write_table(Context& c, const CsvTable& table, const std::string& name) {
  table.write(c.path(name, ".csv"), c.prov);
}

void add_estimate(CsvTable& t, const RhoEstimate& e, int k) {
  t.add_row(std::vector<std::string>{std::string(to_string(e.kind)), std::to_string(k),
                                     format_number(e.R), format_number(e.value),
                                     std::to_string(e.res_y), std::to_string(e.res_z),
                                     std::string(to_string(e.direction))});
}

CsvTable estimate_table() { return CsvTable({"kind", "k", "R", "value", "res_y", "res_z", "direction"}); }

void moduli_report(Context& c, const std::string& name, const std::vector<RhoEstimate>& est,
                   bool use_argmin) {
  CsvTable t = estimate_table();
  Plot plot;
  plot.title = name;
  plot.xlabel = "R";
  plot.ylabel = "value";
  plot.series.push_back({name, {}, {}});
  for (const auto& e : est) {
    add_estimate(t, e, use_argmin ? e.argmin_k : e.k);
    plot.series[0].x.push_back(e.R);
    plot.series[0].y.push_back(e.value);
    c.log << name << " R=" << format_number(e.R) << " value=" << format_number(e.value) << "\n";
  }
  finish_plot(c, t, plot, name);
  write_table(c, t, name);
}

// -------------------------------------------------------------- commands

struct Command {
  std::string name;
  std::string help;
  bool needs_spec = true;
  std::function<void(CLI::App&, Knobs&)> options;
  std::function<void(const Context&)> validate;
  std::function<void(Context&)> execute;
};

void search_options(CLI::App& a, Knobs& k) {
  a.add_option("--entry", k.entry, "coefficient entry i j used as the scalar field")->expected(2);
  a.add_option("--R", k.R, "radii");
  a.add_option("--torus-points", k.torus_points, "y samples per torus dimension");
  a.add_option("--ball-points", k.ball_points, "z lattice steps across the ball");
  a.add_option("--candidates", k.candidates, "near returns tried per infimum");
  a.add_option("--sup-points", k.sup_points, "x samples for sup norms");
}

void fit_options(CLI::App& a, Knobs& k) {
  a.add_option("--fit-first", k.fit_first, "first point of the fit window");
  a.add_option("--fit-last", k.fit_last, "one past the last fitted point (-1: all)");
}

void solve_options(CLI::App& a, Knobs& k) {
  a.add_option("--direction", k.direction, "unit direction e (default e_1)");
  a.add_option("--epsL", k.epsL, "box side times eps");
  a.add_option("--h-max", k.h_max, "largest mesh size");
  a.add_option("--tol", k.tol, "relative residual tolerance");
  a.add_option("--max-iters", k.max_iters, "iteration cap (0: 50 n)");
  a.add_option("--window", k.window, "measurement window fraction");
  a.add_option("--preconditioner", k.preconditioner, "line or jacobi");
}

std::vector<Command> commands() {
  std::vector<Command> cmds;

  cmds.push_back({"field-check", "ellipticity, symmetry and Diophantine constant of a spec", true,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--z-max", k.z_max, "largest |z|_inf searched");
                    a.add_option("--torus-points", k.torus_points, "lattice points per torus dimension")
                        ->default_val(64);
                  },
                  [](const Context& c) {
                    require(c.k.z_max >= 1, "--z-max must be >= 1");
                    require(c.k.torus_points >= 2, "--torus-points must be >= 2");
                  },
                  [](Context& c) {
                    const auto& a = c.field();
                    const auto [lo, hi] = a.ellipticity_range(c.k.torus_points);
                    DiophantineReport dio;
                    dio.theta = c.spec->theta;
                    dio.Z_max = c.k.z_max;
                    bool diophantine = true;
                    try {
                      dio = diophantine_constant(a.winding(), c.spec->theta, c.k.z_max);
                    } catch (const ResonanceError&) {
                      throw;
                    } catch (const ValidationError&) {
                      diophantine = false;
                    }
                    CsvTable t({"quantity", "value"});
                    auto row = [&](const std::string& q, const std::string& v) {
                      t.add_row(std::vector<std::string>{q, v});
                      c.log << q << " = " << v << "\n";
                    };
                    row("dim", std::to_string(a.dim()));
                    row("torus_dim", std::to_string(a.winding().torus_dim()));
                    row("lambda", format_number(a.lambda()));
                    row("min_eigenvalue", format_number(lo));
                    row("max_norm", format_number(hi));
                    row("symmetric", a.is_symmetric() ? "1" : "0");
                    row("constant", a.is_constant() ? "1" : "0");
                    row("theta", format_number(dio.theta));
                    row("diophantine_A", format_number(dio.A_est));
                    row("z_max", std::to_string(dio.Z_max));
                    row("holder_gamma", format_number(a.holder().gamma));
                    row("holder_K", format_number(a.holder().K));
                    write_table(c, t, "field-check");
                    if (!diophantine) c.flag("a component of M^t z vanishes; Diophantine condition fails");
                  }});

  cmds.push_back({"sigma", "discrepancy of the winding over a list of radii", true,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--R", k.R, "radii")->default_val(std::vector<double>{4, 8, 16, 32, 64, 128, 256});
                    a.add_option("--torus-points", k.torus_points, "y samples per torus dimension")->default_val(64);
                    a.add_option("--ball-points", k.ball_points, "coarse steps across the radius")->default_val(64);
                    fit_options(a, k);
                  },
                  [](const Context& c) {
                    check_R(c.k);
                    check_fit(c.k);
                    require(c.k.torus_points >= 2 && c.k.ball_points >= 2, "sample counts must be >= 2");
                    c.field().winding().require_nonresonant();
                  },
                  [](Context& c) {
                    SigmaConfig cfg;
                    cfg.torus_points = c.k.torus_points;
                    cfg.ball_points = c.k.ball_points;
                    std::vector<RhoEstimate> est;
                    for (double R : c.k.R) est.push_back(sigma(c.field().winding(), R, cfg));
                    moduli_report(c, "sigma", est, false);
                  }});

  cmds.push_back({"rho", "iterated-difference modulus rho_k", true,
                  [](CLI::App& a, Knobs& k) {
                    search_options(a, k);
                    a.get_option("--R")->default_val(std::vector<double>{4});
                    a.add_option("--k", k.k, "order");
                    fit_options(a, k);
                  },
                  [](const Context& c) {
                    check_entry(c);
                    check_R(c.k);
                    check_search(c.k, c.k.k);
                    check_fit(c.k);
                    c.field().winding().require_nonresonant();
                  },
                  [](Context& c) {
                    std::vector<RhoEstimate> est;
                    const auto f = c.scalar();
                    for (double R : c.k.R) est.push_back(rho_k(f, R, c.k.k, c.search()));
                    moduli_report(c, "rho", est, false);
                  }});

  cmds.push_back({"rho-star", "min over k of C^k k! rho_k(f, R/k)", true,
                  [](CLI::App& a, Knobs& k) {
                    search_options(a, k);
                    a.get_option("--R")->default_val(std::vector<double>{4});
                    a.add_option("--C", k.C, "constant C >= 1");
                    a.add_option("--k-max", k.k_max, "largest order");
                    fit_options(a, k);
                  },
                  [](const Context& c) {
                    check_entry(c);
                    check_R(c.k);
                    check_search(c.k, c.k.k_max);
                    check_fit(c.k);
                    require(c.k.C >= 1.0, "--C must be >= 1");
                    c.field().winding().require_nonresonant();
                  },
                  [](Context& c) {
                    std::vector<RhoEstimate> est;
                    const auto f = c.scalar();
                    for (double R : c.k.R) est.push_back(rho_star(f, R, c.k.C, c.k.k_max, c.search()));
                    moduli_report(c, "rho-star", est, true);
                  }});

  cmds.push_back({"omega", "L1-over-unit-balls modulus omega_k", true,
                  [](CLI::App& a, Knobs& k) {
                    search_options(a, k);
                    a.get_option("--R")->default_val(std::vector<double>{4});
                    a.add_option("--k", k.k, "order");
                    a.add_option("--quad-points", k.quad_points, "midpoint rule points per dimension");
                    fit_options(a, k);
                  },
                  [](const Context& c) {
                    check_entry(c);
                    check_R(c.k);
                    check_search(c.k, c.k.k);
                    check_fit(c.k);
                    c.field().winding().require_nonresonant();
                  },
                  [](Context& c) {
                    std::vector<RhoEstimate> est;
                    const auto f = c.scalar();
                    for (double R : c.k.R) est.push_back(omega_k(f, R, c.k.k, c.search()));
                    moduli_report(c, "omega", est, false);
                  }});

  cmds.push_back({"ergodic", "heat-flow ergodic bound with fitted (C, c)", true,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--entry", k.entry, "coefficient entry i j")->expected(2);
                    a.add_option("--k", k.k, "order");
                    a.add_option("--t", k.t_list, "times");
                    a.add_option("--R", k.R, "radii")->default_val(std::vector<double>{1, 2, 4, 8, 16});
                    a.add_option("--torus-points", k.torus_points, "osc and gradient sampling")->default_val(64);
                    a.add_option("--quad-points", k.quad_points, "L1 quadrature points");
                    a.add_option("--C-cap", k.C_cap, "largest admissible C");
                  },
                  [](const Context& c) {
                    check_entry(c);
                    check_R(c.k);
                    check_search(c.k, c.k.k);
                    require(!c.k.t_list.empty(), "--t list is empty");
                    for (double t : c.k.t_list)
                      if (!(t >= c.k.k)) throw GuardError("every t must be >= k");
                    require(c.k.C_cap >= 1.0, "--C-cap must be >= 1");
                    FrequencyField check(c.scalar());
                    c.field().winding().require_nonresonant();
                  },
                  [](Context& c) {
                    ErgodicFitConfig cfg;
                    cfg.search = c.search();
                    cfg.search.torus_points = SearchConfig{}.torus_points;
                    cfg.torus_points = c.k.torus_points;
                    cfg.quad_points = c.k.quad_points;
                    cfg.C_cap = c.k.C_cap;
                    const ErgodicReport rep =
                        ergodic_bound_check(FrequencyField(c.scalar()), c.k.t_list, c.k.k, c.k.R, cfg);
                    CsvTable t({"t", "lhs_osc", "rhs_min", "argmin_R", "lhs_grad", "rhs_grad"});
                    Plot plot;
                    plot.title = "ergodic bound";
                    plot.xlabel = "t";
                    plot.ylabel = "osc";
                    plot.series = {{"osc u(t)", {}, {}}, {"bound", {}, {}}};
                    for (const auto& r : rep.rows) {
                      t.add_row({r.t, r.lhs_osc, r.rhs_min, r.argmin_R, r.lhs_grad, r.rhs_grad});
                      plot.series[0].x.push_back(r.t);
                      plot.series[0].y.push_back(r.lhs_osc);
                      plot.series[1].x.push_back(r.t);
                      plot.series[1].y.push_back(r.rhs_min);
                    }
                    t.add_note("fitted", "C=" + format_number(rep.fitted_C) + " c=" +
                                             format_number(rep.fitted_c) + " C_grad=" +
                                             format_number(rep.fitted_C_grad) +
                                             " l1_sup=" + format_number(rep.l1_sup));
                    finish_plot(c, t, plot, "ergodic");
                    write_table(c, t, "ergodic");
                    c.log << "C = " << format_number(rep.fitted_C) << ", c = " << format_number(rep.fitted_c)
                          << ", holds = " << rep.holds << "\n";
                    if (!rep.holds) c.flag("ergodic bound fails at some t");
                  }});

  cmds.push_back({"poincare", "oscillation against the multiscale Poincare bound", true,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--entry", k.entry, "coefficient entry i j")->expected(2);
                    a.add_option("--nodes", k.nodes, "log-spaced quadrature nodes");
                    a.add_option("--t-min", k.t_min, "quadrature start");
                    a.add_option("--t-max", k.t_max, "quadrature end");
                    a.add_option("--torus-points", k.torus_points, "sup samples per torus dimension")->default_val(64);
                  },
                  [](const Context& c) {
                    check_entry(c);
                    require(c.k.t_min > 0.0 && c.k.t_max > c.k.t_min, "need 0 < t-min < t-max");
                    require(c.k.nodes >= 2 && c.k.torus_points >= 2, "quadrature resolution too small");
                    FrequencyField check(c.scalar());
                    c.field().winding().require_nonresonant();
                  },
                  [](Context& c) {
                    const FrequencyField u(c.scalar());
                    PoincareQuadrature q;
                    q.t_min = c.k.t_min;
                    q.t_max = c.k.t_max;
                    q.nodes = c.k.nodes;
                    q.torus_points = c.k.torus_points;
                    const double rhs = multiscale_poincare_rhs(u, q);
                    const double o = osc(u, c.k.torus_points).value;
                    CsvTable t({"osc", "rhs", "holds"});
                    t.add_row(std::vector<std::string>{format_number(o), format_number(rhs), o <= rhs ? "1" : "0"});
                    write_table(c, t, "poincare");
                    c.log << "osc = " << format_number(o) << ", rhs = " << format_number(rhs) << "\n";
                    if (o > rhs) c.flag("osc exceeds the Poincare bound");
                  }});

  cmds.push_back({"hermite", "L1 norms of heat-kernel derivatives and the fitted constant", false,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--n-max", k.n_max, "largest derivative order");
                    a.add_option("--t", k.t, "time");
                    a.add_option("--d", k.d, "dimension");
                  },
                  [](const Context& c) {
                    require(c.k.n_max >= 1 && c.k.n_max <= 16, "--n-max must lie in [1, 16]");
                    require(c.k.t > 0.0 && std::isfinite(c.k.t), "--t must be > 0");
                    if (c.k.d < 1 || c.k.d > 3) throw GuardError("--d must lie in [1, 3]");
                  },
                  [](Context& c) {
                    std::vector<double> values;
                    for (int n = 0; n <= c.k.n_max; ++n) values.push_back(grad_heat_l1(n, c.k.t, c.k.d));
                    const double C = fit_heat_l1_constant(values);
                    CsvTable t({"n", "l1", "bound"});
                    for (int n = 0; n <= c.k.n_max; ++n)
                      t.add_row({static_cast<double>(n), values[static_cast<std::size_t>(n)],
                                 std::pow(C * (1.0 + n), 0.5 * n)});
                    t.add_note("fitted", "C=" + format_number(C));
                    write_table(c, t, "hermite");
                    c.log << "C = " << format_number(C) << "\n";
                  }});

  cmds.push_back({"corrector", "approximate corrector at one scale", true,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--eps", k.eps, "scale")->required()->expected(1);
                    solve_options(a, k);
                    a.add_option("--save", k.save, "write phi as binary plus JSON sidecar");
                  },
                  [](const Context& c) {
                    check_solve(c);
                    checked_grid(c, c.k.eps.at(0));
                  },
                  [](Context& c) {
                    const double eps = c.k.eps[0];
                    const PeriodicGrid g = checked_grid(c, eps);
                    const CorrectorResult r = solve_corrector(c.field(), c.direction(), eps, g, c.solve());
                    CsvTable t({"eps", "h", "L", "n", "sup_phi", "sup_grad_phi", "eps_sup_phi", "mean_phi",
                                "residual", "iterations"});
                    t.add_row({eps, g.h(), g.side(), static_cast<double>(g.n()), r.sup_phi, r.sup_grad_phi,
                               eps * r.sup_phi, r.mean_phi, r.residual, static_cast<double>(r.solver_iters)});
                    write_table(c, t, "corrector");
                    if (!c.k.save.empty()) r.phi.save(c.k.save);
                    c.log << "sup_phi = " << format_number(r.sup_phi)
                          << ", sup_grad_phi = " << format_number(r.sup_grad_phi) << "\n";
                  }});

  auto sweep_validate = [](const Context& c) {
    check_solve(c);
    check_fit(c.k);
    check_dyadic(c);
  };

  cmds.push_back({"sweep", "sup |phi_eps| over a dyadic list of scales", true,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--eps", k.eps, "scales, each half the previous")->required();
                    solve_options(a, k);
                    fit_options(a, k);
                  },
                  sweep_validate,
                  [](Context& c) {
                    const CorrectorLimit lim = corrector_limit(c.field(), c.direction(), c.k.eps, c.sweep());
                    CsvTable t({"eps", "inv_eps", "sup_phi", "sup_grad_phi"});
                    Plot plot;
                    plot.title = "corrector sup";
                    plot.xlabel = "1/eps";
                    plot.ylabel = "sup_phi";
                    plot.series.push_back({"sup |phi_eps|", {}, {}});
                    for (std::size_t i = 0; i < lim.eps.size(); ++i) {
                      t.add_row({lim.eps[i], 1.0 / lim.eps[i], lim.sup_phi[i], lim.sup_grad[i]});
                      plot.series[0].x.push_back(1.0 / lim.eps[i]);
                      plot.series[0].y.push_back(lim.sup_phi[i]);
                    }
                    const LogLogFit fit = finish_plot(c, t, plot, "sweep");
                    write_table(c, t, "sweep");
                    c.log << "slope = " << (fit.valid ? format_number(fit.slope) : "none") << "\n";
                    if (lim.flagged) c.flag("a dyadic difference grew by more than 2x");
                  }});

  cmds.push_back({"psi-decay", "dyadic differences phi_eps - phi_2eps", true,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--eps", k.eps, "scales, each half the previous")->required();
                    solve_options(a, k);
                    fit_options(a, k);
                  },
                  sweep_validate,
                  [](Context& c) {
                    const CorrectorLimit lim = corrector_limit(c.field(), c.direction(), c.k.eps, c.sweep());
                    CsvTable t({"eps", "k", "sup_psi", "partial_sum"});
                    Plot plot;
                    plot.title = "psi decay";
                    plot.xlabel = "k";
                    plot.ylabel = "sup_psi";
                    plot.kind = PlotKind::semilogy;
                    plot.series.push_back({"sup |psi|", {}, {}});
                    bool monotone = true;
                    for (std::size_t i = 0; i < lim.table.size(); ++i) {
                      const auto& row = lim.table[i];
                      const double k = std::log2(1.0 / row.eps);
                      t.add_row({row.eps, k, row.sup_psi, row.partial_sum});
                      plot.series[0].x.push_back(k);
                      plot.series[0].y.push_back(row.sup_psi);
                      if (i > 0 && !(row.sup_psi < lim.table[i - 1].sup_psi)) monotone = false;
                    }
                    const LogLogFit fit = finish_plot(c, t, plot, "psi-decay");
                    if (fit.valid) t.add_note("step_factor", format_number(std::exp(fit.slope)));
                    write_table(c, t, "psi-decay");
                    c.log << "step factor = " << (fit.valid ? format_number(std::exp(fit.slope)) : "none")
                          << "\n";
                    if (!monotone) c.flag("sup |psi| is not strictly decreasing");
                  }});

  cmds.push_back({"zeta-check", "first difference corrector against the translated solves", true,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--eps", k.eps, "scale")->required()->expected(1);
                    a.add_option("--samples", k.samples, "random (y, z) pairs");
                    a.add_option("--seed", k.seed, "random seed");
                    a.add_option("--span", k.span, "translations drawn from [-span, span]^d");
                    a.add_option("--max-relative", k.max_relative, "flag threshold");
                    solve_options(a, k);
                  },
                  [](const Context& c) {
                    check_solve(c);
                    checked_grid(c, c.k.eps.at(0));
                    require(c.k.samples >= 1, "--samples must be >= 1");
                    require(c.k.span > 0.0 && std::isfinite(c.k.span), "--span must be > 0");
                    require(c.k.max_relative > 0.0, "--max-relative must be > 0");
                  },
                  [](Context& c) {
                    const double eps = c.k.eps[0];
                    const PeriodicGrid g = checked_grid(c, eps);
                    std::mt19937_64 rng(c.k.seed);
                    std::uniform_real_distribution<double> u(-c.k.span, c.k.span);
                    std::vector<std::string> cols;
                    for (int i = 0; i < c.dim(); ++i) cols.push_back("y" + std::to_string(i));
                    for (int i = 0; i < c.dim(); ++i) cols.push_back("z" + std::to_string(i));
                    for (const char* s : {"mismatch", "sup_delta_phi", "relative"}) cols.emplace_back(s);
                    CsvTable t(cols);
                    double worst = 0.0;
                    for (int s = 0; s < c.k.samples; ++s) {
                      VectorXd y(c.dim()), z(c.dim());
                      for (int i = 0; i < c.dim(); ++i) y[i] = u(rng);
                      for (int i = 0; i < c.dim(); ++i) z[i] = u(rng);
                      const ZetaCheck z1 =
                          difference_corrector_check(c.field(), y, z, c.direction(), eps, g, c.solve());
                      std::vector<double> row(y.data(), y.data() + y.size());
                      row.insert(row.end(), z.data(), z.data() + z.size());
                      row.insert(row.end(), {z1.mismatch, z1.sup_delta_phi, z1.relative});
                      t.add_row(row);
                      worst = std::max(worst, z1.relative);
                    }
                    t.add_note("worst_relative", format_number(worst));
                    write_table(c, t, "zeta-check");
                    c.log << "worst relative mismatch = " << format_number(worst) << "\n";
                    if (worst > c.k.max_relative) c.flag("difference corrector mismatch above threshold");
                  }});

  cmds.push_back({"effective", "homogenized matrix from the approximate correctors", true,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--eps", k.eps, "scale")->required()->expected(1);
                    solve_options(a, k);
                  },
                  [](const Context& c) {
                    check_solve(c);
                    checked_grid(c, c.k.eps.at(0));
                  },
                  [](Context& c) {
                    const double eps = c.k.eps[0];
                    const PeriodicGrid g = checked_grid(c, eps);
                    const EffectiveMatrix m = effective_matrix(c.field(), eps, g, c.solve());
                    CsvTable t({"i", "j", "abar", "residual"});
                    for (int i = 0; i < c.dim(); ++i)
                      for (int j = 0; j < c.dim(); ++j)
                        t.add_row({static_cast<double>(i), static_cast<double>(j), m.abar(i, j),
                                   m.residuals[static_cast<std::size_t>(j)]});
                    t.add_note("mesh", "eps=" + format_number(m.eps) + " h=" + format_number(m.h) +
                                           " L=" + format_number(m.L));
                    if (c.dim() == 1)
                      t.add_note("harmonic_mean", format_number(harmonic_mean(c.field())));
                    write_table(c, t, "effective");
                    for (int i = 0; i < c.dim(); ++i) {
                      for (int j = 0; j < c.dim(); ++j) c.log << (j ? " " : "") << format_number(m.abar(i, j));
                      c.log << "\n";
                    }
                    if (!m.elliptic) c.flag("effective matrix outside [1, Lambda]");
                  }});

  cmds.push_back({"rate", "Dirichlet homogenization error over a list of scales", true,
                  [](CLI::App& a, Knobs& k) {
                    a.add_option("--eps", k.eps, "scales")->required();
                    a.add_option("--n", k.n, "nodes per side of the box (0: h <= min eps / 16)");
                    a.add_option("--p", k.p, "W^{1,p} exponent");
                    a.add_option("--g-constant", k.g_constant, "boundary data constant part");
                    a.add_option("--g-linear", k.g_linear, "boundary data gradient (default e_1)");
                    a.add_option("--abar-eps", k.abar_eps, "scale for the effective matrix (d >= 2)");
                    a.add_option("--tol", k.tol, "relative residual tolerance");
                    a.add_option("--max-iters", k.max_iters, "iteration cap (0: 50 n)");
                    a.add_option("--epsL", k.epsL, "box side times eps for the effective matrix");
                    a.add_option("--h-max", k.h_max, "mesh size for the effective matrix");
                    fit_options(a, k);
                  },
                  [](const Context& c) {
                    const Knobs& k = c.k;
                    require(c.dim() <= 2, "rate: d must be 1 or 2");
                    require(!k.eps.empty(), "--eps list is empty");
                    for (double e : k.eps) check_eps(e);
                    require(k.p >= 1.0, "--p must be >= 1");
                    require(k.tol > 0.0 && k.tol <= 1e-6, "--tol must lie in (0, 1e-6]");
                    require(k.max_iters >= 0, "--max-iters must be >= 0");
                    require(k.n == 0 || (k.n >= 4 && (k.n & (k.n - 1)) == 0), "--n must be 0 or a power of two");
                    require(k.g_linear.empty() || static_cast<int>(k.g_linear.size()) == c.dim(),
                            "--g-linear has wrong dimension");
                    check_fit(k);
                    if (c.dim() == 2) {
                      require(k.epsL >= 8.0 && k.h_max > 0.0, "invalid effective-matrix grid");
                      checked_grid(c, k.abar_eps);
                    }
                    long n = k.n;
                    if (n == 0) {
                      n = 64;
                      const double eps_min = *std::min_element(k.eps.begin(), k.eps.end());
                      while (2.0 / static_cast<double>(n) > eps_min / 16.0) n *= 2;
                    }
                    if (std::pow(static_cast<double>(n), c.dim()) > static_cast<double>(kMaxNodes))
                      throw GuardError("rate: Dirichlet grid exceeds the node guard");
                  },
                  [](Context& c) {
                    const int d = c.dim();
                    VectorXd b = c.k.g_linear.empty()
                                     ? VectorXd(VectorXd::Unit(d, 0))
                                     : VectorXd(Eigen::Map<const VectorXd>(c.k.g_linear.data(), d));
                    const BoundaryData g = BoundaryData::affine(c.k.g_constant, b);
                    MatrixXd abar(d, d);
                    if (d == 1) {
                      abar(0, 0) = harmonic_mean(c.field());
                    } else {
                      const PeriodicGrid eg = checked_grid(c, c.k.abar_eps);
                      SolveConfig s;
                      s.tol = c.k.tol;
                      abar = effective_matrix(c.field(), c.k.abar_eps, eg, s).abar;
                    }
                    DirichletConfig cfg;
                    cfg.n = c.k.n;
                    cfg.p = c.k.p;
                    cfg.solve.tol = c.k.tol;
                    cfg.solve.max_iters = c.k.max_iters;
                    // Affine data is a-bar-harmonic for every constant matrix.
                    cfg.exact_homogenized = [g](const VectorXd& x) { return g(x); };
                    const RateReport rep = dirichlet_rate(c.field(), abar, g, c.k.eps, cfg);
                    CsvTable t({"eps", "h", "err_Linf", "err_W1p", "slope_so_far"});
                    Plot plot;
                    plot.title = "homogenization error";
                    plot.xlabel = "eps";
                    plot.ylabel = "err_Linf";
                    plot.series.push_back({"L-infinity", {}, {}});
                    plot.series.push_back({"W1p", {}, {}});
                    for (const auto& r : rep.rows) {
                      t.add_row({r.eps, r.h, r.err_Linf, r.err_W1p, r.slope_so_far});
                      plot.series[0].x.push_back(r.eps);
                      plot.series[0].y.push_back(r.err_Linf);
                      plot.series[1].x.push_back(r.eps);
                      plot.series[1].y.push_back(r.err_W1p);
                    }
                    std::string ab;
                    for (int i = 0; i < d; ++i)
                      for (int j = 0; j < d; ++j) ab += (i + j ? " " : "") + format_number(abar(i, j));
                    t.add_note("abar", ab);
                    if (rep.degenerate) t.add_note("degenerate", "errors at rounding level");
                    const LogLogFit fit = finish_plot(c, t, plot, "rate");
                    write_table(c, t, "rate");
                    c.log << "slope = " << (fit.valid ? format_number(fit.slope) : "none") << "\n";
                  }});

  return cmds;
}

std::string joined(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? " " : "") + parts[i];
  return s;
}

/// Every knob of the chosen subcommand, as given or defaulted.
void record_knobs(const CLI::App& sub, Provenance& prov) {
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "out" || name == "spec" || name == "save") continue;
    std::string value = opt->count() > 0 ? joined(opt->results()) : opt->get_default_str();
    std::erase_if(value, [](char ch) { return ch == '[' || ch == ']' || ch == '{' || ch == '}'; });
    std::replace(value.begin(), value.end(), ' ', ';');
    std::replace(value.begin(), value.end(), ',', ';');
    prov.add(name, value.empty() ? "-" : value);
  }
}

int first_command_index(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      ++i;
      continue;
    }
    if (!a.empty() && a[0] == '-') continue;
    return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : commands()) n.push_back(c.name);
    return n;
  }();
  return names;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<Command> cmds = commands();
  std::vector<Knobs> knobs(cmds.size());
  CLI::App app("Almost periodic homogenization laboratory", "aplab");
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML file with per-subcommand sections");
  app.require_subcommand(1, 1);
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    const Command& c = cmds[i];
    CLI::App* s = app.add_subcommand(c.name, c.help);
    if (c.needs_spec) s->add_option("--spec", knobs[i].spec, "field spec (TOML)")->required();
    s->add_option("--out", knobs[i].out, "output directory");
    c.options(*s, knobs[i]);
    subs.push_back(s);
  }

  const int idx = first_command_index(args);
  const bool wants_help = std::any_of(args.begin(), args.end(),
                                      [](const std::string& a) { return a == "-h" || a == "--help"; });
  if (idx < 0 && !wants_help) {
    err << app.help();
    return ExitCode::unknown_command;
  }
  if (idx >= 0 && std::find(subcommands().begin(), subcommands().end(), args[static_cast<std::size_t>(idx)]) ==
                      subcommands().end()) {
    err << "unknown subcommand: " << args[static_cast<std::size_t>(idx)] << "\n";
    return ExitCode::unknown_command;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ExitCode::ok;
  } catch (const CLI::FileError& e) {
    err << e.what() << "\n";
    return ExitCode::unreadable_spec;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return ExitCode::validation;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  Command& cmd = cmds[which];
  const Knobs& k = knobs[which];

  try {
    Context ctx{k, std::nullopt, Provenance{cmd.name, "none", {}}, k.out, out};
    if (cmd.needs_spec) {
      std::ifstream probe(k.spec, std::ios::binary);
      if (!probe || std::filesystem::is_directory(k.spec)) {
        err << "cannot read field spec " << k.spec << "\n";
        return ExitCode::unreadable_spec;
      }
      ctx.spec = load_field_spec(k.spec);
      ctx.prov.spec_hash = ctx.spec->hash;
    }
    record_knobs(*subs[which], ctx.prov);
    cmd.validate(ctx);
    std::filesystem::create_directories(ctx.out);
    cmd.execute(ctx);
    return ctx.status;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return ExitCode::validation;
  } catch (const ConvergenceError& e) {
    err << "solver did not converge: " << e.what() << "\n";
    return ExitCode::no_convergence;
  } catch (const PropertyViolation& e) {
    err << "property violated: " << e.what() << "\n";
    return ExitCode::property_flag;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return ExitCode::internal;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace aplab::cli

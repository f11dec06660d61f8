#include <doctest.h>

#include "aplab/core.hpp"
#include "aplab/fit.hpp"
#include "cli.hpp"
#include "csv_read.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace aplab;
using testing::Csv;
using testing::number_after;
using testing::read_csv;
using testing::slurp;
namespace fs = std::filesystem;

namespace {

const std::string kSpecs = APLAB_SPEC_DIR;

std::string spec(const std::string& name) { return kSpecs + "/" + name + ".toml"; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("aplab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "aplab");
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

}  // namespace

TEST_CASE("documented invocations") {
  const fs::path out = scratch("examples");

  CHECK(invoke({"rho", "--spec", spec("cos1d"), "--k", "1", "--R", "4", "--out", out.string()}) == 0);
  const Csv rho = read_csv(out / "rho.csv");
  CHECK(rho.header == std::vector<std::string>{"kind", "k", "R", "value", "res_y", "res_z", "direction"});
  REQUIRE(rho.rows.size() == 1);
  CHECK(std::abs(rho.at(0, "value")) <= 1e-6);

  CHECK(invoke({"corrector", "--spec", spec("constant1d"), "--eps", "0.0625", "--out", out.string()}) == 0);
  CHECK(read_csv(out / "corrector.csv").at(0, "sup_phi") <= 1e-9);

  CHECK(invoke({"effective", "--spec", spec("cos1d"), "--eps", "0.015625", "--out", out.string()}) == 0);
  const Csv eff = read_csv(out / "effective.csv");
  CHECK(eff.at(0, "abar") == doctest::Approx(std::sqrt(3.0)).epsilon(1e-3 / std::sqrt(3.0)));
  CHECK(std::stod(eff.note("harmonic_mean")) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));

  const std::string prov = read_csv(out / "corrector.csv").comments.front();
  CHECK(prov.rfind("# provenance: command=corrector spec=", 0) == 0);
  CHECK(prov.find("eps=0.0625") != std::string::npos);
  CHECK(prov.find("tol=1e-10") != std::string::npos);
}

TEST_CASE("exit codes") {
  const fs::path out = scratch("codes");
  CHECK(invoke({"frobnicate"}) == cli::unknown_command);
  CHECK(invoke({}) == cli::unknown_command);
  CHECK(invoke({"--help"}) == cli::ok);
  CHECK(invoke({"rho", "--spec", (out / "missing.toml").string()}) == cli::unreadable_spec);
  CHECK(invoke({"rho", "--spec", out.string()}) == cli::unreadable_spec);
  CHECK(invoke({"rho", "--spec", spec("cos1d"), "--no-such-flag", "1"}) == cli::validation);
  CHECK(invoke({"rho"}) == cli::validation);  // --spec is required

  {
    std::ofstream bad(out / "bad.toml");
    bad << "lambda = 1.5\n[winding]\nrows = [[1.0]]\n[[entry]]\ni = 0\nj = 0\nshift = 0.5\n";
  }
  CHECK(invoke({"rho", "--spec", (out / "bad.toml").string(), "--out", out.string()}) == cli::validation);

  // A single vanishing component of M^t z: reported, flagged.
  CHECK(invoke({"field-check", "--spec", spec("golden2d"), "--out", out.string()}) == cli::property_flag);
  CHECK(read_csv(out / "field-check.csv").rows.size() > 5);
  CHECK(invoke({"field-check", "--spec", spec("golden1d"), "--out", out.string()}) == cli::ok);

  CHECK(invoke({"corrector", "--spec", spec("cos1d"), "--eps", "0.25", "--max-iters", "1",
               "--preconditioner", "jacobi", "--out", out.string()}) == cli::no_convergence);
}

TEST_CASE("guard-first: invalid configs do no numerical work") {
  const fs::path out = scratch("guard");
  const std::string o = out.string();
  const std::vector<std::vector<std::string>> invalid = {
      {"sigma", "--spec", spec("golden1d"), "--R", "4", "0.5"},
      {"rho", "--spec", spec("golden1d"), "--k", "9"},
      {"rho", "--spec", spec("golden1d"), "--entry", "0", "3"},
      {"rho-star", "--spec", spec("golden1d"), "--C", "0.5"},
      {"omega", "--spec", spec("golden1d"), "--quad-points", "1"},
      {"ergodic", "--spec", spec("golden1d"), "--k", "2"},
      {"poincare", "--spec", spec("cos1d"), "--t-min", "1", "--t-max", "0.5"},
      {"hermite", "--d", "5"},
      {"field-check", "--spec", spec("golden1d"), "--z-max", "0"},
      {"corrector", "--spec", spec("cos1d"), "--eps", "0.125", "--tol", "1e-3"},
      {"corrector", "--spec", spec("cos1d"), "--eps", "0.125", "--direction", "1", "1"},
      {"corrector", "--spec", spec("cos1d"), "--eps", "1e-9"},
      {"sweep", "--spec", spec("golden1d"), "--eps", "0.25", "0.125", "0.07"},
      {"psi-decay", "--spec", spec("golden1d"), "--eps", "0.25", "0.125", "--epsL", "4"},
      {"zeta-check", "--spec", spec("golden1d"), "--eps", "0.125", "--samples", "0"},
      {"effective", "--spec", spec("cos2d"), "--eps", "0.125", "--window", "2"},
      {"rate", "--spec", spec("cos1d"), "--eps", "0.125", "0.0625", "0"},
      {"rate", "--spec", spec("golden2d"), "--eps", "0.125", "--g-linear", "1"},
      {"sweep", "--spec", spec("golden1d"), "--eps", "0.25", "0.125", "--fit-last", "0"},
  };
  for (auto args : invalid) {
    args.push_back("--out");
    args.push_back(o);
    reset_work_counter();
    CAPTURE(args[0]);
    CAPTURE(args.size());
    CHECK(invoke(args) == cli::validation);
    CHECK(work_counter() == 0);
  }
  CHECK(fs::is_empty(out));
}

TEST_CASE("sweep: plot slope matches the csv fit, output is deterministic") {
  const fs::path a = scratch("sweep_a");
  const fs::path b = scratch("sweep_b");
  const std::vector<std::string> base = {"sweep", "--spec", spec("golden1d"), "--eps", "0.25", "0.125",
                                         "0.0625", "0.03125", "--fit-first", "1"};
  auto with_out = [&](const fs::path& dir) {
    auto args = base;
    args.push_back("--out");
    args.push_back(dir.string());
    return args;
  };
  REQUIRE(invoke(with_out(a)) == 0);
  REQUIRE(invoke(with_out(b)) == 0);
  CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
  CHECK(slurp(a / "sweep.svg") == slurp(b / "sweep.svg"));

  const Csv csv = read_csv(a / "sweep.csv");
  REQUIRE(csv.rows.size() == 4);
  const std::string fit = csv.note("fit");
  CHECK(fit.find("points 1..4") != std::string::npos);
  const double csv_slope = number_after(fit, "slope=");

  std::vector<double> x, y;
  for (std::size_t i = 1; i < csv.rows.size(); ++i) {
    x.push_back(csv.at(i, "inv_eps"));
    y.push_back(csv.at(i, "sup_phi"));
  }
  const LogLogFit recomputed = loglog_fit(x, y);
  REQUIRE(recomputed.valid);
  CHECK(csv_slope == doctest::Approx(recomputed.slope).epsilon(1e-12));
  CHECK(number_after(slurp(a / "sweep.svg"), "slope = ") == csv_slope);
}

TEST_CASE("single-point report plots without a fit") {
  const fs::path out = scratch("single");
  REQUIRE(invoke({"sigma", "--spec", spec("golden1d"), "--R", "8", "--out", out.string()}) == 0);
  const std::string svg = slurp(out / "sigma.svg");
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  CHECK(svg.find("slope") == std::string::npos);
  CHECK(read_csv(out / "sigma.csv").note("fit").find("no fit") != std::string::npos);
}

TEST_CASE("psi-decay, rate and the config file") {
  const fs::path out = scratch("config");
  {
    std::ofstream cfg(out / "run.toml");
    cfg << "[psi-decay]\nspec = \"" << spec("golden1d") << "\"\neps = [0.25, 0.125, 0.0625, 0.03125]\n"
        << "out = \"" << out.string() << "\"\n";
  }
  REQUIRE(invoke({"--config", (out / "run.toml").string(), "psi-decay"}) == 0);
  const Csv psi = read_csv(out / "psi-decay.csv");
  REQUIRE(psi.rows.size() == 3);
  for (std::size_t i = 1; i < psi.rows.size(); ++i) CHECK(psi.at(i, "sup_psi") < psi.at(i - 1, "sup_psi"));
  CHECK(std::stod(psi.note("step_factor")) < std::pow(2.0, -0.1));
  CHECK(psi.comments.front().find("eps=0.25;0.125;0.0625;0.03125") != std::string::npos);

  REQUIRE(invoke({"rate", "--spec", spec("cos1d"), "--eps", "0.125", "0.0625", "0.03125", "--out",
                 out.string()}) == 0);
  const Csv rate = read_csv(out / "rate.csv");
  CHECK(rate.header == std::vector<std::string>{"eps", "h", "err_Linf", "err_W1p", "slope_so_far"});
  const double slope = number_after(rate.note("fit"), "slope=");
  CHECK(slope >= 0.8);
  CHECK(slope <= 1.2);
  CHECK(std::isnan(rate.at(0, "slope_so_far")));

  REQUIRE(invoke({"hermite", "--out", out.string()}) == 0);
  const Csv h = read_csv(out / "hermite.csv");
  CHECK(h.at(1, "l1") == doctest::Approx(2.0 / std::sqrt(kPi)).epsilon(1e-8));
  CHECK(number_after(h.note("fitted"), "C=") <= 16.0);

  REQUIRE(invoke({"poincare", "--spec", spec("cos1d"), "--out", out.string()}) == 0);
  const Csv p = read_csv(out / "poincare.csv");
  CHECK(p.at(0, "rhs") >= 2.0);
  CHECK(p.at(0, "rhs") <= 2.02);
}

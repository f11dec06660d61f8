#include "aplab/fixtures.hpp"

namespace aplab::fixtures {

namespace {
VectorXi unit(int m, int i) {
  VectorXi k = VectorXi::Zero(m);
  k[i] = 1;
  return k;
}
}  // namespace

CoefficientField constant(int d) { return CoefficientField::constant(MatrixXd::Identity(d, d), 1.0); }

CoefficientField cos1d() {
  TrigPolynomial g(1, {TrigTerm{VectorXi::Zero(1), 2.0, 0.0}, TrigTerm{unit(1, 0), 1.0, 0.0}});
  return CoefficientField::isotropic(WindingMatrix::identity(1), g, 3.0);
}

WindingMatrix golden_winding() {
  MatrixXd M(2, 1);
  M << 1.0, kGolden;
  return WindingMatrix(M);
}

CoefficientField golden1d() {
  TrigPolynomial g(2, {TrigTerm{VectorXi::Zero(2), 2.5, 0.0}, TrigTerm{unit(2, 0), 0.5, 0.0},
                       TrigTerm{unit(2, 1), 0.5, 0.0}});
  return CoefficientField::isotropic(golden_winding(), g, 3.5);
}

QuasiperiodicField golden_scalar() { return golden1d().entry(0, 0); }

CoefficientField golden2d() {
  MatrixXd M(3, 2);
  M << 1.0, 0.0, 0.0, 1.0, kGolden - 1.0, std::sqrt(2.0) - 1.0;
  TrigPolynomial g(3, {TrigTerm{VectorXi::Zero(3), 2.5, 0.0}, TrigTerm{unit(3, 0), 0.4, 0.0},
                       TrigTerm{unit(3, 1), 0.4, 0.0}, TrigTerm{unit(3, 2), 0.4, 0.0}});
  return CoefficientField::isotropic(WindingMatrix(M), g, 3.7);
}

CoefficientField cos2d() {
  TrigPolynomial g(2, {TrigTerm{VectorXi::Zero(2), 2.0, 0.0}, TrigTerm{unit(2, 0), 0.5, 0.0},
                       TrigTerm{unit(2, 1), 0.5, 0.0}});
  return CoefficientField::isotropic(WindingMatrix::identity(2), g, 3.0);
}

std::vector<std::string> names() {
  return {"constant1d", "constant2d", "cos1d", "golden1d", "golden2d", "cos2d"};
}

CoefficientField by_name(const std::string& name) {
  if (name == "constant1d") return constant(1);
  if (name == "constant2d") return constant(2);
  if (name == "cos1d") return cos1d();
  if (name == "golden1d") return golden1d();
  if (name == "golden2d") return golden2d();
  if (name == "cos2d") return cos2d();
  throw ValidationError("unknown fixture: " + name);
}

}  // namespace aplab::fixtures

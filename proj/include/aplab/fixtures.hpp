#pragma once

#include "aplab/field.hpp"

#include <string>
#include <vector>

namespace aplab::fixtures {

inline const double kGolden = 0.5 * (1.0 + std::sqrt(5.0));

/// a(x) = 1 in dimension d (identity matrix).
CoefficientField constant(int d);

/// d = 1, a(x) = 2 + cos(2 pi x). Harmonic mean sqrt(3).
CoefficientField cos1d();

/// d = 1, M = (1, golden)^t, F = 2.5 + 0.5 cos(2 pi a1) + 0.5 cos(2 pi a2).
CoefficientField golden1d();

/// d = 2 isotropic, M = [1 0; 0 1; golden-1 sqrt2-1],
/// F = 2.5 + 0.4 (cos 2 pi a1 + cos 2 pi a2 + cos 2 pi a3).
CoefficientField golden2d();

/// d = 2 isotropic 1-periodic, F = 2 + 0.5 cos(2 pi a1) + 0.5 cos(2 pi a2).
CoefficientField cos2d();

/// Golden winding (1, golden)^t.
WindingMatrix golden_winding();

/// The scalar lifted function of golden1d as a quasiperiodic field.
QuasiperiodicField golden_scalar();

/// Look up a fixture by name; throws ValidationError for unknown names.
CoefficientField by_name(const std::string& name);
std::vector<std::string> names();

}  // namespace aplab::fixtures

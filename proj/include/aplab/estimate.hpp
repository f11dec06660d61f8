#pragma once

#include <string>
#include <string_view>

namespace aplab {

/// How a sampled estimate relates to the exact quantity.
enum class BoundDirection {
  exact,                 // no sampling in the reported value
  lower_bound,           // only sampled suprema enter
  upper_bound,           // only sampled infima enter
  two_sided_unresolved,  // sampled sup over sampled inf
};

std::string_view to_string(BoundDirection d);

enum class EstimateKind { rho_k, omega_k, sigma, rho_star };

std::string_view to_string(EstimateKind k);

/// A reported modulus value together with the resolutions that produced it.
struct RhoEstimate {
  EstimateKind kind = EstimateKind::rho_k;
  int k = 1;
  double R = 1.0;
  double value = 0.0;
  long res_y = 0;  // number of torus samples for each supremum
  long res_z = 0;  // number of ball samples for each infimum
  BoundDirection direction = BoundDirection::two_sided_unresolved;
  int argmin_k = 0;  // rho_star only: the minimizing order
};

}  // namespace aplab

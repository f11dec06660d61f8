#pragma once

#include "aplab/field.hpp"

#include <string>
#include <string_view>

namespace aplab {

/// A coefficient field read from a TOML file:
///
///   lambda = 3.0          # ellipticity upper bound
///   theta = 1.0           # Diophantine exponent (optional, default 1)
///   [winding]
///   rows = [[1.0], [1.618033988749895]]   # m rows of length d
///   [[entry]]             # one table per nonzero entry (i, j)
///   i = 0
///   j = 0
///   shift = 2.5           # constant part
///   terms = [[1, 0, 0.5, 0.0]]            # k_1..k_m, cos amp, sin amp
///
/// Optional `[holder] gamma, K` and `kappa` are recorded. Entries not listed
/// are zero; the field must be elliptic.
struct FieldSpec {
  CoefficientField field;
  double theta = 1.0;
  std::string origin;  // file path or "<string>"
  std::string hash;    // FNV-1a of the source text, 16 hex digits
};

FieldSpec parse_field_spec(std::string_view text, const std::string& origin = "<string>");
FieldSpec load_field_spec(const std::string& path);

/// The inverse of parse_field_spec (up to number formatting).
std::string field_spec_toml(const CoefficientField& field, double theta = 1.0);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace aplab

#pragma once

#include <span>
#include <vector>

namespace aplab {

/// Least-squares line through (log x, log y).
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
  /// False when fewer than two positive points remain or all y vanish, in
  /// which case slope and intercept are meaningless.
  bool valid = false;
};

/// Fits log y = intercept + slope log x over the points with x, y > 0.
LogLogFit loglog_fit(std::span<const double> x, std::span<const double> y);

/// Fits log y = intercept + slope x over the points with y > 0.
LogLogFit semilog_fit(std::span<const double> x, std::span<const double> y);

/// Fit restricted to indices [first, last) of the inputs.
LogLogFit loglog_fit_window(std::span<const double> x, std::span<const double> y,
                            std::size_t first, std::size_t last);

}  // namespace aplab

#include "aplab/fit.hpp"

#include "aplab/core.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace aplab {

namespace {

// Least squares through (u(x), log y) over the points with y > 0 and u
// defined.
template <typename U>
LogLogFit fit_log_y(std::span<const double> x, std::span<const double> y, U&& u) {
  if (x.size() != y.size()) throw ValidationError("fit: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i]) || !std::isfinite(x[i])) continue;
    const auto lx = u(x[i]);
    if (!lx) continue;
    const double ly = std::log(y[i]);
    sx += *lx;
    sy += ly;
    sxx += *lx * *lx;
    sxy += *lx * ly;
    ++n;
  }
  LogLogFit fit;
  fit.points = n;
  if (n < 2) return fit;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.valid = true;
  return fit;
}

}  // namespace

LogLogFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  return fit_log_y(x, y, [](double v) { return v > 0.0 ? std::optional<double>(std::log(v)) : std::nullopt; });
}

LogLogFit semilog_fit(std::span<const double> x, std::span<const double> y) {
  return fit_log_y(x, y, [](double v) { return std::optional<double>(v); });
}

LogLogFit loglog_fit_window(std::span<const double> x, std::span<const double> y,
                            std::size_t first, std::size_t last) {
  last = std::min(last, x.size());
  if (first >= last) return {};
  return loglog_fit(x.subspan(first, last - first), y.subspan(first, last - first));
}

}  // namespace aplab

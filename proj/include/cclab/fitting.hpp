#pragma once

#include <vector>

namespace cclab {

/// Least-squares fit of log y = log amplitude + exponent * log x.
struct PowerLawFit {
  double exponent = 0.0;
  double amplitude = 0.0;
  double r_squared = 0.0;
  double exponent_stderr = 0.0;  // 0 when there are only two points
};

/// Throws InsufficientDataError for fewer than two points or a nonpositive x
/// or y.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cclab

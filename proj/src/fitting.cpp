#include "cclab/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cclab/errors.hpp"

namespace cclab {

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgumentError("fit_power_law: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw InsufficientDataError("fit_power_law: need at least two points");
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw InsufficientDataError("fit_power_law: point " + std::to_string(i) +
                                  " is not positive (x=" + std::to_string(x[i]) +
                                  ", y=" + std::to_string(y[i]) + ")");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw InsufficientDataError("fit_power_law: all x values coincide");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.amplitude = std::exp(my - fit.exponent * mx);
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (my + fit.exponent * (lx[i] - mx));
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
  if (n > 2) fit.exponent_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  return fit;
}

}  // namespace cclab

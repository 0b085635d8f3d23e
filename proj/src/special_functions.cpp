#include "cclab/special_functions.hpp"

#include <cmath>
#include <numbers>

#include "cclab/errors.hpp"

namespace cclab {

namespace {

using C = std::complex<double>;

constexpr double kSeriesRadius = 2.5;
constexpr double kEps = 1e-16;

C erf_series(C z) {
  const C z2 = z * z;
  C term = z;  // (-1)^n z^(2n+1) / n!
  C sum = z;
  for (int n = 1; n < 400; ++n) {
    term *= -z2 / static_cast<double>(n);
    const C add = term / static_cast<double>(2 * n + 1);
    sum += add;
    if (std::abs(add) < kEps * std::abs(sum)) break;
  }
  return sum * (2.0 / std::sqrt(std::numbers::pi));
}

// erfc(z) = exp(-z^2) / (sqrt(pi) * K), K = z + (1/2)/(z + 1/(z + (3/2)/(z + ...))),
// evaluated with the modified Lentz method. Requires Re z > 0.
C erfc_continued_fraction(C z) {
  constexpr double tiny = 1e-300;
  C f = z;
  C c = z;
  C d = 0.0;
  for (int n = 1; n < 20000; ++n) {
    const double a = 0.5 * n;
    d = z + a * d;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    c = z + a / c;
    if (std::abs(c) < tiny) c = tiny;
    const C delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return std::exp(-z * z) / (std::sqrt(std::numbers::pi) * f);
    }
  }
  throw AccuracyError("erfc continued fraction did not converge");
}

}  // namespace

std::complex<double> erfc(std::complex<double> z) {
  if (std::abs(z) < kSeriesRadius) return 1.0 - erf_series(z);
  if (z.real() < 0.0) return 2.0 - erfc_continued_fraction(-z);
  return erfc_continued_fraction(z);
}

}  // namespace cclab

#pragma once

#include <complex>

namespace cclab {

/// Complementary error function of a complex argument.
///
/// Power series for |z| < 2.5, Laplace continued fraction otherwise (after
/// reflecting to Re z >= 0 with erfc(z) = 2 - erfc(-z)). Accurate to ~1e-13
/// in the sector |Im z| <= |Re z|, which contains the diagonal lines where the
/// free-particle propagator of a step evaluates it. Throws AccuracyError if
/// the continued fraction fails to converge (arguments hugging the imaginary
/// axis far from the origin).
std::complex<double> erfc(std::complex<double> z);

}  // namespace cclab

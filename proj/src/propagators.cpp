#include "cclab/propagators.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <string>

namespace cclab {

namespace {

// The heat kernel is dropped beyond this many standard deviations
// (exp(-z^2/2) < 1e-40 there).
constexpr double kKernelSigmas = 13.6;

void require_positive_dt(double dt, const char* op) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ArgumentError(std::string(op) + ": dt must be positive, got " + std::to_string(dt));
  }
}

}  // namespace

DensityField gaussian_step(const DensityField& field, double dt) {
  require_positive_dt(dt, "gaussian_step");
  const Grid1D& g = field.grid();
  const double dx = g.dx();
  const double sigma = std::sqrt(dt);
  if (sigma < dx) {
    throw ArgumentError("gaussian_step: kernel width sqrt(dt)=" + std::to_string(sigma) +
                        " is below the grid spacing " + std::to_string(dx));
  }
  const Index n = g.size();
  const Index reach = std::min<Index>(n - 1, static_cast<Index>(std::ceil(kKernelSigmas * sigma / dx)));

  Eigen::VectorXd kernel(reach + 1);
  const double norm = dx / std::sqrt(2.0 * std::numbers::pi * dt);
  for (Index m = 0; m <= reach; ++m) {
    const double d = static_cast<double>(m) * dx;
    kernel[m] = norm * std::exp(-d * d / (2.0 * dt));
  }

  // Trapezoid weights: half weight on the two box walls.
  Eigen::VectorXd src = field.values();
  src[0] *= 0.5;
  src[n - 1] *= 0.5;

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Index j = 0; j < n; ++j) {
    const double s = src[j];
    if (s == 0.0) continue;
    const Index lo = std::max<Index>(0, j - reach);
    const Index hi = std::min<Index>(n - 1, j + reach);
    for (Index i = lo; i <= hi; ++i) out[i] += s * kernel[std::abs(i - j)];
  }
  return field.with_values(std::move(out));
}

Eigen::VectorXd fft_wavenumbers(const Grid1D& grid) {
  const Index n = grid.size();
  const double period = static_cast<double>(n) * grid.dx();
  Eigen::VectorXd k(n);
  for (Index i = 0; i < n; ++i) {
    const Index m = i <= (n - 1) / 2 ? i : i - n;
    k[i] = 2.0 * std::numbers::pi * static_cast<double>(m) / period;
  }
  return k;
}

WaveField fresnel_step(const WaveField& field, double dt) {
  require_positive_dt(dt, "fresnel_step");
  const Index n = field.grid().size();
  Eigen::FFT<double> fft;
  Eigen::VectorXcd spectrum(n);
  Eigen::VectorXcd in = field.values();
  fft.fwd(spectrum, in);
  const Eigen::VectorXd k = fft_wavenumbers(field.grid());
  for (Index i = 0; i < n; ++i) {
    spectrum[i] *= std::polar(1.0, -0.5 * k[i] * k[i] * dt);
  }
  Eigen::VectorXcd out(n);
  fft.inv(out, spectrum);
  return field.with_values(std::move(out));
}

}  // namespace cclab

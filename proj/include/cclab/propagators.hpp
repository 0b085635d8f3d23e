#pragma once

#include <vector>

#include "cclab/grid.hpp"

namespace cclab {

/// Free diffusion over time dt: convolution with the heat kernel
/// (2 pi dt)^{-1/2} exp(-(x-y)^2 / (2 dt)) of the generator (1/2) d^2/dx^2,
/// evaluated by trapezoid quadrature over the grid. Mass that diffuses past
/// the box walls is lost.
DensityField gaussian_step(const DensityField& field, double dt);

/// Free Schroedinger propagation over time dt for i psi_t = -(1/2) psi_xx,
/// applied as the Fourier multiplier exp(-i k^2 dt / 2) on the periodic cell
/// [x_min, x_min + n*dx). Unitary on the discrete L2 norm.
WaveField fresnel_step(const WaveField& field, double dt);

/// Angular wavenumbers of the FFT ordering used by fresnel_step.
Eigen::VectorXd fft_wavenumbers(const Grid1D& grid);

/// Outward normal derivative at each physical boundary point of D, from the
/// one-sided second-order three-point stencil reaching into D.
template <typename Scalar>
std::vector<Scalar> boundary_normal_derivative(const Field<Scalar>& field,
                                               const DomainSpec& domain) {
  const Grid1D& g = field.grid();
  domain.check_on(g);
  const auto& v = field.values();
  std::vector<Scalar> out;
  for (const BoundaryPoint& b : domain.boundary_points()) {
    const Index i = g.require_node(b.x, "boundary point");
    // Stencil runs into D: toward +x at the lower end, toward -x at the upper.
    const Index s = b.outward_sign < 0 ? 1 : -1;
    const Scalar inward = (Scalar(-3) * v[i] + Scalar(4) * v[i + s] - v[i + 2 * s]) /
                          Scalar(2.0 * g.dx());
    // inward is the derivative along -n.
    out.push_back(-inward);
  }
  return out;
}

}  // namespace cclab

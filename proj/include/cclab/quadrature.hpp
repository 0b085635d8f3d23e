#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>

#include "cclab/grid.hpp"

namespace cclab {

/// Composite trapezoid rule over nodes [first, last] of a uniform grid.
template <typename Derived>
typename Derived::Scalar trapezoid(const Eigen::MatrixBase<Derived>& v, Index first, Index last,
                                   double dx) {
  using Scalar = typename Derived::Scalar;
  if (last <= first) return Scalar(0);
  Scalar s = v.segment(first, last - first + 1).sum();
  s -= Scalar(0.5) * (v[first] + v[last]);
  return s * dx;
}

/// Integral of the samples over the whole grid.
template <typename Scalar>
Scalar integrate(const Field<Scalar>& field) {
  return trapezoid(field.values(), 0, field.grid().size() - 1, field.grid().dx());
}

/// Integral of the samples over D. Throws DomainError when D does not sit on
/// the field's grid.
template <typename Scalar>
Scalar integrate(const Field<Scalar>& field, const DomainSpec& region) {
  auto [first, last] = region.node_range(field.grid());
  return trapezoid(field.values(), first, last, field.grid().dx());
}

/// Probability mass: integral of |psi|^2 (of the density itself for a
/// density field) over D.
template <typename Scalar>
double probability_mass(const Field<Scalar>& field, const DomainSpec& region) {
  auto [first, last] = region.node_range(field.grid());
  if (field.kind() == FieldKind::kWavefunction) {
    return trapezoid(field.values().cwiseAbs2(), first, last, field.grid().dx());
  }
  return std::real(trapezoid(field.values(), first, last, field.grid().dx()));
}

template <typename Scalar>
double probability_mass(const Field<Scalar>& field) {
  const Index n = field.grid().size();
  if (field.kind() == FieldKind::kWavefunction) {
    return trapezoid(field.values().cwiseAbs2(), 0, n - 1, field.grid().dx());
  }
  return std::real(trapezoid(field.values(), 0, n - 1, field.grid().dx()));
}

/// Mass within `margin` of either end of the grid: the part of the field that
/// has reached the artificial walls of the box.
template <typename Scalar>
double edge_mass(const Field<Scalar>& field, double margin) {
  const Grid1D& g = field.grid();
  const Index w = std::min<Index>(g.size() / 2, static_cast<Index>(std::ceil(margin / g.dx())));
  Eigen::VectorXd density = field.kind() == FieldKind::kWavefunction
                                ? Eigen::VectorXd(field.values().cwiseAbs2())
                                : Eigen::VectorXd(field.values().real().cwiseAbs());
  return trapezoid(density, 0, w, g.dx()) + trapezoid(density, g.size() - 1 - w, g.size() - 1, g.dx());
}

/// Mass within `margin` inside D of each artificial wall of the domain.
template <typename Scalar>
double artificial_wall_mass(const Field<Scalar>& field, const DomainSpec& domain, double margin) {
  const Grid1D& g = field.grid();
  auto [first, last] = domain.node_range(g);
  const Index w = std::max<Index>(1, static_cast<Index>(std::ceil(margin / g.dx())));
  Eigen::VectorXd density = field.kind() == FieldKind::kWavefunction
                                ? Eigen::VectorXd(field.values().cwiseAbs2())
                                : Eigen::VectorXd(field.values().real().cwiseAbs());
  double m = 0.0;
  if (domain.lower_kind() == EdgeKind::kArtificial) {
    m += trapezoid(density, first, std::min(last, first + w), g.dx());
  }
  if (domain.upper_kind() == EdgeKind::kArtificial) {
    m += trapezoid(density, std::max(first, last - w), last, g.dx());
  }
  return m;
}

/// Default tolerance for the support guard.
inline constexpr double kSupportGuardTolerance = 1e-8;

/// Throws GuardViolation if more than `tolerance` of mass sits within
/// `margin` of the box walls.
template <typename Scalar>
void check_support_guard(const Field<Scalar>& field, double margin, const char* context,
                         double tolerance = kSupportGuardTolerance) {
  const double m = edge_mass(field, margin);
  if (!(m <= tolerance)) {
    throw GuardViolation(std::string(context) + ": mass " + std::to_string(m) +
                         " within the guard margin of the box walls exceeds " +
                         std::to_string(tolerance) + "; enlarge the box");
  }
}

struct QuadratureResult {
  Complex value;
  double error_estimate;
  int evaluations;
  bool converged;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature of a complex integrand
/// on [a, b]. Stops when the summed error estimate is below
/// max(abs_tol, rel_tol*|I|) or after max_intervals subdivisions.
QuadratureResult adaptive_gauss_kronrod(const std::function<Complex(double)>& f, double a,
                                        double b, double abs_tol, double rel_tol,
                                        int max_intervals = 4000);

}  // namespace cclab

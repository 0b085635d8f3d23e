#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cclab/errors.hpp"

namespace cclab {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform node-centred grid on [x_min, x_max]; node i sits at x_min + i*dx.
class Grid1D {
 public:
  static constexpr Index kMinPoints = 8;

  Grid1D(double x_min, double x_max, Index n_points);

  /// Grid starting at x_min with the given spacing. Used when a box must
  /// contain some coordinate (a boundary point) exactly on a node.
  static Grid1D from_spacing(double x_min, double dx, Index n_points);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double dx() const { return dx_; }
  Index size() const { return n_; }

  double x(Index i) const { return x_min_ + static_cast<double>(i) * dx_; }
  Eigen::VectorXd nodes() const;

  /// Index of the node at coordinate `x`, if `x` is a node to within a small
  /// fraction of dx.
  std::optional<Index> node_index(double x) const;

  /// Like node_index but throws DomainError when `x` is not a node.
  Index require_node(double x, const std::string& what) const;

  bool contains(double x) const;

  friend bool operator==(const Grid1D& a, const Grid1D& b) {
    return a.x_min_ == b.x_min_ && a.dx_ == b.dx_ && a.n_ == b.n_;
  }

 private:
  Grid1D(double x_min, double dx, Index n_points, bool);

  double x_min_;
  double x_max_;
  double dx_;
  Index n_;
};

/// How one end of the unmeasured region D is realised on the box.
enum class EdgeKind {
  /// A physical boundary point of D; the measured region lies beyond it.
  kBoundary,
  /// The truncation wall of an unbounded D. Not a boundary of D; the field
  /// must stay away from it (support guard).
  kArtificial,
};

struct BoundaryPoint {
  double x;
  int outward_sign;  // -1 at the lower end of D, +1 at the upper end
};

/// Unmeasured region D = [lower, upper] of the line, with the measured
/// region Omega being everything outside D. Unbounded ends are represented
/// by an artificial wall of the computational box.
class DomainSpec {
 public:
  /// D = [a, b] with physical boundaries at both ends.
  static DomainSpec interval(double a, double b);
  /// D = (-inf, 0] truncated to [-length, 0]; the wall at -length is artificial.
  static DomainSpec negative_half_line(double length);
  /// D is the whole box [a, b]: Omega is empty and both walls are artificial.
  static DomainSpec whole_box(double a, double b);

  DomainSpec(double lower, EdgeKind lower_kind, double upper, EdgeKind upper_kind);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  EdgeKind lower_kind() const { return lower_kind_; }
  EdgeKind upper_kind() const { return upper_kind_; }

  /// Physical boundary points of D (artificial walls excluded).
  std::vector<BoundaryPoint> boundary_points() const;
  bool has_measured_region() const;

  /// True for points of the closed region D.
  bool contains(double x) const;

  /// Checks the grid covers D and that every edge of D sits on a node.
  /// Throws DomainError naming the offending edge.
  void check_on(const Grid1D& grid) const;

  /// Index range [first, last] of the grid nodes lying in D.
  std::pair<Index, Index> node_range(const Grid1D& grid) const;

 private:
  double lower_;
  double upper_;
  EdgeKind lower_kind_;
  EdgeKind upper_kind_;
};

/// Observation lattice: n_steps observations dt apart.
class ObservationSchedule {
 public:
  ObservationSchedule(double dt, std::int64_t n_steps, bool renormalize);

  /// Schedule covering [0, total_time]; total_time must be an integer
  /// multiple of dt to relative accuracy 1e-9.
  static ObservationSchedule covering(double total_time, double dt, bool renormalize);

  double dt() const { return dt_; }
  std::int64_t n_steps() const { return n_steps_; }
  double total_time() const { return static_cast<double>(n_steps_) * dt_; }
  bool renormalize() const { return renormalize_; }

 private:
  double dt_;
  std::int64_t n_steps_;
  bool renormalize_;
};

enum class FieldKind { kDensity, kWavefunction };

/// Samples of a real density or complex wave function on a Grid1D.
template <typename Scalar>
class Field {
 public:
  using Values = Vector<Scalar>;

  Field(Grid1D grid, Values values, FieldKind kind)
      : grid_(std::move(grid)), values_(std::move(values)), kind_(kind) {
    if (values_.size() != grid_.size()) {
      throw ArgumentError("field has " + std::to_string(values_.size()) +
                          " samples but the grid has " + std::to_string(grid_.size()) +
                          " nodes");
    }
  }

  /// Field with values f(x_i) at every node.
  template <typename F>
  static Field sample(const Grid1D& grid, F&& f, FieldKind kind) {
    Values v(grid.size());
    for (Index i = 0; i < grid.size(); ++i) v[i] = static_cast<Scalar>(f(grid.x(i)));
    return Field(grid, std::move(v), kind);
  }

  static Field zeros(const Grid1D& grid, FieldKind kind) {
    return Field(grid, Values::Zero(grid.size()), kind);
  }

  const Grid1D& grid() const { return grid_; }
  const Values& values() const { return values_; }
  FieldKind kind() const { return kind_; }
  Scalar operator[](Index i) const { return values_[i]; }

  /// Same grid and kind, new samples.
  Field with_values(Values v) const { return Field(grid_, std::move(v), kind_); }

 private:
  Grid1D grid_;
  Values values_;
  FieldKind kind_;
};

using DensityField = Field<double>;
using WaveField = Field<Complex>;

inline DensityField make_density(const Grid1D& grid, Eigen::VectorXd values) {
  return DensityField(grid, std::move(values), FieldKind::kDensity);
}

inline WaveField make_wave(const Grid1D& grid, Eigen::VectorXcd values) {
  return WaveField(grid, std::move(values), FieldKind::kWavefunction);
}

/// Copy of `field` with every node of the measured region (outside D) set to 0.
template <typename Scalar>
Field<Scalar> restrict_to(const Field<Scalar>& field, const DomainSpec& domain) {
  auto [first, last] = domain.node_range(field.grid());
  typename Field<Scalar>::Values v = Field<Scalar>::Values::Zero(field.grid().size());
  v.segment(first, last - first + 1) = field.values().segment(first, last - first + 1);
  return field.with_values(std::move(v));
}

/// Copy of `field` cut off at the physical boundary of D: measured-region
/// nodes are set to 0 and each boundary node keeps half its value, the
/// midpoint value of the jump. With that convention the trapezoid mass of the
/// result equals the trapezoid mass of the original over D, and the removed
/// part equals its trapezoid mass over the measured region.
template <typename Scalar>
Field<Scalar> truncate_at_boundary(const Field<Scalar>& field, const DomainSpec& domain) {
  auto [first, last] = domain.node_range(field.grid());
  typename Field<Scalar>::Values v = Field<Scalar>::Values::Zero(field.grid().size());
  v.segment(first, last - first + 1) = field.values().segment(first, last - first + 1);
  if (domain.lower_kind() == EdgeKind::kBoundary && first > 0) v[first] *= Scalar(0.5);
  if (domain.upper_kind() == EdgeKind::kBoundary && last < field.grid().size() - 1) v[last] *= Scalar(0.5);
  return field.with_values(std::move(v));
}

}  // namespace cclab

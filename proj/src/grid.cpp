#include "cclab/grid.hpp"

#include <cmath>
#include <sstream>

namespace cclab {

namespace {

// Coordinates closer than this fraction of dx to a node are on the node.
constexpr double kNodeTolerance = 1e-7;

std::string describe(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

Grid1D::Grid1D(double x_min, double x_max, Index n_points)
    : x_min_(x_min), x_max_(x_max), dx_(0.0), n_(n_points) {
  if (!(std::isfinite(x_min) && std::isfinite(x_max)) || !(x_min < x_max)) {
    throw ArgumentError("grid requires finite x_min < x_max, got [" + describe(x_min) + ", " +
                        describe(x_max) + "]");
  }
  if (n_points < kMinPoints) {
    throw ArgumentError("grid requires at least " + std::to_string(kMinPoints) +
                        " points, got " + std::to_string(n_points));
  }
  dx_ = (x_max - x_min) / static_cast<double>(n_points - 1);
}

Grid1D::Grid1D(double x_min, double dx, Index n_points, bool)
    : x_min_(x_min), x_max_(x_min + dx * static_cast<double>(n_points - 1)), dx_(dx), n_(n_points) {
  if (!std::isfinite(x_min) || !(dx > 0.0) || !std::isfinite(dx)) {
    throw ArgumentError("grid requires finite x_min and dx > 0");
  }
  if (n_points < kMinPoints) {
    throw ArgumentError("grid requires at least " + std::to_string(kMinPoints) +
                        " points, got " + std::to_string(n_points));
  }
}

Grid1D Grid1D::from_spacing(double x_min, double dx, Index n_points) {
  return Grid1D(x_min, dx, n_points, true);
}

Eigen::VectorXd Grid1D::nodes() const {
  Eigen::VectorXd x(n_);
  for (Index i = 0; i < n_; ++i) x[i] = this->x(i);
  return x;
}

std::optional<Index> Grid1D::node_index(double x) const {
  const double s = (x - x_min_) / dx_;
  const double r = std::round(s);
  if (std::abs(s - r) > kNodeTolerance || r < 0.0 || r > static_cast<double>(n_ - 1)) {
    return std::nullopt;
  }
  return static_cast<Index>(r);
}

Index Grid1D::require_node(double x, const std::string& what) const {
  auto i = node_index(x);
  if (!i) {
    throw DomainError(what + " at x=" + describe(x) + " is not a node of the grid [" +
                      describe(x_min_) + ", " + describe(x_max_) + "] with dx=" + describe(dx_));
  }
  return *i;
}

bool Grid1D::contains(double x) const {
  const double slack = kNodeTolerance * dx_;
  return x >= x_min_ - slack && x <= x_max_ + slack;
}

DomainSpec DomainSpec::interval(double a, double b) {
  return DomainSpec(a, EdgeKind::kBoundary, b, EdgeKind::kBoundary);
}

DomainSpec DomainSpec::negative_half_line(double length) {
  if (!(length > 0.0)) throw ArgumentError("half-line truncation length must be positive");
  return DomainSpec(-length, EdgeKind::kArtificial, 0.0, EdgeKind::kBoundary);
}

DomainSpec DomainSpec::whole_box(double a, double b) {
  return DomainSpec(a, EdgeKind::kArtificial, b, EdgeKind::kArtificial);
}

DomainSpec::DomainSpec(double lower, EdgeKind lower_kind, double upper, EdgeKind upper_kind)
    : lower_(lower), upper_(upper), lower_kind_(lower_kind), upper_kind_(upper_kind) {
  if (!(std::isfinite(lower) && std::isfinite(upper)) || !(lower < upper)) {
    throw ArgumentError("domain D needs a nonempty interior, got [" + describe(lower) + ", " +
                        describe(upper) + "]");
  }
}

std::vector<BoundaryPoint> DomainSpec::boundary_points() const {
  std::vector<BoundaryPoint> pts;
  if (lower_kind_ == EdgeKind::kBoundary) pts.push_back({lower_, -1});
  if (upper_kind_ == EdgeKind::kBoundary) pts.push_back({upper_, +1});
  return pts;
}

bool DomainSpec::has_measured_region() const { return !boundary_points().empty(); }

bool DomainSpec::contains(double x) const { return x >= lower_ && x <= upper_; }

void DomainSpec::check_on(const Grid1D& grid) const {
  if (!grid.contains(lower_) || !grid.contains(upper_)) {
    throw DomainError("domain [" + describe(lower_) + ", " + describe(upper_) +
                      "] is not inside the grid [" + describe(grid.x_min()) + ", " +
                      describe(grid.x_max()) + "]");
  }
  grid.require_node(lower_, "lower edge of D");
  grid.require_node(upper_, "upper edge of D");
  const Index lo = *grid.node_index(lower_);
  const Index hi = *grid.node_index(upper_);
  if (hi - lo < 4) {
    throw DomainError("domain D spans fewer than 5 grid nodes");
  }
}

std::pair<Index, Index> DomainSpec::node_range(const Grid1D& grid) const {
  check_on(grid);
  return {*grid.node_index(lower_), *grid.node_index(upper_)};
}

ObservationSchedule::ObservationSchedule(double dt, std::int64_t n_steps, bool renormalize)
    : dt_(dt), n_steps_(n_steps), renormalize_(renormalize) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ArgumentError("observation interval dt must be positive, got " + describe(dt));
  }
  if (n_steps < 1) {
    throw ArgumentError("observation schedule needs n_steps >= 1, got " + std::to_string(n_steps));
  }
}

ObservationSchedule ObservationSchedule::covering(double total_time, double dt, bool renormalize) {
  if (!(dt > 0.0)) {
    throw ArgumentError("observation interval dt must be positive, got " + describe(dt));
  }
  if (!(total_time > 0.0)) {
    throw ArgumentError("total time must be positive, got " + describe(total_time));
  }
  const double steps = total_time / dt;
  const double n = std::round(steps);
  if (n < 1.0 || std::abs(steps - n) > 1e-9 * n) {
    throw ArgumentError("total time " + describe(total_time) + " is not a multiple of dt " +
                        describe(dt));
  }
  return ObservationSchedule(dt, static_cast<std::int64_t>(n), renormalize);
}

}  // namespace cclab

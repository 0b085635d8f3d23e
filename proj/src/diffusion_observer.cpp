#include "cclab/diffusion_observer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>

#include "cclab/propagators.hpp"
#include "cclab/quadrature.hpp"
#include "cclab/tridiagonal.hpp"

namespace cclab {

namespace {

// Accepted deviation of the initial mass from 1.
constexpr double kUnitMassTolerance = 1e-8;
constexpr double kGuardMarginFraction = 0.05;

void check_initial_density(const DensityField& p0, const DomainSpec& domain, const char* op) {
  domain.check_on(p0.grid());
  auto [first, last] = domain.node_range(p0.grid());
  const auto& v = p0.values();
  double outside = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (i < first || i > last) outside = std::max(outside, std::abs(v[i]));
  }
  if (outside > 0.0) {
    throw ArgumentError(std::string(op) + ": p0 is not supported in D (max |p0| outside D = " +
                        std::to_string(outside) + ")");
  }
  if (v.minCoeff() < -1e-12) throw ArgumentError(std::string(op) + ": p0 has negative values");
  const double m = probability_mass(p0);
  if (!(m > 0.0)) {
    throw DegenerateConditioningError(std::string(op) + ": p0 vanishes on D");
  }
  if (std::abs(m - 1.0) > kUnitMassTolerance) {
    throw ArgumentError(std::string(op) + ": p0 must have unit mass on D, got " +
                        std::to_string(m));
  }
}

void require_dt(double dt, const char* op) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ArgumentError(std::string(op) + ": dt must be positive, got " + std::to_string(dt));
  }
}

Index step_count(double t_final, double dt, const char* op) {
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw ArgumentError(std::string(op) + ": t_final must be nonnegative");
  }
  const double n = std::round(t_final / dt);
  if (std::abs(n * dt - t_final) > 1e-9 * std::max(1.0, t_final)) {
    throw ArgumentError(std::string(op) + ": t_final=" + std::to_string(t_final) +
                        " is not a multiple of dt=" + std::to_string(dt));
  }
  return static_cast<Index>(n);
}

double guard_margin(const DomainSpec& domain) {
  return kGuardMarginFraction * (domain.upper() - domain.lower());
}

void check_walls(const DensityField& field, const DomainSpec& domain, const char* op) {
  const double m = artificial_wall_mass(field, domain, guard_margin(domain));
  if (m > kSupportGuardTolerance) {
    throw GuardViolation(std::string(op) + ": mass " + std::to_string(m) +
                         " reached the artificial wall of the box; enlarge the box");
  }
}

// Crank-Nicolson stepper for u_t = u_xx / 2 - shift * u on the interior
// nodes of D, Dirichlet zero at both edges of D.
class DirichletHeatStepper {
 public:
  DirichletHeatStepper(const DensityField& p0, const DomainSpec& domain, double dt)
      : grid_(p0.grid()), dt_(dt), r_(dt / (4.0 * grid_.dx() * grid_.dx())) {
    std::tie(first_, last_) = domain.node_range(grid_);
    if (last_ - first_ < 2) throw DomainError("D needs at least one interior node");
    u_ = p0.values().segment(first_ + 1, last_ - first_ - 1);
  }

  void step(double shift) {
    const double h = 0.5 * dt_ * shift;
    if (!solver_ || h != cached_shift_) {
      solver_.emplace(u_.size(), -r_, 1.0 + 2.0 * r_ + h, -r_);
      cached_shift_ = h;
    }
    Eigen::VectorXd rhs;
    tridiagonal_apply<double>(u_, r_, 1.0 - 2.0 * r_ - h, r_, rhs);
    solver_->solve_in_place(rhs);
    u_.swap(rhs);
  }

  DensityField field() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid_.size());
    v.segment(first_ + 1, u_.size()) = u_;
    return make_density(grid_, std::move(v));
  }

 private:
  Grid1D grid_;
  double dt_;
  double r_;
  Index first_ = 0;
  Index last_ = 0;
  Eigen::VectorXd u_;
  std::optional<ConstantTridiagonal<double>> solver_;
  double cached_shift_ = 0.0;
};

bool should_record(Index step, Index n_steps, Index every) {
  return step == n_steps || (every > 0 && step % every == 0);
}

}  // namespace

ConditionedDensityRun observation_recursion(const DensityField& p0, const DomainSpec& domain,
                                            const ObservationSchedule& schedule) {
  check_initial_density(p0, domain, "observation_recursion");
  const double dt = schedule.dt();
  ConditionedDensityRun run{schedule, domain, {0.0}, {p0}, {}, {}};
  DensityField pi = p0;
  for (std::int64_t j = 1; j <= schedule.n_steps(); ++j) {
    DensityField q = truncate_at_boundary(gaussian_step(pi, dt), domain);
    const double before = probability_mass(pi);
    const double s = probability_mass(q) / before;
    if (!(s > 1e-300) || !std::isfinite(s)) {
      throw DegenerateConditioningError("observation_recursion: no mass survives step " +
                                        std::to_string(j));
    }
    check_walls(q, domain, "observation_recursion");
    if (schedule.renormalize()) q = q.with_values(q.values() / probability_mass(q));
    const double t = static_cast<double>(j) * dt;
    run.times.push_back(t);
    run.survival.push_back(s);
    run.flux.times.push_back(t);
    run.flux.values.push_back((s - 1.0) / dt);
    run.snapshots.push_back(q);
    pi = std::move(q);
  }
  return run;
}

DensityHistory fp_dirichlet_solve(const DensityField& p0, const DomainSpec& domain,
                                  double t_final, double dt_solver, Index record_every) {
  require_dt(dt_solver, "fp_dirichlet_solve");
  domain.check_on(p0.grid());
  const Index n = step_count(t_final, dt_solver, "fp_dirichlet_solve");
  DensityHistory h{{0.0}, {p0}};
  if (n == 0) return h;
  DirichletHeatStepper stepper(p0, domain, dt_solver);
  for (Index s = 1; s <= n; ++s) {
    stepper.step(0.0);
    if (should_record(s, n, record_every)) {
      DensityField f = stepper.field();
      check_walls(f, domain, "fp_dirichlet_solve");
      h.times.push_back(static_cast<double>(s) * dt_solver);
      h.fields.push_back(std::move(f));
    }
  }
  return h;
}

DensityField renormalized_density(const DensityField& p, const DomainSpec& domain) {
  const double m = probability_mass(p, domain);
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw DegenerateConditioningError("renormalized_density: mass on D is " + std::to_string(m));
  }
  return p.with_values(p.values() / m);
}

DensityHistory renormalized_density(const DensityHistory& p, const DomainSpec& domain) {
  DensityHistory out{p.times, {}};
  out.fields.reserve(p.fields.size());
  for (const auto& f : p.fields) out.fields.push_back(renormalized_density(f, domain));
  return out;
}

double conditioned_flux(const DensityField& pi, const DomainSpec& domain) {
  double j = 0.0;
  for (double d : boundary_normal_derivative(pi, domain)) j += 0.5 * d;
  return j;
}

NonlinearRun nonlinear_conditioned_solve(const DensityField& p0, const DomainSpec& domain,
                                         double t_final, double dt_solver,
                                         const NonlinearSolveOptions& options) {
  require_dt(dt_solver, "nonlinear_conditioned_solve");
  check_initial_density(p0, domain, "nonlinear_conditioned_solve");
  const Index n = step_count(t_final, dt_solver, "nonlinear_conditioned_solve");
  const double dx = p0.grid().dx();
  const double tol =
      options.mass_drift_tolerance >= 0.0 ? options.mass_drift_tolerance : 1e-6 + 10.0 * dx * dx;

  NonlinearRun run;
  run.history = {{0.0}, {p0}};
  auto flux_of = [&](const DensityField& f) {
    return conditioned_flux(f, domain) / probability_mass(f, domain);
  };
  double j_now = flux_of(p0);
  run.flux = {{0.0}, {j_now}};
  if (n == 0) return run;

  DirichletHeatStepper stepper(p0, domain, dt_solver);
  double j_prev = j_now;
  for (Index s = 1; s <= n; ++s) {
    stepper.step(s == 1 ? j_now : 1.5 * j_now - 0.5 * j_prev);
    DensityField f = stepper.field();
    const double t = static_cast<double>(s) * dt_solver;
    const double m = probability_mass(f, domain);
    const double rate = std::abs(m - 1.0) / std::max(t, 1.0);
    run.max_mass_drift_rate = std::max(run.max_mass_drift_rate, rate);
    if (!(rate <= tol)) {
      throw GuardViolation("nonlinear_conditioned_solve: mass drift " + std::to_string(rate) +
                           " per unit time exceeds " + std::to_string(tol) +
                           " at t=" + std::to_string(t) + "; reduce dt_solver");
    }
    j_prev = j_now;
    j_now = flux_of(f);
    if (should_record(s, n, options.record_every)) {
      check_walls(f, domain, "nonlinear_conditioned_solve");
      run.history.times.push_back(t);
      run.history.fields.push_back(std::move(f));
      run.flux.times.push_back(t);
      run.flux.values.push_back(j_now);
    }
  }
  return run;
}

KillingRun intermittent_killing_run(const DensityField& p0, const DomainSpec& domain, double dt,
                                    double t_final) {
  require_dt(dt, "intermittent_killing_run");
  check_initial_density(p0, domain, "intermittent_killing_run");
  const Grid1D& g = p0.grid();
  for (const BoundaryPoint& b : domain.boundary_points()) {
    const double room = b.outward_sign > 0 ? g.x_max() - b.x : b.x - g.x_min();
    if (room < 10.0 * std::sqrt(dt)) {
      throw DomainError("intermittent_killing_run: the grid must extend at least 10 sqrt(dt) "
                        "into the measured region beyond x=" + std::to_string(b.x));
    }
  }
  const Index n = step_count(t_final, dt, "intermittent_killing_run");
  const double m0 = probability_mass(p0);

  KillingRun run{{0.0}, {m0}, {}, 0.0, 0.0, p0};
  DensityField p = p0;
  double removed_total = 0.0;
  for (Index k = 1; k <= n; ++k) {
    const double before = probability_mass(p);
    DensityField q = gaussian_step(p, dt);
    const double diffused = probability_mass(q);
    run.wall_leakage += std::max(0.0, before - diffused);
    DensityField kept = truncate_at_boundary(q, domain);
    check_walls(kept, domain, "intermittent_killing_run");
    const double mass = probability_mass(kept);
    const double removed = diffused - mass;
    removed_total += removed;
    run.removed.push_back(removed);
    run.mass.push_back(mass);
    run.times.push_back(static_cast<double>(k) * dt);
    const double residual = std::abs(m0 - mass - removed_total);
    run.max_balance_residual = std::max(run.max_balance_residual, residual);
    if (residual > kKillingBalanceTolerance) {
      throw GuardViolation("intermittent_killing_run: mass balance off by " +
                           std::to_string(residual) + " at step " + std::to_string(k) +
                           " (mass lost through the box walls)");
    }
    p = std::move(kept);
  }
  run.final_field = p;
  return run;
}

}  // namespace cclab

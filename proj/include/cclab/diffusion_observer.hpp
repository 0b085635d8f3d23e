#pragma once

#include <vector>

#include "cclab/grid.hpp"

namespace cclab {

/// Boundary flux J(t) sampled along a run. J is the sum of outward normal
/// derivatives times 1/2, so it is negative for absorbing boundaries and -J
/// is the conditional kill rate.
struct FluxSeries {
  std::vector<double> times;
  std::vector<double> values;
};

/// Densities on D at increasing times, all on one grid.
struct DensityHistory {
  std::vector<double> times;
  std::vector<DensityField> fields;

  const DensityField& final() const { return fields.back(); }
};

struct ConditionedDensityRun {
  ObservationSchedule schedule;
  DomainSpec domain;
  std::vector<double> times;             // 0, dt, 2 dt, ...
  std::vector<DensityField> snapshots;   // snapshots[0] is p0
  std::vector<double> survival;          // mass left on D after step j, before renormalising
  FluxSeries flux;                       // lattice flux (survival - 1) / dt
};

/// Intermittent observation of a diffusing particle: free diffusion for dt,
/// then the part in the measured region is cut off and (if the schedule says
/// so) the rest is renormalised to unit mass. Densities are cut with the
/// half-value boundary convention of truncate_at_boundary; masses are whole
/// grid trapezoid integrals of fields that vanish outside D.
ConditionedDensityRun observation_recursion(const DensityField& p0, const DomainSpec& domain,
                                            const ObservationSchedule& schedule);

/// Crank-Nicolson solution of p_t = p_xx / 2 on D with p = 0 on the edges of
/// D (physical boundaries and artificial walls alike). Records every
/// `record_every`-th step plus the final time; t_final = 0 returns p0.
DensityHistory fp_dirichlet_solve(const DensityField& p0, const DomainSpec& domain,
                                  double t_final, double dt_solver, Index record_every = 1);

/// p / (mass of p on D). Throws DegenerateConditioningError for zero mass.
DensityField renormalized_density(const DensityField& p, const DomainSpec& domain);
DensityHistory renormalized_density(const DensityHistory& p, const DomainSpec& domain);

/// J = (1/2) sum over the boundary points of d pi / dn.
double conditioned_flux(const DensityField& pi, const DomainSpec& domain);

struct NonlinearSolveOptions {
  Index record_every = 1;
  /// Allowed |mass - 1| per unit time, measured as |mass - 1| / max(t, 1);
  /// negative selects 1e-6 + 10 dx^2.
  double mass_drift_tolerance = -1.0;
};

struct NonlinearRun {
  DensityHistory history;
  FluxSeries flux;
  double max_mass_drift_rate = 0.0;
};

/// Direct integration of pi_t = pi_xx / 2 - J(t) pi with pi = 0 on the edges
/// of D. Diffusion is Crank-Nicolson; J comes from the current iterate
/// (flux over mass), is extrapolated to the half step and applied as a
/// scalar shift. Throws GuardViolation when the mass drifts from 1 faster
/// than the tolerance.
NonlinearRun nonlinear_conditioned_solve(const DensityField& p0, const DomainSpec& domain,
                                         double t_final, double dt_solver,
                                         const NonlinearSolveOptions& options = {});

struct KillingRun {
  std::vector<double> times;    // 0, dt, ..., t_final
  std::vector<double> mass;     // mass left in the box after each observation
  std::vector<double> removed;  // removed[k] is the mass cut at observation k+1
  double wall_leakage = 0.0;    // mass lost through the box walls, all steps
  double max_balance_residual = 0.0;
  DensityField final_field;
};

/// Killing without renormalisation: diffuse for dt, remove and book the mass
/// in the measured region, repeat. The grid must reach past every physical
/// boundary of D so that the removed mass is on the grid; artificial walls
/// are checked by the support guard.
KillingRun intermittent_killing_run(const DensityField& p0, const DomainSpec& domain, double dt,
                                    double t_final);

/// Balance tolerance the killing run asserts on 1 - mass - sum(removed).
inline constexpr double kKillingBalanceTolerance = 1e-10;

}  // namespace cclab

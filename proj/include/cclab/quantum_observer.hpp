#pragma once

#include <vector>

#include "cclab/fitting.hpp"
#include "cclab/grid.hpp"

namespace cclab {

struct WaveHistory {
  std::vector<double> times;
  std::vector<WaveField> fields;

  const WaveField& final() const { return fields.back(); }
};

struct QuantumRun {
  ObservationSchedule schedule;
  DomainSpec domain;
  std::vector<double> times;
  std::vector<WaveField> snapshots;  // snapshots[0] is psi0
  std::vector<double> survival;      // fraction of the norm kept at step j, before renormalising
  double max_edge_mass = 0.0;        // largest box-edge mass seen after a free step

  /// 1 - product of the survival fractions.
  double total_leakage() const;
};

/// Intermittent observation of a free quantum particle: free propagation
/// for dt (spectral, periodic box), then the wave function is set to zero on
/// the measured region and renormalised on D if the schedule says so. Throws
/// GuardViolation when the freely evolved wave reaches the box edges (mass
/// above kSupportGuardTolerance within 5% of the box length) and
/// DegenerateConditioningError when survival drops below 1e-12.
QuantumRun quantum_truncation_recursion(const WaveField& psi0, const DomainSpec& domain,
                                        const ObservationSchedule& schedule);

struct SchroedingerOptions {
  Index record_every = 1;
  /// Backward Euler half steps (each dt/2) replacing the first Crank-Nicolson
  /// steps; damps the grid-scale modes of discontinuous data. Must be even.
  int startup_half_steps = 0;
};

/// Crank-Nicolson solution of i psi_t = -psi_xx / 2 on D with psi = 0 on both
/// edges of D. Without start-up steps the scheme conserves the discrete norm
/// and dirichlet_energy exactly.
WaveHistory dirichlet_schrodinger_solve(const WaveField& psi0, const DomainSpec& domain,
                                        double t_final, double dt_solver,
                                        const SchroedingerOptions& options = {});

/// Discrete <psi, -psi''/2> on D with Dirichlet edges: sum |psi_{i+1}-psi_i|^2 / (2 dx).
double dirichlet_energy(const WaveField& psi, const DomainSpec& domain);

struct EpsilonFlux {
  double epsilon = 0.0;
  Complex j_value;
};

/// J = (i eps / 2) int |pi'|^2 dx / (1 + eps^2) with the gradient energy
/// taken from forward differences over the whole grid.
EpsilonFlux regularized_flux(const WaveField& pi, double epsilon);

/// Unit complex c minimising ||a - c b||.
Complex phase_alignment(const WaveField& a, const WaveField& b);

struct RenormalizationReport {
  double sup_distance = 0.0;  // over all snapshots, after phase alignment
  double final_norm_unrenormalized = 0.0;
};

/// Runs the recursion with and without renormalisation and compares the
/// renormalised snapshots with the normalised unrenormalised ones.
RenormalizationReport renormalization_irrelevance_check(const WaveField& psi0,
                                                        const DomainSpec& domain,
                                                        const ObservationSchedule& schedule);

struct ZenoRung {
  double dt = 0.0;
  double leakage = 0.0;   // norm lost by the unrenormalised recursion over [0, tau]
  double l2_error = 0.0;  // renormalised recursion vs the Dirichlet solve at tau
  double max_edge_mass = 0.0;
};

struct ZenoScan {
  std::vector<ZenoRung> rungs;
  PowerLawFit leakage_fit;
  PowerLawFit error_fit;
  double reference_dt = 0.0;
  bool leakage_monotone = false;
  bool error_monotone = false;
};

/// Truncation recursion along a decreasing dt ladder at fixed tau, compared
/// with dirichlet_schrodinger_solve(psi0, tau, reference_dt).
ZenoScan zeno_scan(const WaveField& psi0, const DomainSpec& domain, double tau,
                   const std::vector<double>& dt_ladder, double reference_dt);

}  // namespace cclab

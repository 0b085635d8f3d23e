#include "cclab/quantum_observer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "cclab/propagators.hpp"
#include "cclab/quadrature.hpp"
#include "cclab/tridiagonal.hpp"

namespace cclab {

namespace {

constexpr double kUnitNormTolerance = 1e-8;
constexpr double kMinSurvival = 1e-12;
constexpr double kEdgeMarginFraction = 0.05;

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

void check_initial_wave(const WaveField& psi0, const DomainSpec& domain, const char* op) {
  domain.check_on(psi0.grid());
  auto [first, last] = domain.node_range(psi0.grid());
  const auto& v = psi0.values();
  for (Index i = 0; i < v.size(); ++i) {
    if ((i < first || i > last) && v[i] != Complex(0.0)) {
      throw ArgumentError(std::string(op) + ": psi0 is not supported in D (nonzero at x=" +
                          std::to_string(psi0.grid().x(i)) + ")");
    }
  }
  const double m = probability_mass(psi0);
  if (!(m > 0.0)) throw DegenerateConditioningError(std::string(op) + ": psi0 vanishes on D");
  if (std::abs(m - 1.0) > kUnitNormTolerance) {
    throw ArgumentError(std::string(op) + ": psi0 must have unit norm on D, got " +
                        std::to_string(m));
  }
}

double normalized_l2(const WaveField& a, const WaveField& b) {
  const Complex c = phase_alignment(a, b);
  return std::sqrt(probability_mass(a.with_values(a.values() - c * b.values())));
}

}  // namespace

double QuantumRun::total_leakage() const {
  double kept = 1.0;
  for (double s : survival) kept *= s;
  return 1.0 - kept;
}

QuantumRun quantum_truncation_recursion(const WaveField& psi0, const DomainSpec& domain,
                                        const ObservationSchedule& schedule) {
  check_initial_wave(psi0, domain, "quantum_truncation_recursion");
  const Grid1D& g = psi0.grid();
  const double margin = kEdgeMarginFraction * (g.x_max() - g.x_min());
  QuantumRun run{schedule, domain, {0.0}, {psi0}, {}, 0.0};
  WaveField psi = psi0;
  for (std::int64_t j = 1; j <= schedule.n_steps(); ++j) {
    const double before = probability_mass(psi);
    WaveField free = fresnel_step(psi, schedule.dt());
    const double edge = edge_mass(free, margin);
    run.max_edge_mass = std::max(run.max_edge_mass, edge);
    if (edge > kSupportGuardTolerance) {
      throw GuardViolation("quantum_truncation_recursion: mass " + std::to_string(edge) +
                           " reached the edges of the periodic box at step " +
                           std::to_string(j) + "; enlarge the box");
    }
    WaveField kept = restrict_to(free, domain);
    const double s = probability_mass(kept) / before;
    if (!(s >= kMinSurvival)) {
      throw DegenerateConditioningError("quantum_truncation_recursion: survival " +
                                        std::to_string(s) + " at step " + std::to_string(j));
    }
    if (schedule.renormalize()) {
      kept = kept.with_values(kept.values() / std::sqrt(probability_mass(kept)));
    }
    run.times.push_back(static_cast<double>(j) * schedule.dt());
    run.survival.push_back(std::min(1.0, s));
    run.snapshots.push_back(kept);
    psi = std::move(kept);
  }
  return run;
}

WaveHistory dirichlet_schrodinger_solve(const WaveField& psi0, const DomainSpec& domain,
                                        double t_final, double dt_solver,
                                        const SchroedingerOptions& options) {
  require_dt(dt_solver, "dirichlet_schrodinger_solve");
  domain.check_on(psi0.grid());
  if (options.startup_half_steps < 0 || options.startup_half_steps % 2 != 0) {
    throw ArgumentError("dirichlet_schrodinger_solve: startup_half_steps must be even and >= 0");
  }
  const Index n = step_count(t_final, dt_solver, "dirichlet_schrodinger_solve");
  WaveHistory h{{0.0}, {psi0}};
  if (n == 0) return h;

  const Grid1D& g = psi0.grid();
  auto [first, last] = domain.node_range(g);
  if (last - first < 2) throw DomainError("D needs at least one interior node");
  Eigen::VectorXcd u = psi0.values().segment(first + 1, last - first - 1);

  // Backward Euler over dt/2 has the same left-hand matrix as Crank-Nicolson over dt.
  const Complex r(0.0, dt_solver / (4.0 * g.dx() * g.dx()));
  const ConstantTridiagonal<Complex> lhs(u.size(), -r, 1.0 + 2.0 * r, -r);
  const Index startup_steps = std::min<Index>(n, options.startup_half_steps / 2);

  Eigen::VectorXcd rhs;
  for (Index s = 1; s <= n; ++s) {
    if (s <= startup_steps) {
      lhs.solve_in_place(u);
      lhs.solve_in_place(u);
    } else {
      tridiagonal_apply<Complex>(u, r, 1.0 - 2.0 * r, r, rhs);
      lhs.solve_in_place(rhs);
      u.swap(rhs);
    }
    if (s == n || (options.record_every > 0 && s % options.record_every == 0)) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(g.size());
      v.segment(first + 1, u.size()) = u;
      WaveField f = make_wave(g, std::move(v));
      const double wall = artificial_wall_mass(f, domain, kEdgeMarginFraction * (domain.upper() - domain.lower()));
      if (wall > kSupportGuardTolerance) {
        throw GuardViolation("dirichlet_schrodinger_solve: mass " + std::to_string(wall) +
                             " reached an artificial wall of the box; enlarge the box");
      }
      h.times.push_back(static_cast<double>(s) * dt_solver);
      h.fields.push_back(std::move(f));
    }
  }
  return h;
}

double dirichlet_energy(const WaveField& psi, const DomainSpec& domain) {
  auto [first, last] = domain.node_range(psi.grid());
  const auto& v = psi.values();
  double e = 0.0;
  // The edge values of D are taken as 0 (Dirichlet).
  auto at = [&](Index i) { return (i == first || i == last) ? Complex(0.0) : v[i]; };
  for (Index i = first; i < last; ++i) e += std::norm(at(i + 1) - at(i));
  return e / (2.0 * psi.grid().dx());
}

EpsilonFlux regularized_flux(const WaveField& pi, double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ArgumentError("regularized_flux: epsilon must be >= 0, got " + std::to_string(epsilon));
  }
  if (epsilon == 0.0) return {0.0, Complex(0.0)};
  const auto& v = pi.values();
  const double dx = pi.grid().dx();
  double gradient_energy = 0.0;
  for (Index i = 0; i + 1 < v.size(); ++i) gradient_energy += std::norm(v[i + 1] - v[i]);
  gradient_energy /= dx;
  return {epsilon, Complex(0.0, 0.5 * epsilon * gradient_energy / (1.0 + epsilon * epsilon))};
}

Complex phase_alignment(const WaveField& a, const WaveField& b) {
  const Complex overlap = b.values().dot(a.values());  // conj(b) . a
  if (std::abs(overlap) == 0.0) return Complex(1.0);
  return overlap / std::abs(overlap);
}

RenormalizationReport renormalization_irrelevance_check(const WaveField& psi0,
                                                        const DomainSpec& domain,
                                                        const ObservationSchedule& schedule) {
  const ObservationSchedule with(schedule.dt(), schedule.n_steps(), true);
  const ObservationSchedule without(schedule.dt(), schedule.n_steps(), false);
  const QuantumRun a = quantum_truncation_recursion(psi0, domain, with);
  const QuantumRun b = quantum_truncation_recursion(psi0, domain, without);
  RenormalizationReport report;
  for (std::size_t j = 0; j < a.snapshots.size(); ++j) {
    const WaveField& ra = a.snapshots[j];
    const double norm = std::sqrt(probability_mass(b.snapshots[j]));
    const WaveField nb = b.snapshots[j].with_values(b.snapshots[j].values() / norm);
    const Complex c = phase_alignment(ra, nb);
    report.sup_distance =
        std::max(report.sup_distance, (ra.values() - c * nb.values()).cwiseAbs().maxCoeff());
  }
  report.final_norm_unrenormalized = std::sqrt(probability_mass(b.snapshots.back()));
  return report;
}

ZenoScan zeno_scan(const WaveField& psi0, const DomainSpec& domain, double tau,
                   const std::vector<double>& dt_ladder, double reference_dt) {
  if (dt_ladder.size() < 2) throw ArgumentError("zeno_scan: the dt ladder needs two rungs");
  for (std::size_t i = 1; i < dt_ladder.size(); ++i) {
    if (!(dt_ladder[i] < dt_ladder[i - 1])) {
      throw ArgumentError("zeno_scan: the dt ladder must be decreasing");
    }
  }
  ZenoScan scan;
  scan.reference_dt = reference_dt;
  const WaveField reference = dirichlet_schrodinger_solve(psi0, domain, tau, reference_dt, {0}).final();
  std::vector<double> dts, leaks, errors;
  for (double dt : dt_ladder) {
    const QuantumRun raw =
        quantum_truncation_recursion(psi0, domain, ObservationSchedule::covering(tau, dt, false));
    const WaveField& last = raw.snapshots.back();
    const WaveField normalized = last.with_values(last.values() / std::sqrt(probability_mass(last)));
    ZenoRung rung{dt, raw.total_leakage(), normalized_l2(reference, normalized), raw.max_edge_mass};
    scan.rungs.push_back(rung);
    dts.push_back(dt);
    leaks.push_back(rung.leakage);
    errors.push_back(rung.l2_error);
  }
  scan.leakage_monotone = scan.error_monotone = true;
  for (std::size_t i = 1; i < scan.rungs.size(); ++i) {
    scan.leakage_monotone = scan.leakage_monotone && leaks[i] < leaks[i - 1];
    scan.error_monotone = scan.error_monotone && errors[i] < errors[i - 1];
  }
  scan.leakage_fit = fit_power_law(dts, leaks);
  scan.error_fit = fit_power_law(dts, errors);
  return scan;
}

}  // namespace cclab

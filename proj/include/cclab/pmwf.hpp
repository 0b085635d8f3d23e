#pragma once

#include <string>
#include <vector>

#include "cclab/fitting.hpp"
#include "cclab/grid.hpp"
#include "cclab/quadrature.hpp"

namespace cclab {

/// Initial plane wave e^{-ikx}; the measured region is the positive half-line.
struct PlaneWaveSpec {
  enum class Side { kPositive };

  double k = 1.0;
  Side side = Side::kPositive;

  void validate() const;
};

/// Free evolution over tau of Theta(-x) e^{-ikx}:
/// (1/2) e^{-ikx - i k^2 tau / 2} erfc((x + k tau) e^{-i pi/4} / sqrt(2 tau)).
Complex phi_instantaneous(double x, double tau, const PlaneWaveSpec& spec);

/// The same value by quadrature of the free-propagator integral: a real
/// segment through the stationary point plus the rest of the half-line
/// rotated by -3 pi/4, where the integrand decays like a Gaussian.
QuadratureResult phi_instantaneous_quadrature(double x, double tau, const PlaneWaveSpec& spec,
                                              double abs_tol = 1e-11);

/// Dirichlet evolution on the negative half-line by odd reflection:
/// phi^I(x) - phi^I(-x) for x < 0 and 0 for x >= 0.
Complex phi_continuous(double x, double tau, const PlaneWaveSpec& spec);

/// Free evolution over `release` of phi_continuous(., tau) (the wave function
/// after the measurement ends), evaluated at x >= 0 by integrating along
/// y = -r e^{i pi/4}. Throws DomainError for x < 0.
QuadratureResult released_continuous(double x, double release, double tau,
                                     const PlaneWaveSpec& spec, double rel_tol = 1e-10);

/// phi_instantaneous on the grid. With `verify`, up to 64 strided nodes are
/// recomputed by phi_instantaneous_quadrature and an AccuracyError is thrown
/// if the two disagree by more than 1e-6.
WaveField pmwf_instantaneous(const PlaneWaveSpec& spec, double tau, const Grid1D& grid,
                             bool verify = true);

/// phi_continuous on the grid (zero for x >= 0, including the node at 0).
WaveField pmwf_continuous(const PlaneWaveSpec& spec, double tau, const Grid1D& grid);

/// Largest |closed form - quadrature| of phi^I over the given points.
double instantaneous_dual_path_distance(const PlaneWaveSpec& spec, double tau,
                                        const std::vector<double>& xs);

struct BoxedCheckOptions {
  double box_length = 50.0;   // D = [-box_length, 0]
  double dx = 0.005;
  double dt = 1e-3;
  double taper_start = 30.0;  // plane wave switched off smoothly between these depths
  double taper_end = 45.0;
  double window = 2.0;        // compared on [-window, 0]
  int startup_half_steps = 4;
};

struct BoxedCheck {
  double sup_distance = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  Index nodes = 0;
};

/// Crank-Nicolson Dirichlet solve of the smoothly tapered plane wave on a
/// finite box against pmwf_continuous on the window next to the boundary.
/// The far wall is checked by the support guard of the solver.
BoxedCheck continuous_box_crosscheck(const PlaneWaveSpec& spec, double tau,
                                     const BoxedCheckOptions& options = {});

struct Figure1Table {
  std::vector<double> x;
  std::vector<double> re_instantaneous, im_instantaneous;
  std::vector<double> re_continuous, im_continuous;
};

/// Both wave functions at time tau on n evenly spaced points of [x_lo, x_hi].
Figure1Table figure1_data(const PlaneWaveSpec& spec, double tau = 1.0, double x_lo = -20.0,
                          double x_hi = 10.0, Index n = 3001);

struct NamedCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Shape assertions on a figure table: ordering, a hard zero of the
/// continuous columns on x > 0, oscillating decay of the instantaneous ones
/// there, oscillation of both on x < 0 and the plane-wave period far from 0.
std::vector<NamedCheck> figure1_checks(const Figure1Table& table, const PlaneWaveSpec& spec);

struct TailFit {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double exponent = 0.0;
  double amplitude = 0.0;
  double r_squared = 0.0;
  double min_signal_to_noise = 0.0;
};

/// Power-law fit of |values| against x; every value must exceed 100 times
/// its noise estimate, otherwise InsufficientDataError.
TailFit fit_tail(const std::vector<double>& x, const std::vector<double>& magnitude,
                 const std::vector<double>& noise);

/// |phi^I(x, tau)| on n points of [x_lo, x_hi].
TailFit instantaneous_tail(const PlaneWaveSpec& spec, double tau, double x_lo, double x_hi,
                           Index n = 81);
/// |released_continuous(x, release, tau)| on n points of [x_lo, x_hi].
TailFit continuous_tail(const PlaneWaveSpec& spec, double tau, double release, double x_lo,
                        double x_hi, Index n = 81);

enum class MomentVerdict { kConvergent, kDivergent, kInconclusive };
const char* to_string(MomentVerdict v);

struct MomentScan {
  std::vector<double> cutoffs;
  std::vector<double> moments;    // int_{|x| <= c} |x| |phi|^2 dx
  std::vector<double> increments; // moments[j+1] - moments[j]
  double log_growth = 0.0;        // slope of the last two moments against log c
  MomentVerdict verdict = MomentVerdict::kInconclusive;
};

/// Truncated first moments of |field|^2 by trapezoid quadrature. The verdict
/// is convergent when the last increment is below rel_tol of the moment and
/// the increments shrink by at least half; divergent when the increment per
/// unit log c holds at 70% or more of the previous one while staying above
/// rel_tol.
MomentScan first_moment_scan(const WaveField& field, const std::vector<double>& cutoffs,
                             double rel_tol = 0.02);

enum class PmwfVariant { kInstantaneous, kContinuous };
const char* to_string(PmwfVariant v);

struct ScalingFit {
  PmwfVariant variant = PmwfVariant::kInstantaneous;
  double x1 = 0.0, x2 = 0.0;
  std::vector<double> dt;
  std::vector<double> partial_moment;    // int_{x1}^{x2} x |phi|^2
  std::vector<double> conditional_mean;  // partial_moment / int_{x1}^{x2} |phi|^2
  std::vector<double> amplitude_moment;  // int_{x1}^{x2} x |phi|
  PowerLawFit partial_fit;
  PowerLawFit conditional_fit;
  PowerLawFit amplitude_fit;
};

/// Interval statistics of the wave function a time dt after the measurement
/// ends, for each dt of a decreasing ladder: phi^I(., dt) for the
/// instantaneous variant, released_continuous(., dt, tau_m) for the
/// continuous one.
ScalingFit interval_mean_scaling(PmwfVariant variant, double x1, double x2,
                                 const std::vector<double>& dt_ladder,
                                 const PlaneWaveSpec& spec = {}, double tau_m = 1.0);

}  // namespace cclab

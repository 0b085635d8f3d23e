#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "cclab/diffusion_observer.hpp"
#include "cclab/errors.hpp"

namespace cclab {

/// All walkers left D in the same step; nobody is left to copy.
class EnsembleCollapse : public GuardViolation {
 public:
  using GuardViolation::GuardViolation;
};

/// Counter-based random numbers: every draw is a pure function of
/// (seed, stream, walker, step, slot), so a run does not depend on how
/// walkers are split across threads.
class CounterRng {
 public:
  enum class Stream : std::uint64_t { kInitial = 1, kIncrement = 2, kReinjection = 3 };

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(Stream stream, std::uint64_t walker, std::uint64_t step,
                     std::uint64_t slot) const;
  /// Uniform on the open interval (0, 1).
  double uniform(Stream stream, std::uint64_t walker, std::uint64_t step, std::uint64_t slot) const;
  /// Standard normal (Box-Muller on two uniforms of the slot).
  double normal(Stream stream, std::uint64_t walker, std::uint64_t step, std::uint64_t slot) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Axis-aligned box D = prod [lower_k, upper_k] in d = 1, 2 or 3 dimensions.
class BoxDomain {
 public:
  BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static BoxDomain cube(int dim, double lower, double upper);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  /// Strictly inside.
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& p) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

/// Draws one starting point; `u(slot)` is a uniform on (0,1) private to the walker.
using PointSampler =
    std::function<Eigen::VectorXd(const BoxDomain&, const std::function<double(std::uint64_t)>& u)>;

/// Product of the ground-state densities sin(pi (x - a) / (b - a)) on every axis.
PointSampler sine_product_sampler();
PointSampler uniform_sampler();

struct ParticleEnsemble {
  Eigen::MatrixXd positions;  // d x N
  BoxDomain domain;
  CounterRng rng;
  std::uint64_t step = 0;  // completed steps
  std::vector<std::int64_t> kill_log;

  Index size() const { return positions.cols(); }
};

/// N walkers drawn from `sampler`, seeded deterministically.
ParticleEnsemble make_ensemble(const PointSampler& sampler, const BoxDomain& domain, Index n,
                               std::uint64_t seed);

/// One Euler step with increment variance dt per coordinate, then every
/// walker that ended outside D is moved, in index order, onto a uniformly
/// chosen other walker that is inside D at that moment. `threads` = 0 uses
/// the hardware concurrency.
ParticleEnsemble fv_step(const ParticleEnsemble& ens, double dt, unsigned threads = 0);

struct EmpiricalEstimate {
  double t = 0.0;
  Eigen::VectorXd bin_edges;        // along axis 0
  Eigen::VectorXd histogram;        // bin probabilities, sum 1
  double kill_rate = 0.0;           // re-injections per walker per unit time since the previous estimate
  std::vector<double> axis0_sorted; // axis-0 coordinates, sorted
};

struct FvRunOptions {
  Index bins = 64;
  unsigned threads = 0;
};

struct FvRun {
  std::vector<EmpiricalEstimate> estimates;
  std::vector<std::int64_t> kill_log;
  double dt = 0.0;
  Index walkers = 0;
};

/// Runs to t_final and records an estimate at t = 0 and at every sample time
/// (each must be a multiple of dt in (0, t_final]; t_final is always added).
FvRun fv_run(const PointSampler& sampler, const BoxDomain& domain, double dt, double t_final,
             Index n, std::uint64_t seed, std::vector<double> sample_times = {},
             const FvRunOptions& options = {});

/// Re-injection rate per walker per unit time over consecutive windows of
/// `window_steps` steps, reported as the estimate of -J. A window shorter
/// than 10 steps throws InsufficientDataError.
FluxSeries empirical_flux(const std::vector<std::int64_t>& kill_log, Index walkers, double dt,
                          Index window_steps);

/// Mean kill rate over the steps in [t_from, t_to] with its standard error
/// from the spread of per-window means (window `window_steps`).
struct RateEstimate {
  double rate = 0.0;
  double standard_error = 0.0;
};
RateEstimate mean_kill_rate(const std::vector<std::int64_t>& kill_log, Index walkers, double dt,
                            double t_from, double t_to, Index window_steps = 1000);

/// Kolmogorov-Smirnov distance between sorted samples and a CDF.
double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf);

/// CDF of the density sin(pi (x - a) / (b - a)) pi / (2 (b - a)) on [a, b].
double sine_profile_cdf(double x, double a, double b);

/// KS distance of sorted samples from the CDF of a density field on a grid
/// (trapezoid-integrated, linear between nodes).
double ks_distance(const std::vector<double>& sorted, const DensityField& density);

}  // namespace cclab

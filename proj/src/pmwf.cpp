#include "cclab/pmwf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "cclab/quantum_observer.hpp"
#include "cclab/special_functions.hpp"

namespace cclab {

namespace {

using std::numbers::pi;

const Complex kI(0.0, 1.0);
const Complex kOmega = std::polar(1.0, pi / 4.0);  // e^{i pi/4}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ArgumentError(std::string(what) + " must be positive, got " + std::to_string(v));
  }
}

// phi^I continued to complex y.
Complex phi_instantaneous_complex(Complex y, double tau, double k) {
  const Complex z = (y + k * tau) * std::conj(kOmega) / std::sqrt(2.0 * tau);
  return 0.5 * std::exp(-kI * k * y - kI * (0.5 * k * k * tau)) * cclab::erfc(z);
}

// (2 pi i t)^{-1/2}
Complex propagator_prefactor(double t) { return std::conj(kOmega) / std::sqrt(2.0 * pi * t); }

// C-infinity switch: 1 for depth <= a, 0 for depth >= b.
double taper(double depth, double a, double b) {
  const double s = std::clamp((depth - a) / (b - a), 0.0, 1.0);
  auto f = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  return f(1.0 - s) / (f(1.0 - s) + f(s));
}

std::vector<double> linspace(double a, double b, Index n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

int sign_changes(const std::vector<double>& v) {
  int c = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if ((v[i - 1] < 0.0 && v[i] >= 0.0) || (v[i - 1] >= 0.0 && v[i] < 0.0)) ++c;
  }
  return c;
}

}  // namespace

void PlaneWaveSpec::validate() const {
  if (!(k != 0.0) || !std::isfinite(k)) throw ArgumentError("plane wave: k must be nonzero");
}

Complex phi_instantaneous(double x, double tau, const PlaneWaveSpec& spec) {
  spec.validate();
  require_positive(tau, "phi_instantaneous: tau");
  return phi_instantaneous_complex(Complex(x), tau, spec.k);
}

QuadratureResult phi_instantaneous_quadrature(double x, double tau, const PlaneWaveSpec& spec,
                                              double abs_tol) {
  spec.validate();
  require_positive(tau, "phi_instantaneous_quadrature: tau");
  const double k = spec.k;
  const double ystar = x + k * tau;
  const double margin = 8.0 * std::sqrt(tau);
  const double y0 = std::min(0.0, ystar) - margin;
  // e^{-iky} e^{i (x-y)^2 / (2 tau)}
  auto g = [&](Complex y) {
    return std::exp(-kI * k * y + kI * (Complex(x) - y) * (Complex(x) - y) / (2.0 * tau));
  };
  QuadratureResult seg = adaptive_gauss_kronrod([&](double y) { return g(Complex(y)); }, y0, 0.0,
                                                abs_tol, 0.0, 20000);
  // (-inf, y0] along y = y0 - s e^{i pi/4}: |g| = exp(-(s^2 + sqrt2 |y0 - y*| s) / (2 tau)).
  const double reach = std::sqrt(2.0 * tau * 80.0);
  QuadratureResult tail = adaptive_gauss_kronrod(
      [&](double s) { return kOmega * g(Complex(y0) - s * kOmega); }, 0.0, reach, abs_tol, 0.0);
  const Complex pre = propagator_prefactor(tau);
  QuadratureResult r{pre * (seg.value + tail.value),
                     std::abs(pre) * (seg.error_estimate + tail.error_estimate),
                     seg.evaluations + tail.evaluations, seg.converged && tail.converged};
  if (!r.converged) {
    throw AccuracyError("phi_instantaneous_quadrature: no convergence at x=" + std::to_string(x) +
                        ", tau=" + std::to_string(tau) + " (error estimate " +
                        std::to_string(r.error_estimate) + " after " +
                        std::to_string(r.evaluations) + " evaluations)");
  }
  return r;
}

Complex phi_continuous(double x, double tau, const PlaneWaveSpec& spec) {
  if (x >= 0.0) return Complex(0.0);
  return phi_instantaneous(x, tau, spec) - phi_instantaneous(-x, tau, spec);
}

QuadratureResult released_continuous(double x, double release, double tau,
                                     const PlaneWaveSpec& spec, double rel_tol) {
  spec.validate();
  require_positive(release, "released_continuous: release time");
  require_positive(tau, "released_continuous: tau");
  if (x < 0.0) throw DomainError("released_continuous: x must be >= 0, got " + std::to_string(x));
  const double k = spec.k;
  // |integrand| ~ exp(-(r^2 + sqrt2 x r) / (2 s)); stop where the exponent reaches 40.
  const double b = std::sqrt(2.0) * x;
  const double reach = 0.5 * (-b + std::sqrt(b * b + 4.0 * 80.0 * release));
  auto f = [&](double r) {
    const Complex y = -r * kOmega;
    const Complex odd = phi_instantaneous_complex(y, tau, k) - phi_instantaneous_complex(-y, tau, k);
    return kOmega * odd * std::exp(kI * (Complex(x) - y) * (Complex(x) - y) / (2.0 * release));
  };
  QuadratureResult q = adaptive_gauss_kronrod(f, 0.0, reach, 1e-300, rel_tol, 20000);
  const Complex pre = propagator_prefactor(release);
  q.value *= pre;
  q.error_estimate *= std::abs(pre);
  if (!q.converged) {
    throw AccuracyError("released_continuous: no convergence at x=" + std::to_string(x) +
                        " (error estimate " + std::to_string(q.error_estimate) + ")");
  }
  return q;
}

WaveField pmwf_instantaneous(const PlaneWaveSpec& spec, double tau, const Grid1D& grid,
                             bool verify) {
  auto field = WaveField::sample(grid, [&](double x) { return phi_instantaneous(x, tau, spec); },
                                 FieldKind::kWavefunction);
  if (verify) {
    const Index stride = std::max<Index>(1, grid.size() / 64);
    for (Index i = 0; i < grid.size(); i += stride) {
      const QuadratureResult q = phi_instantaneous_quadrature(grid.x(i), tau, spec);
      const double d = std::abs(q.value - field[i]);
      if (d > 1e-6) {
        throw AccuracyError("pmwf_instantaneous: closed form and quadrature differ by " +
                            std::to_string(d) + " at x=" + std::to_string(grid.x(i)));
      }
    }
  }
  return field;
}

WaveField pmwf_continuous(const PlaneWaveSpec& spec, double tau, const Grid1D& grid) {
  return WaveField::sample(grid, [&](double x) { return phi_continuous(x, tau, spec); },
                           FieldKind::kWavefunction);
}

double instantaneous_dual_path_distance(const PlaneWaveSpec& spec, double tau,
                                        const std::vector<double>& xs) {
  double d = 0.0;
  for (double x : xs) {
    d = std::max(d, std::abs(phi_instantaneous(x, tau, spec) -
                             phi_instantaneous_quadrature(x, tau, spec).value));
  }
  return d;
}

BoxedCheck continuous_box_crosscheck(const PlaneWaveSpec& spec, double tau,
                                     const BoxedCheckOptions& o) {
  spec.validate();
  require_positive(tau, "continuous_box_crosscheck: tau");
  if (!(o.taper_start < o.taper_end && o.taper_end < o.box_length && o.window < o.taper_start)) {
    throw ArgumentError("continuous_box_crosscheck: need window < taper_start < taper_end < box_length");
  }
  const Index cells = static_cast<Index>(std::llround(o.box_length / o.dx));
  const Grid1D grid = Grid1D::from_spacing(-static_cast<double>(cells) * o.dx, o.dx, cells + 1);
  const DomainSpec d = DomainSpec::negative_half_line(static_cast<double>(cells) * o.dx);
  auto psi0 = WaveField::sample(
      grid,
      [&](double x) {
        return x >= 0.0 ? Complex(0.0)
                        : std::exp(-kI * spec.k * x) * taper(-x, o.taper_start, o.taper_end);
      },
      FieldKind::kWavefunction);
  SchroedingerOptions so;
  so.record_every = 0;
  so.startup_half_steps = o.startup_half_steps;
  const WaveField out = dirichlet_schrodinger_solve(psi0, d, tau, o.dt, so).final();
  BoxedCheck c{0.0, -o.window, 0.0, grid.size()};
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    if (x < -o.window - 1e-12) continue;
    c.sup_distance = std::max(c.sup_distance, std::abs(out[i] - phi_continuous(x, tau, spec)));
  }
  return c;
}

Figure1Table figure1_data(const PlaneWaveSpec& spec, double tau, double x_lo, double x_hi,
                          Index n) {
  require_positive(tau, "figure1_data: tau");
  if (!(x_lo < 0.0 && x_hi > 0.0) || n < 8) {
    throw ArgumentError("figure1_data: the window must straddle 0 with at least 8 points");
  }
  Figure1Table t;
  t.x = linspace(x_lo, x_hi, n);
  for (double x : t.x) {
    const Complex a = phi_instantaneous(x, tau, spec);
    const Complex c = phi_continuous(x, tau, spec);
    t.re_instantaneous.push_back(a.real());
    t.im_instantaneous.push_back(a.imag());
    t.re_continuous.push_back(c.real());
    t.im_continuous.push_back(c.imag());
  }
  return t;
}

std::vector<NamedCheck> figure1_checks(const Figure1Table& t, const PlaneWaveSpec& spec) {
  std::vector<NamedCheck> out;
  const std::size_t n = t.x.size();
  const bool shaped = t.re_instantaneous.size() == n && t.im_instantaneous.size() == n &&
                      t.re_continuous.size() == n && t.im_continuous.size() == n;
  out.push_back({"five columns of equal length", shaped, std::to_string(n) + " rows"});
  if (!shaped) return out;
  out.push_back({"x strictly increasing", std::is_sorted(t.x.begin(), t.x.end(), std::less_equal<>()),
                 ""});

  double max_c_pos = 0.0;
  std::vector<double> re_i_pos, re_i_neg, re_c_neg, abs_i_pos, x_pos, re_i_far, x_far;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = t.x[i];
    if (x > 0.0) {
      max_c_pos = std::max({max_c_pos, std::abs(t.re_continuous[i]), std::abs(t.im_continuous[i])});
      re_i_pos.push_back(t.re_instantaneous[i]);
      abs_i_pos.push_back(std::hypot(t.re_instantaneous[i], t.im_instantaneous[i]));
      x_pos.push_back(x);
    } else if (x < 0.0) {
      re_i_neg.push_back(t.re_instantaneous[i]);
      re_c_neg.push_back(t.re_continuous[i]);
      if (x < -10.0) {
        re_i_far.push_back(t.re_instantaneous[i]);
        x_far.push_back(x);
      }
    }
  }
  out.push_back({"continuous columns identically 0 for x > 0", max_c_pos == 0.0,
                 "max |phi^C| on x>0 = " + std::to_string(max_c_pos)});

  // Decay into the measured region: envelope over the last fifth well below the first fifth.
  bool decays = false;
  std::string decay_detail;
  if (abs_i_pos.size() >= 10) {
    const std::size_t q = abs_i_pos.size() / 5;
    const double head = *std::max_element(abs_i_pos.begin(), abs_i_pos.begin() + q);
    const double tail = *std::max_element(abs_i_pos.end() - q, abs_i_pos.end());
    decays = tail < 0.5 * head && tail > 0.0;
    decay_detail = "max |phi^I| near 0: " + std::to_string(head) + ", near the right edge: " +
                   std::to_string(tail);
  }
  out.push_back({"instantaneous amplitude decays into x > 0", decays, decay_detail});
  const int osc_pos = sign_changes(re_i_pos);
  out.push_back({"instantaneous real part oscillates on x > 0", osc_pos >= 4,
                 std::to_string(osc_pos) + " sign changes"});
  const int osc_i = sign_changes(re_i_neg);
  const int osc_c = sign_changes(re_c_neg);
  out.push_back({"both real parts oscillate on x < 0", osc_i >= 4 && osc_c >= 4,
                 std::to_string(osc_i) + " and " + std::to_string(osc_c) + " sign changes"});

  // Period from the spacing of zero crossings on x < -10.
  std::vector<double> crossings;
  for (std::size_t i = 1; i < re_i_far.size(); ++i) {
    const double a = re_i_far[i - 1], b = re_i_far[i];
    if ((a < 0.0) != (b < 0.0)) crossings.push_back(x_far[i - 1] + (x_far[i] - x_far[i - 1]) * a / (a - b));
  }
  bool period_ok = false;
  std::string period_detail = "too few zero crossings";
  if (crossings.size() >= 3) {
    const double period = 2.0 * (crossings.back() - crossings.front()) /
                          static_cast<double>(crossings.size() - 1);
    const double expected = 2.0 * pi / std::abs(spec.k);
    period_ok = std::abs(period / expected - 1.0) <= 0.05;
    period_detail = "period " + std::to_string(period) + " vs 2 pi / k = " + std::to_string(expected);
  }
  out.push_back({"instantaneous period near 2 pi / k for x < -10", period_ok, period_detail});
  return out;
}

TailFit fit_tail(const std::vector<double>& x, const std::vector<double>& magnitude,
                 const std::vector<double>& noise) {
  if (x.size() != magnitude.size() || x.size() != noise.size() || x.size() < 2) {
    throw InsufficientDataError("fit_tail: need matching x, magnitude and noise of length >= 2");
  }
  double snr = 1e300;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = noise[i] > 0.0 ? magnitude[i] / noise[i] : 1e300;
    snr = std::min(snr, r);
    if (r < 100.0) {
      throw InsufficientDataError("fit_tail: |phi| = " + std::to_string(magnitude[i]) + " at x=" +
                                  std::to_string(x[i]) + " is within 100x of its noise floor");
    }
  }
  const PowerLawFit f = fit_power_law(x, magnitude);
  return {x.front(), x.back(), f.exponent, f.amplitude, f.r_squared, snr};
}

TailFit instantaneous_tail(const PlaneWaveSpec& spec, double tau, double x_lo, double x_hi,
                           Index n) {
  const std::vector<double> xs = linspace(x_lo, x_hi, n);
  std::vector<double> mag, noise;
  for (double x : xs) {
    mag.push_back(std::abs(phi_instantaneous(x, tau, spec)));
    noise.push_back(1e-13 * std::max(1.0, mag.back()));
  }
  return fit_tail(xs, mag, noise);
}

TailFit continuous_tail(const PlaneWaveSpec& spec, double tau, double release, double x_lo,
                        double x_hi, Index n) {
  if (x_lo < 0.0) throw DomainError("continuous_tail: the window must lie in x >= 0");
  const std::vector<double> xs = linspace(x_lo, x_hi, n);
  std::vector<double> mag, noise;
  for (double x : xs) {
    const QuadratureResult q = released_continuous(x, release, tau, spec);
    mag.push_back(std::abs(q.value));
    noise.push_back(std::max(q.error_estimate, 1e-15));
  }
  return fit_tail(xs, mag, noise);
}

const char* to_string(MomentVerdict v) {
  switch (v) {
    case MomentVerdict::kConvergent: return "convergent";
    case MomentVerdict::kDivergent: return "divergent";
    default: return "inconclusive";
  }
}

MomentScan first_moment_scan(const WaveField& field, const std::vector<double>& cutoffs,
                             double rel_tol) {
  const Grid1D& g = field.grid();
  if (cutoffs.size() < 3) throw ArgumentError("first_moment_scan: need at least three cutoffs");
  for (std::size_t j = 0; j < cutoffs.size(); ++j) {
    if (!(cutoffs[j] > 0.0) || (j > 0 && !(cutoffs[j] > cutoffs[j - 1]))) {
      throw ArgumentError("first_moment_scan: cutoffs must be positive and increasing");
    }
    if (cutoffs[j] > std::max(std::abs(g.x_min()), std::abs(g.x_max())) + 1e-12) {
      throw DomainError("first_moment_scan: cutoff " + std::to_string(cutoffs[j]) +
                        " reaches past the grid");
    }
  }
  MomentScan s;
  s.cutoffs = cutoffs;
  const auto& v = field.values();
  for (double c : cutoffs) {
    // Trapezoid over the nodes with |x| <= c.
    double m = 0.0;
    Index prev = -1;
    for (Index i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      if (std::abs(x) > c + 1e-9 * g.dx()) {
        prev = -1;
        continue;
      }
      if (prev >= 0) {
        const double a = std::abs(g.x(prev)) * std::norm(v[prev]);
        const double b = std::abs(x) * std::norm(v[i]);
        m += 0.5 * g.dx() * (a + b);
      }
      prev = i;
    }
    s.moments.push_back(m);
  }
  for (std::size_t j = 1; j < s.moments.size(); ++j) s.increments.push_back(s.moments[j] - s.moments[j - 1]);

  const std::size_t last = s.increments.size() - 1;
  const double per_log_last = s.increments[last] / std::log(cutoffs[last + 1] / cutoffs[last]);
  const double per_log_prev = s.increments[last - 1] / std::log(cutoffs[last] / cutoffs[last - 1]);
  s.log_growth = per_log_last;
  const double m_last = s.moments.back();
  const double inc = std::abs(s.increments[last]);
  if (inc <= rel_tol * std::abs(m_last) && inc <= 0.5 * std::abs(s.increments[last - 1])) {
    s.verdict = MomentVerdict::kConvergent;
  } else if (inc > rel_tol * std::abs(m_last) && per_log_prev > 0.0 &&
             per_log_last >= 0.7 * per_log_prev) {
    s.verdict = MomentVerdict::kDivergent;
  }
  return s;
}

const char* to_string(PmwfVariant v) {
  return v == PmwfVariant::kInstantaneous ? "instantaneous" : "continuous";
}

ScalingFit interval_mean_scaling(PmwfVariant variant, double x1, double x2,
                                 const std::vector<double>& dt_ladder, const PlaneWaveSpec& spec,
                                 double tau_m) {
  spec.validate();
  if (!(0.0 < x1 && x1 < x2)) throw ArgumentError("interval_mean_scaling: need 0 < x1 < x2");
  if (dt_ladder.size() < 2) throw ArgumentError("interval_mean_scaling: need two ladder rungs");
  for (std::size_t i = 0; i < dt_ladder.size(); ++i) {
    require_positive(dt_ladder[i], "interval_mean_scaling: dt");
    if (i > 0 && !(dt_ladder[i] < dt_ladder[i - 1])) {
      throw ArgumentError("interval_mean_scaling: dt ladder must be decreasing");
    }
  }
  ScalingFit fit;
  fit.variant = variant;
  fit.x1 = x1;
  fit.x2 = x2;
  fit.dt = dt_ladder;
  for (double dt : dt_ladder) {
    auto phi = [&](double x) {
      return variant == PmwfVariant::kInstantaneous ? phi_instantaneous(x, dt, spec)
                                                    : released_continuous(x, dt, tau_m, spec).value;
    };
    QuadratureResult m = adaptive_gauss_kronrod(
        [&](double x) { return Complex(x * std::norm(phi(x))); }, x1, x2, 1e-300, 1e-9);
    QuadratureResult p = adaptive_gauss_kronrod(
        [&](double x) { return Complex(std::norm(phi(x))); }, x1, x2, 1e-300, 1e-9);
    QuadratureResult a = adaptive_gauss_kronrod(
        [&](double x) { return Complex(x * std::abs(phi(x))); }, x1, x2, 1e-300, 1e-9);
    for (const QuadratureResult* q : {&m, &p, &a}) {
      if (!q->converged || !(q->value.real() > 0.0) ||
          q->error_estimate > 1e-6 * q->value.real()) {
        throw InsufficientDataError(
            "interval_mean_scaling: interval integral at dt=" + std::to_string(dt) +
            " is not resolved above the quadrature noise (value " + std::to_string(q->value.real()) +
            ", error " + std::to_string(q->error_estimate) + "); the ladder is too deep");
      }
    }
    fit.partial_moment.push_back(m.value.real());
    fit.conditional_mean.push_back(m.value.real() / p.value.real());
    fit.amplitude_moment.push_back(a.value.real());
  }
  fit.partial_fit = fit_power_law(fit.dt, fit.partial_moment);
  fit.conditional_fit = fit_power_law(fit.dt, fit.conditional_mean);
  fit.amplitude_fit = fit_power_law(fit.dt, fit.amplitude_moment);
  return fit;
}

}  // namespace cclab

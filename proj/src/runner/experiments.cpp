#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cclab/diffusion_observer.hpp"
#include "cclab/fitting.hpp"
#include "cclab/fleming_viot.hpp"
#include "cclab/pmwf.hpp"
#include "cclab/quadrature.hpp"
#include "cclab/quantum_observer.hpp"
#include "registry.hpp"

namespace cclab::runner::detail {

namespace {

using std::numbers::pi;
using Cell = CsvTable::Cell;

constexpr const char* kNone = "dimensionless";

double num(const Json& p, const char* key) { return p.at(key).get<double>(); }
Index idx(const Json& p, const char* key) { return static_cast<Index>(p.at(key).get<std::int64_t>()); }
std::vector<double> list(const Json& p, const char* key) { return p.at(key).get<std::vector<double>>(); }

OutputFile csv_file(std::string name, const CsvTable& t) { return {std::move(name), t.render()}; }

struct Series {
  int column;
  std::string title;
};

struct PlotSpec {
  std::string csv;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
  bool logx = false;
  bool logy = false;
  std::string style = "lines";
};

// gnuplot script rendering one or more panels into <stem>.png.
OutputFile plot_file(const std::string& stem, const std::vector<PlotSpec>& panels) {
  std::ostringstream s;
  s << "# gnuplot " << stem << ".plot\n";
  s << "set datafile separator ','\n";
  s << "set terminal pngcairo size 900," << 420 * panels.size() << "\n";
  s << "set output '" << stem << ".png'\n";
  s << "set key outside right\n";
  if (panels.size() > 1) s << "set multiplot layout " << panels.size() << ",1\n";
  for (const auto& p : panels) {
    s << (p.logx ? "set logscale x\n" : "unset logscale x\n");
    s << (p.logy ? "set logscale y\n" : "unset logscale y\n");
    s << "set xlabel '" << p.xlabel << "'\n";
    s << "set ylabel '" << p.ylabel << "'\n";
    s << "plot ";
    for (std::size_t i = 0; i < p.series.size(); ++i) {
      if (i > 0) s << ", \\\n     ";
      s << "'" << p.csv << "' skip 1 using 1:" << p.series[i].column << " with " << p.style
        << " title '" << p.series[i].title << "'";
    }
    s << "\n";
  }
  if (panels.size() > 1) s << "unset multiplot\n";
  return {stem + ".plot", s.str()};
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

double sup_distance(const DensityField& a, const DensityField& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

void require_multiple(const Json& p, const char* t_key, const char* dt_key, Violations& out) {
  if (!is_multiple(num(p, t_key), num(p, dt_key))) {
    out.add(t_key, std::string("must be an integer multiple of ") + dt_key);
  }
}

void require_multiple_of_each(const Json& p, const char* t_key, const char* ladder_key,
                              Violations& out) {
  const double t = num(p, t_key);
  for (double dt : list(p, ladder_key)) {
    if (!is_multiple(t, dt)) {
      out.add(ladder_key, std::string("every entry must divide ") + t_key + "=" + format_number(t) +
                              ", " + format_number(dt) + " does not");
      return;
    }
  }
}

PlaneWaveSpec plane_wave(const Json& p) {
  PlaneWaveSpec s;
  s.k = num(p, "k");
  return s;
}

// ---------------------------------------------------------------- diffusion

// sin(x) (1 + sum_j b_j cos((j+1) x)) with |b|_1 = 0.9, normalised on the grid.
DensityField smooth_density(const Grid1D& g, const CounterRng& rng, std::uint64_t sample) {
  double b[4];
  double l1 = 0.0;
  for (int j = 0; j < 4; ++j) {
    b[j] = 2.0 * rng.uniform(CounterRng::Stream::kInitial, sample, 0, static_cast<std::uint64_t>(j)) - 1.0;
    l1 += std::abs(b[j]);
  }
  for (double& c : b) c *= 0.9 / l1;
  auto f = DensityField::sample(
      g,
      [&](double x) {
        double s = 1.0;
        for (int j = 0; j < 4; ++j) s += b[j] * std::cos((j + 1) * x);
        return std::sin(x) * s;
      },
      FieldKind::kDensity);
  return f.with_values(f.values() / probability_mass(f));
}

Outcome run_diffusion_equivalence(const ExperimentConfig& cfg, const RunOptions&) {
  const Json& p = cfg.parameters;
  const Index cells = idx(p, "cells");
  const double dt = num(p, "dt_solver");
  const double t_final = num(p, "t_final");
  const Index samples = idx(p, "samples");
  const auto d = DomainSpec::interval(0.0, pi);
  const CounterRng rng(cfg.seed);
  const Grid1D fine(0.0, pi, cells + 1);
  const Grid1D coarse(0.0, pi, cells / 2 + 1);

  Outcome o;
  CsvTable eq({{"sample", "count"}, {"cells", "count"}, {"dx", kNone}, {"sup_distance", kNone}});
  CsvTable prof({{"x", kNone},
                 {"initial_density", kNone},
                 {"nonlinear_solve", kNone},
                 {"renormalized_dirichlet", kNone}});
  CsvTable flux({{"t", kNone}, {"flux_J", kNone}});
  double worst = 0.0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  Json per_sample = Json::array();
  for (Index s = 0; s < samples; ++s) {
    double dist[2];
    for (int level = 0; level < 2; ++level) {
      const Grid1D& g = level == 0 ? coarse : fine;
      auto p0 = smooth_density(g, rng, static_cast<std::uint64_t>(s));
      auto nl = nonlinear_conditioned_solve(p0, d, t_final, dt, {0});
      auto ref = renormalized_density(fp_dirichlet_solve(p0, d, t_final, dt, 0).final(), d);
      dist[level] = sup_distance(nl.history.final(), ref);
      eq.add_row({Cell(std::int64_t(s)), Cell(std::int64_t(g.size() - 1)), Cell(g.dx()), Cell(dist[level])});
      if (s == 0 && level == 1) {
        for (Index i = 0; i < g.size(); ++i) {
          prof.add_row({g.x(i), p0[i], nl.history.final()[i], ref[i]});
        }
        for (std::size_t k = 0; k < nl.flux.times.size(); ++k) {
          flux.add_row({nl.flux.times[k], nl.flux.values[k]});
        }
      }
    }
    worst = std::max(worst, dist[1]);
    worst_ratio = std::min(worst_ratio, dist[0] / dist[1]);
    per_sample.push_back({{"sample", s}, {"coarse", dist[0]}, {"fine", dist[1]}});
  }

  const std::string oracle_eq =
      "renormalised Crank-Nicolson Dirichlet solve of the heat equation from the same density";
  o.criteria.push_back(Criterion::at_most("equivalence_sup_distance", worst,
                                          num(p, "equivalence_tolerance"),
                                          "max over samples; " + oracle_eq));
  o.criteria.push_back(Criterion::at_least(
      "equivalence_refinement_ratio", worst_ratio, num(p, "min_refinement_ratio"),
      "min over samples of distance(cells/2) / distance(cells); second-order convergence gives 4"));

  auto eig = DensityField::sample(fine, [](double x) { return 0.5 * std::sin(x); }, FieldKind::kDensity);
  eig = eig.with_values(eig.values() / probability_mass(eig));
  auto stationary = nonlinear_conditioned_solve(eig, d, t_final, dt, {0});
  const double drift = sup_distance(stationary.history.final(), eig);
  const double j0 = conditioned_flux(eig, d);
  o.criteria.push_back(Criterion::at_most("eigenprofile_sup_drift", drift,
                                          num(p, "stationarity_tolerance"),
                                          "sin(x)/2 is the stationary conditioned profile on [0, pi]"));
  o.criteria.push_back(Criterion::within("eigenprofile_flux", j0, -0.5,
                                         num(p, "flux_tolerance_dx2") * fine.dx() * fine.dx(),
                                         "J = -pi^2 / (2 L^2) = -1/2 for L = pi; tolerance c dx^2"));
  double flux_spread = 0.0;
  for (double j : stationary.flux.values) flux_spread = std::max(flux_spread, std::abs(j + 0.5));
  o.diagnostics["per_sample_sup_distance"] = per_sample;
  o.diagnostics["eigenprofile_max_flux_deviation_along_run"] = flux_spread;
  o.diagnostics["max_mass_drift_rate"] = stationary.max_mass_drift_rate;

  o.files.push_back(csv_file("equivalence.csv", eq));
  o.files.push_back(csv_file("profiles.csv", prof));
  o.files.push_back(csv_file("flux.csv", flux));
  o.files.push_back(plot_file(
      "equivalence",
      {{"profiles.csv", "x", "density", {{2, "initial"}, {3, "nonlinear solve"}, {4, "renormalised Dirichlet"}}},
       {"flux.csv", "t", "J", {{2, "nonlinear solve flux"}}}}));
  return o;
}

void check_diffusion_equivalence(const Json& p, Violations& out) {
  if (idx(p, "cells") % 2 != 0) out.add("cells", "must be even (the refinement check halves it)");
  require_multiple(p, "t_final", "dt_solver", out);
}

// ------------------------------------------------------------- fleming-viot

Outcome run_fleming_viot(const ExperimentConfig& cfg, const RunOptions& options) {
  const Json& p = cfg.parameters;
  const int dim = static_cast<int>(idx(p, "dimension"));
  const double a = num(p, "lower"), b = num(p, "upper");
  const double dt = num(p, "dt");
  const double t_final = num(p, "t_final");
  const Index walkers = idx(p, "walkers");
  const Index window = idx(p, "rate_window_steps");
  const auto box = BoxDomain::cube(dim, a, b);

  FvRunOptions fo;
  fo.bins = idx(p, "bins");
  fo.threads = options.threads;
  FvRun r = fv_run(sine_product_sampler(), box, dt, t_final, walkers, cfg.seed, list(p, "sample_times"), fo);

  Outcome o;
  CsvTable hist({{"t", kNone},
                 {"bin_lower", kNone},
                 {"bin_upper", kNone},
                 {"empirical_probability", kNone},
                 {"sine_profile_probability", kNone}});
  Json ks_by_time = Json::array();
  double ks_final = 0.0;
  auto cdf = [&](double x) { return sine_profile_cdf(x, a, b); };
  for (const auto& e : r.estimates) {
    for (Index k = 0; k < e.histogram.size(); ++k) {
      const double lo = e.bin_edges[k], hi = e.bin_edges[k + 1];
      hist.add_row({e.t, lo, hi, e.histogram[k], cdf(hi) - cdf(lo)});
    }
    ks_final = ks_distance(e.axis0_sorted, cdf);
    ks_by_time.push_back({{"t", e.t}, {"ks_distance", ks_final}, {"kill_rate_since_last", e.kill_rate}});
  }

  const FluxSeries f = empirical_flux(r.kill_log, walkers, dt, window);
  CsvTable rate_table({{"t", kNone}, {"kill_rate", "per unit time"}});
  for (std::size_t k = 0; k < f.times.size(); ++k) rate_table.add_row({f.times[k], f.values[k]});

  const RateEstimate rate = mean_kill_rate(r.kill_log, walkers, dt, num(p, "rate_from"), t_final, window);
  const double expected = dim * pi * pi / (2.0 * (b - a) * (b - a));
  o.criteria.push_back(Criterion::at_most(
      "ks_distance", ks_final, num(p, "ks_tolerance"),
      "Kolmogorov-Smirnov distance of the axis-0 marginal at t_final to the sine profile CDF"));
  o.criteria.push_back(Criterion::within(
      "kill_rate", rate.rate, expected, num(p, "rate_tolerance"),
      "principal Dirichlet eigenvalue d pi^2 / (2 L^2) of -Laplacian / 2 on the cube"));
  o.diagnostics["kill_rate_standard_error"] = rate.standard_error;
  o.diagnostics["ks_by_time"] = ks_by_time;
  o.diagnostics["walkers"] = walkers;

  o.files.push_back(csv_file("histogram.csv", hist));
  o.files.push_back(csv_file("kill_rate.csv", rate_table));
  PlotSpec hp{"histogram.csv", "x", "bin probability", {{4, "empirical"}, {5, "sine profile"}}};
  hp.style = "points";
  PlotSpec rp{"kill_rate.csv", "t", "kill rate", {{2, "windowed kill rate"}}};
  rp.style = "linespoints";
  o.files.push_back(plot_file("fleming_viot", {hp, rp}));
  return o;
}

void check_fleming_viot(const Json& p, Violations& out) {
  if (!(num(p, "upper") > num(p, "lower"))) out.add("upper", "must exceed lower");
  const double dt = num(p, "dt"), t_final = num(p, "t_final");
  require_multiple(p, "t_final", "dt", out);
  for (double t : list(p, "sample_times")) {
    if (!is_multiple(t, dt) || t > t_final * (1.0 + 1e-12)) {
      out.add("sample_times", "every entry must be a multiple of dt within (0, t_final]; " +
                                  format_number(t) + " is not");
      break;
    }
  }
  const double from = num(p, "rate_from");
  if (from != 0.0 && !is_multiple(from, dt)) out.add("rate_from", "must be a multiple of dt");
  const double steps = std::round((t_final - from) / dt);
  if (!(steps >= static_cast<double>(idx(p, "rate_window_steps")))) {
    out.add("rate_window_steps", "the interval [rate_from, t_final] holds fewer steps than one window");
  }
}

// ---------------------------------------------------------------- quantum

Grid1D quantum_box(const Json& p) {
  const Index c = idx(p, "cells_per_pi");
  const Index lo = idx(p, "box_lower_pi"), hi = idx(p, "box_upper_pi");
  return Grid1D::from_spacing(-static_cast<double>(lo) * pi, pi / static_cast<double>(c), (lo + hi) * c + 1);
}

WaveField sine_eigenstate(const Grid1D& g) {
  return WaveField::sample(
      g,
      [](double x) { return (x >= 0.0 && x <= pi) ? Complex(std::sqrt(2.0 / pi) * std::sin(x)) : Complex(0.0); },
      FieldKind::kWavefunction);
}

ZenoScan run_zeno(const Json& p) {
  const Grid1D g = quantum_box(p);
  return zeno_scan(sine_eigenstate(g), DomainSpec::interval(0.0, pi), num(p, "tau"), list(p, "dt_ladder"),
                   num(p, "reference_dt"));
}

void add_zeno_criteria(const ZenoScan& scan, Outcome& o) {
  std::vector<double> leak;
  for (const auto& r : scan.rungs) leak.push_back(r.leakage);
  o.criteria.push_back(Criterion::holds("quantum_leakage_monotone", scan.leakage_monotone,
                                        "norm lost by the unrenormalised recursion decreases along the dt ladder"));
  o.criteria.push_back(Criterion::at_least("quantum_leakage_exponent", scan.leakage_fit.exponent, 0.0,
                                           "log-log slope of leakage against dt; positive means leakage -> 0"));
  o.criteria.push_back(Criterion::holds(
      "quantum_l2_error_monotone", scan.error_monotone,
      "L2 distance to the Crank-Nicolson Dirichlet Schroedinger solve at tau decreases along the ladder"));
  double edge = 0.0;
  for (const auto& r : scan.rungs) edge = std::max(edge, r.max_edge_mass);
  o.criteria.push_back(Criterion::at_most("quantum_support_guard", edge, kSupportGuardTolerance,
                                          "largest |psi|^2 mass next to the periodic box edges"));
  o.diagnostics["leakage_fit"] = {{"exponent", scan.leakage_fit.exponent},
                                  {"r_squared", scan.leakage_fit.r_squared}};
  o.diagnostics["l2_error_fit"] = {{"exponent", scan.error_fit.exponent},
                                   {"r_squared", scan.error_fit.r_squared}};
  o.diagnostics["reference_dt"] = scan.reference_dt;
}

void check_quantum(const Json& p, Violations& out) {
  require_multiple_of_each(p, "tau", "dt_ladder", out);
  require_multiple(p, "tau", "reference_dt", out);
}

Outcome run_zeno_scan(const ExperimentConfig& cfg, const RunOptions&) {
  const Json& p = cfg.parameters;
  Outcome o;
  const ZenoScan scan = run_zeno(p);
  add_zeno_criteria(scan, o);

  CsvTable zt({{"dt", kNone}, {"leakage", "probability"}, {"l2_error", kNone}, {"max_edge_mass", "probability"}});
  for (const auto& r : scan.rungs) zt.add_row({r.dt, r.leakage, r.l2_error, r.max_edge_mass});

  const Grid1D g(0.0, pi, idx(p, "cells_per_pi") + 1);
  const WaveField psi = sine_eigenstate(g);
  const auto eps = list(p, "epsilons");
  std::vector<double> mags;
  CsvTable et({{"epsilon", kNone}, {"abs_J", kNone}, {"analytic_abs_J", kNone}});
  for (double e : eps) {
    mags.push_back(std::abs(regularized_flux(psi, e).j_value));
    et.add_row({e, mags.back(), e / (2.0 * (1.0 + e * e))});
  }
  if (eps.size() >= 2) {
    const auto fit = fit_power_law(eps, mags);
    o.criteria.push_back(Criterion::within("epsilon_flux_slope", fit.exponent, 1.0,
                                           num(p, "epsilon_slope_tolerance"),
                                           "|J(eps)| = eps / (2 (1 + eps^2)) for unit gradient energy"));
  }
  const double e0 = eps.front();
  o.criteria.push_back(Criterion::within("epsilon_flux_first", mags.front(), e0 / (2.0 * (1.0 + e0 * e0)),
                                         num(p, "epsilon_flux_tolerance"),
                                         "eps / (2 (1 + eps^2)) with int |psi'|^2 = 1 for sqrt(2/pi) sin x"));

  o.files.push_back(csv_file("zeno.csv", zt));
  o.files.push_back(csv_file("epsilon_flux.csv", et));
  PlotSpec zp{"zeno.csv", "dt", "", {{2, "leakage"}, {3, "L2 error"}}, true, true, "linespoints"};
  PlotSpec ep{"epsilon_flux.csv", "epsilon", "|J|", {{2, "lattice"}, {3, "analytic"}}, true, true, "linespoints"};
  o.files.push_back(plot_file("zeno", {zp, ep}));
  return o;
}

Outcome run_contrast(const ExperimentConfig& cfg, const RunOptions&) {
  const Json& p = cfg.parameters;
  Outcome o;
  const ZenoScan scan = run_zeno(p);
  add_zeno_criteria(scan, o);

  const double tau = num(p, "tau");
  const Index c = idx(p, "cells_per_pi");
  const Index ext = idx(p, "diffusion_margin_pi");
  const Grid1D g = Grid1D::from_spacing(-static_cast<double>(ext) * pi, pi / static_cast<double>(c),
                                        (2 * ext + 1) * c + 1);
  const auto d = DomainSpec::interval(0.0, pi);
  auto p0 = truncate_at_boundary(
      DensityField::sample(g, [](double x) { return std::sin(x); }, FieldKind::kDensity), d);
  p0 = p0.with_values(p0.values() / probability_mass(p0));
  const double dirichlet = 1.0 - probability_mass(fp_dirichlet_solve(p0, d, tau, num(p, "fp_dt_solver"), 0).final());

  CsvTable t({{"dt", kNone},
              {"quantum_leakage", "probability"},
              {"quantum_l2_error", kNone},
              {"diffusion_absorbed", "probability"},
              {"dirichlet_absorbed", "probability"},
              {"diffusion_relative_error", kNone}});
  std::vector<double> dts, rel, gaps;
  for (const auto& r : scan.rungs) {
    auto k = intermittent_killing_run(p0, d, r.dt, tau);
    const double absorbed = 1.0 - k.mass.back();
    dts.push_back(r.dt);
    gaps.push_back(dirichlet - absorbed);
    rel.push_back(std::abs(absorbed - dirichlet) / dirichlet);
    t.add_row({r.dt, r.leakage, r.l2_error, absorbed, dirichlet, rel.back()});
  }
  o.criteria.push_back(Criterion::at_most(
      "diffusion_absorbed_relative_error", rel.back(), num(p, "relative_error_tolerance"),
      "absorbed mass 1 - int p of the Crank-Nicolson Dirichlet Fokker-Planck solve at tau, finest rung"));
  o.criteria.push_back(Criterion::holds("diffusion_absorbed_gap_monotone",
                                        strictly_decreasing(gaps) && gaps.back() > 0.0,
                                        "absorbed mass approaches the Dirichlet value from below"));
  o.diagnostics["dirichlet_absorbed"] = dirichlet;
  if (rel.size() >= 2 && std::all_of(rel.begin(), rel.end(), [](double v) { return v > 0.0; })) {
    const auto fit = fit_power_law(dts, rel);
    o.diagnostics["diffusion_relative_error_fit"] = {{"exponent", fit.exponent},
                                                     {"amplitude", fit.amplitude},
                                                     {"r_squared", fit.r_squared}};
    const double target = num(p, "relative_error_tolerance");
    if (fit.exponent > 0.0) {
      o.diagnostics["dt_for_tolerance_extrapolated"] = std::pow(target / fit.amplitude, 1.0 / fit.exponent);
    }
  }

  o.files.push_back(csv_file("contrast.csv", t));
  o.files.push_back(plot_file(
      "contrast", {{"contrast.csv", "dt", "", {{2, "quantum leakage"}, {3, "quantum L2 error"}, {6, "diffusion relative error"}}, true, true, "linespoints"},
                   {"contrast.csv", "dt", "absorbed mass", {{4, "intermittent killing"}, {5, "Dirichlet"}}, true, false, "linespoints"}}));
  return o;
}

void check_contrast(const Json& p, Violations& out) {
  check_quantum(p, out);
  require_multiple(p, "tau", "fp_dt_solver", out);
  const double margin = static_cast<double>(idx(p, "diffusion_margin_pi")) * pi;
  const auto ladder = list(p, "dt_ladder");
  if (margin < 10.0 * std::sqrt(ladder.front())) {
    out.add("diffusion_margin_pi", "the killing grid must reach 10 sqrt(dt) past each boundary point");
  }
}

// ------------------------------------------------------------------- pmwf

Outcome run_figure1(const ExperimentConfig& cfg, const RunOptions&) {
  const Json& p = cfg.parameters;
  const PlaneWaveSpec spec = plane_wave(p);
  const double tau = num(p, "tau");
  Outcome o;

  const Figure1Table t = figure1_data(spec, tau, num(p, "x_lo"), num(p, "x_hi"), idx(p, "points"));
  for (const auto& c : figure1_checks(t, spec)) {
    o.criteria.push_back(Criterion::holds("figure1: " + c.name, c.passed, c.detail));
  }

  std::vector<double> xs;
  const Index stride = std::max<Index>(1, static_cast<Index>(t.x.size()) / idx(p, "dual_path_points"));
  for (std::size_t i = 0; i < t.x.size(); i += static_cast<std::size_t>(stride)) xs.push_back(t.x[i]);
  o.criteria.push_back(Criterion::at_most(
      "dual_path_phi_instantaneous", instantaneous_dual_path_distance(spec, tau, xs),
      num(p, "dual_path_tolerance"),
      "closed form via complex erfc against adaptive Gauss-Kronrod quadrature of the free propagator"));

  BoxedCheckOptions bo;
  bo.box_length = num(p, "box_length");
  bo.dx = num(p, "box_dx");
  bo.dt = num(p, "box_dt");
  bo.taper_start = 0.6 * bo.box_length;
  bo.taper_end = 0.9 * bo.box_length;
  const BoxedCheck box = continuous_box_crosscheck(spec, tau, bo);
  o.criteria.push_back(Criterion::at_most(
      "image_method_vs_boxed_dirichlet", box.sup_distance, num(p, "box_tolerance"),
      "Crank-Nicolson Dirichlet solve of the tapered plane wave on a finite box, window next to 0"));
  o.diagnostics["boxed_window"] = {box.window_lo, box.window_hi};
  o.diagnostics["dual_path_points"] = xs.size();

  CsvTable f({{"x", kNone},
              {"re_phi_instantaneous", kNone},
              {"im_phi_instantaneous", kNone},
              {"re_phi_continuous", kNone},
              {"im_phi_continuous", kNone}});
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    f.add_row({t.x[i], t.re_instantaneous[i], t.im_instantaneous[i], t.re_continuous[i], t.im_continuous[i]});
  }
  o.files.push_back(csv_file("figure1.csv", f));
  o.files.push_back(plot_file("figure1", {{"figure1.csv", "x", "instantaneous collapse", {{2, "Re"}, {3, "Im"}}},
                                          {"figure1.csv", "x", "continuous collapse", {{4, "Re"}, {5, "Im"}}}}));
  return o;
}

void check_figure1(const Json& p, Violations& out) {
  if (!(num(p, "x_lo") < 0.0)) out.add("x_lo", "must be negative (the figure spans both sides of 0)");
  if (!(num(p, "x_hi") > 0.0)) out.add("x_hi", "must be positive (the figure spans both sides of 0)");
  require_multiple(p, "tau", "box_dt", out);
  if (num(p, "box_length") < 4.0 || num(p, "box_dx") * 100.0 > num(p, "box_length")) {
    out.add("box_dx", "the box must hold at least 100 cells and be at least 4 long");
  }
}

Outcome run_tail_fit(const ExperimentConfig& cfg, const RunOptions&) {
  const Json& p = cfg.parameters;
  const PlaneWaveSpec spec = plane_wave(p);
  const double tau = num(p, "tau"), release = num(p, "release");
  const double lo = num(p, "x_lo"), hi = num(p, "x_hi");
  const Index n = idx(p, "points");
  Outcome o;
  const TailFit ti = instantaneous_tail(spec, tau, lo, hi, n);
  const TailFit tc = continuous_tail(spec, tau, release, lo, hi, n);
  o.criteria.push_back(Criterion::within("tail_exponent_instantaneous", ti.exponent,
                                         num(p, "instantaneous_exponent"), num(p, "instantaneous_tolerance"),
                                         "stationary phase: |phi^I(x)| ~ sqrt(tau / (2 pi)) / x"));
  o.criteria.push_back(Criterion::within("tail_exponent_continuous", tc.exponent, num(p, "continuous_exponent"),
                                         num(p, "continuous_tolerance"),
                                         "Dirichlet zero at 0 removes the 1/x term: |phi^C| ~ x^-2 after release"));
  o.criteria.push_back(Criterion::within("tail_exponent_separation", tc.exponent - ti.exponent,
                                         num(p, "separation"), num(p, "separation_tolerance"),
                                         "difference of the two fitted exponents"));
  auto fit_json = [](const TailFit& f) {
    return Json{{"window", {f.x_lo, f.x_hi}},
                {"exponent", f.exponent},
                {"amplitude", f.amplitude},
                {"r_squared", f.r_squared},
                {"min_signal_to_noise", f.min_signal_to_noise}};
  };
  o.diagnostics["instantaneous"] = fit_json(ti);
  o.diagnostics["continuous_released"] = fit_json(tc);

  CsvTable t({{"x", kNone}, {"abs_phi_instantaneous", kNone}, {"abs_phi_continuous_released", kNone}});
  for (Index i = 0; i < n; ++i) {
    const double x = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    t.add_row({x, std::abs(phi_instantaneous(x, tau, spec)),
               std::abs(released_continuous(x, release, tau, spec).value)});
  }
  o.files.push_back(csv_file("tails.csv", t));
  o.files.push_back(plot_file("tails", {{"tails.csv", "x", "|phi|", {{2, "instantaneous"}, {3, "continuous, released"}}, true, true}}));
  return o;
}

void check_tail_fit(const Json& p, Violations& out) {
  if (!(num(p, "x_hi") > num(p, "x_lo"))) out.add("x_hi", "must exceed x_lo");
}

Outcome run_moment_scan(const ExperimentConfig& cfg, const RunOptions&) {
  const Json& p = cfg.parameters;
  const PlaneWaveSpec spec = plane_wave(p);
  const double tau = num(p, "tau"), release = num(p, "release");
  const auto cutoffs = list(p, "cutoffs");
  const double dx = num(p, "dx");
  const Index n = static_cast<Index>(std::llround(cutoffs.back() / dx)) + 1;
  const Grid1D g = Grid1D::from_spacing(0.0, dx, n);

  const WaveField inst = pmwf_instantaneous(spec, tau, g, true);
  const WaveField cont = WaveField::sample(
      g, [&](double x) { return released_continuous(x, release, tau, spec).value; }, FieldKind::kWavefunction);
  const double rel_tol = num(p, "rel_tol");
  const MomentScan si = first_moment_scan(inst, cutoffs, rel_tol);
  const MomentScan sc = first_moment_scan(cont, cutoffs, rel_tol);

  Outcome o;
  o.criteria.push_back(Criterion::holds("moment_continuous_convergent", sc.verdict == MomentVerdict::kConvergent,
                                        std::string("x^-4 probability tail; verdict ") + to_string(sc.verdict)));
  o.criteria.push_back(Criterion::holds("moment_instantaneous_divergent", si.verdict == MomentVerdict::kDivergent,
                                        std::string("x^-2 probability tail, log growth; verdict ") +
                                            to_string(si.verdict)));
  o.diagnostics["instantaneous_log_growth"] = si.log_growth;
  o.diagnostics["instantaneous_log_growth_expected"] = 1.0 / (2.0 * pi);
  o.diagnostics["continuous_log_growth"] = sc.log_growth;

  CsvTable t({{"cutoff", kNone}, {"moment_instantaneous", kNone}, {"moment_continuous_released", kNone}});
  for (std::size_t i = 0; i < cutoffs.size(); ++i) t.add_row({cutoffs[i], si.moments[i], sc.moments[i]});
  o.files.push_back(csv_file("moments.csv", t));
  o.files.push_back(plot_file("moments", {{"moments.csv", "cutoff", "truncated first moment",
                                           {{2, "instantaneous"}, {3, "continuous, released"}}, true, false, "linespoints"}}));
  return o;
}

void check_moment_scan(const Json& p, Violations& out) {
  const auto c = list(p, "cutoffs");
  if (c.size() < 3) out.add("cutoffs", "needs at least 3 cutoffs for a verdict");
  if (num(p, "dx") * 20.0 > c.front()) out.add("dx", "must be at most 1/20 of the smallest cutoff");
  for (double v : c) {
    if (std::abs(std::round(v / num(p, "dx")) * num(p, "dx") - v) > 1e-9 * v) {
      out.add("cutoffs", "every cutoff must be a multiple of dx; " + format_number(v) + " is not");
      break;
    }
  }
}

Outcome run_interval_scaling(const ExperimentConfig& cfg, const RunOptions&) {
  const Json& p = cfg.parameters;
  const PlaneWaveSpec spec = plane_wave(p);
  const double x1 = num(p, "x1"), x2 = num(p, "x2"), tau_m = num(p, "tau_m");
  const auto ladder = list(p, "dt_ladder");
  Outcome o;
  CsvTable t({{"variant", "label"},
              {"dt", kNone},
              {"partial_moment", kNone},
              {"conditional_mean", kNone},
              {"amplitude_moment", kNone}});
  const double tol = num(p, "exponent_tolerance");
  for (PmwfVariant v : {PmwfVariant::kInstantaneous, PmwfVariant::kContinuous}) {
    const ScalingFit f = interval_mean_scaling(v, x1, x2, ladder, spec, tau_m);
    const std::string name = to_string(v);
    const double target = num(p, v == PmwfVariant::kInstantaneous ? "instantaneous_exponent" : "continuous_exponent");
    o.criteria.push_back(Criterion::within(
        "interval_exponent_" + name, f.partial_fit.exponent, target, tol,
        "log-log slope of int_x1^x2 x |phi(x, dt)|^2 dx against dt, adaptive Gauss-Kronrod"));
    for (std::size_t i = 0; i < f.dt.size(); ++i) {
      t.add_row({name, f.dt[i], f.partial_moment[i], f.conditional_mean[i], f.amplitude_moment[i]});
    }
    auto fit_json = [](const PowerLawFit& pf) {
      return Json{{"exponent", pf.exponent}, {"r_squared", pf.r_squared}, {"stderr", pf.exponent_stderr}};
    };
    o.diagnostics[name] = {{"partial_moment", fit_json(f.partial_fit)},
                           {"conditional_mean", fit_json(f.conditional_fit)},
                           {"amplitude_moment", fit_json(f.amplitude_fit)}};
  }
  o.files.push_back(csv_file("scaling.csv", t));
  std::ostringstream s;
  s << "# gnuplot scaling.plot\n"
    << "set datafile separator ','\n"
    << "set terminal pngcairo size 900,420\n"
    << "set output 'scaling.png'\n"
    << "set logscale xy\n"
    << "set xlabel 'dt'\nset ylabel 'partial moment'\n"
    << "plot 'scaling.csv' skip 1 using (strcol(1) eq 'instantaneous' ? $2 : 1/0):3 with linespoints title 'instantaneous', \\\n"
    << "     'scaling.csv' skip 1 using (strcol(1) eq 'continuous' ? $2 : 1/0):3 with linespoints title 'continuous'\n";
  o.files.push_back({"scaling.plot", s.str()});
  return o;
}

void check_interval_scaling(const Json& p, Violations& out) {
  if (!(num(p, "x2") > num(p, "x1"))) out.add("x2", "must exceed x1");
  if (list(p, "dt_ladder").size() < 2) out.add("dt_ladder", "needs at least 2 rungs for a fit");
}

// ---------------------------------------------------------------- killing

Outcome run_killing_balance(const ExperimentConfig& cfg, const RunOptions&) {
  const Json& p = cfg.parameters;
  const Grid1D g(num(p, "x_min"), num(p, "x_max"), idx(p, "points"));
  const double edge = num(p, "boundary");
  const DomainSpec d(g.x_min(), EdgeKind::kArtificial, edge, EdgeKind::kBoundary);
  const double mean = num(p, "mean"), var = num(p, "variance");
  const double dt = num(p, "dt"), t_final = num(p, "t_final");

  // Gaussian(mean, var) cut at the boundary and renormalised.
  const double cut_mass = 0.5 * std::erfc((mean - edge) / std::sqrt(2.0 * var));
  auto density = [&](double y) {
    return std::exp(-(y - mean) * (y - mean) / (2.0 * var)) / std::sqrt(2.0 * pi * var) / cut_mass;
  };
  auto p0 = truncate_at_boundary(DensityField::sample(g, density, FieldKind::kDensity), d);
  p0 = p0.with_values(p0.values() / probability_mass(p0));

  Outcome o;
  const KillingRun run = intermittent_killing_run(p0, d, dt, t_final);
  const auto oracle = adaptive_gauss_kronrod(
      [&](double y) { return Complex(density(y) * 0.5 * std::erfc((edge - y) / std::sqrt(2.0 * dt))); },
      std::max(g.x_min(), mean - 14.0 * std::sqrt(var)), edge, 1e-14, 1e-13);
  o.criteria.push_back(Criterion::at_most(
      "first_removed_mass", std::abs(run.removed.front() - oracle.value.real()), num(p, "oracle_tolerance"),
      "int p0(y) P(y + sqrt(dt) Z beyond the boundary) dy by adaptive Gauss-Kronrod"));
  o.criteria.push_back(Criterion::at_most("balance_residual", run.max_balance_residual,
                                          num(p, "balance_tolerance"),
                                          "1 - mass - sum of removed masses, every step"));
  o.diagnostics["first_removed_mass_oracle"] = oracle.value.real();
  o.diagnostics["wall_leakage"] = run.wall_leakage;

  CsvTable kt({{"t", kNone}, {"mass", "probability"}, {"removed", "probability"}, {"cumulative_removed", "probability"}});
  double cumulative = 0.0;
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    const double removed = k == 0 ? 0.0 : run.removed[k - 1];
    cumulative += removed;
    kt.add_row({run.times[k], run.mass[k], removed, cumulative});
  }

  const double dirichlet =
      1.0 - probability_mass(fp_dirichlet_solve(p0, d, t_final, num(p, "dt_solver"), 0).final());
  CsvTable rt({{"dt", kNone}, {"absorbed", "probability"}, {"dirichlet_absorbed", "probability"}, {"gap", "probability"}});
  std::vector<double> gaps;
  for (double h : list(p, "dt_ladder")) {
    const double absorbed = 1.0 - intermittent_killing_run(p0, d, h, t_final).mass.back();
    gaps.push_back(dirichlet - absorbed);
    rt.add_row({h, absorbed, dirichlet, gaps.back()});
  }
  o.criteria.push_back(Criterion::holds("absorbed_gap_monotone", strictly_decreasing(gaps) && gaps.back() > 0.0,
                                        "absorbed mass approaches the Crank-Nicolson Dirichlet value from below"));
  o.diagnostics["dirichlet_absorbed"] = dirichlet;

  o.files.push_back(csv_file("killing.csv", kt));
  o.files.push_back(csv_file("refinement.csv", rt));
  o.files.push_back(plot_file(
      "killing", {{"killing.csv", "t", "probability", {{2, "mass left"}, {4, "cumulative removed"}}, false, false, "linespoints"},
                  {"refinement.csv", "dt", "absorbed mass", {{2, "intermittent killing"}, {3, "Dirichlet"}}, true, false, "linespoints"}}));
  return o;
}

void check_killing_balance(const Json& p, Violations& out) {
  const double x_min = num(p, "x_min"), x_max = num(p, "x_max"), edge = num(p, "boundary");
  if (!(x_max > x_min)) {
    out.add("x_max", "must exceed x_min");
    return;
  }
  if (!(edge > x_min && edge < x_max)) {
    out.add("boundary", "must lie strictly inside [x_min, x_max]");
    return;
  }
  const Grid1D g(x_min, x_max, idx(p, "points"));
  try {
    DomainSpec(x_min, EdgeKind::kArtificial, edge, EdgeKind::kBoundary).check_on(g);
  } catch (const DomainError& e) {
    out.add("boundary", std::string("DomainSpec invariant violated: ") + e.what());
  }
  if (!(num(p, "mean") < edge)) out.add("mean", "must lie inside D, below the boundary");
  require_multiple(p, "t_final", "dt", out);
  require_multiple(p, "t_final", "dt_solver", out);
  require_multiple_of_each(p, "t_final", "dt_ladder", out);
  const double reach = 10.0 * std::sqrt(std::max(num(p, "dt"), list(p, "dt_ladder").front()));
  if (x_max - edge < reach) {
    out.add("x_max", "the grid must reach 10 sqrt(dt) = " + format_number(reach) + " past the boundary");
  }
  if (std::sqrt(std::min(num(p, "dt"), list(p, "dt_ladder").back())) < g.dx()) {
    out.add("points", "dx must not exceed sqrt(dt) for the heat-kernel step");
  }
}

std::vector<ExperimentDef> build() {
  std::vector<ExperimentDef> v;
  const std::vector<ParamSpec> quantum{
      integer("cells_per_pi", 512, 16, 1 << 16),
      integer("box_lower_pi", 3, 1, 64),
      integer("box_upper_pi", 4, 2, 64),
      positive("tau", 0.5),
      positive_list("dt_ladder", {1e-2, 5e-3, 2.5e-3}, Order::kDecreasing),
      positive("reference_dt", 1e-3),
  };

  v.push_back({{Experiment::kDiffusionEquivalence, "diffusion-equivalence",
                "nonlinear conditioned solve vs renormalised Dirichlet heat solve on [0, pi]"},
               {integer("cells", 512, 16, 1 << 16), positive("dt_solver", 1e-3), positive("t_final", 1.0),
                integer("samples", 5, 1, 1000), positive("equivalence_tolerance", 5e-4),
                positive("min_refinement_ratio", 3.0), positive("stationarity_tolerance", 1e-5),
                positive("flux_tolerance_dx2", 1.0)},
               check_diffusion_equivalence, run_diffusion_equivalence});

  v.push_back({{Experiment::kFlemingViot, "fleming-viot",
                "Fleming-Viot particle system on a cube: quasi-stationary profile and kill rate"},
               {integer("dimension", 1, 1, 3), integer("walkers", 10000, 2, 100000000), positive("dt", 1e-4),
                positive("t_final", 2.0), number("lower", 0.0), number("upper", pi),
                positive_list("sample_times", {0.5, 1.0, 2.0}, Order::kIncreasing), integer("bins", 64, 1, 100000),
                bounded("rate_from", 0.5, 0.0, std::numeric_limits<double>::infinity()),
                integer("rate_window_steps", 1000, 10), positive("ks_tolerance", 0.05),
                positive("rate_tolerance", 0.05)},
               check_fleming_viot, run_fleming_viot});

  auto zeno_params = quantum;
  zeno_params.push_back(positive_list("epsilons", {0.1, 0.01, 0.001}, Order::kDecreasing));
  zeno_params.push_back(positive("epsilon_slope_tolerance", 0.02));
  zeno_params.push_back(positive("epsilon_flux_tolerance", 1e-3));
  v.push_back({{Experiment::kZenoScan, "zeno-scan",
                "quantum truncation recursion along a dt ladder, and the regularised boundary flux"},
               zeno_params, check_quantum, run_zeno_scan});

  auto contrast_params = quantum;
  contrast_params.push_back(integer("diffusion_margin_pi", 1, 1, 16));
  contrast_params.push_back(positive("fp_dt_solver", 1e-3));
  contrast_params.push_back(positive("relative_error_tolerance", 0.02));
  v.push_back({{Experiment::kQuantumVsDiffusionContrast, "quantum-vs-diffusion-contrast",
                "Zeno ladder for the quantum recursion next to intermittent killing of a diffusion"},
               contrast_params, check_contrast, run_contrast});

  v.push_back({{Experiment::kPmwfFigure1, "pmwf-figure1",
                "both post-measurement wave functions of a truncated plane wave on a plot window"},
               {number("k", 1.0), positive("tau", 1.0), number("x_lo", -20.0), number("x_hi", 10.0),
                integer("points", 3001, 8, 10000000), integer("dual_path_points", 301, 2, 100000),
                positive("dual_path_tolerance", 1e-6), positive("box_length", 50.0), positive("box_dx", 0.005),
                positive("box_dt", 1e-3), positive("box_tolerance", 1e-4)},
               check_figure1, run_figure1});

  v.push_back({{Experiment::kTailFit, "tail-fit",
                "power-law decay of |phi| into the measured region for both collapse models"},
               {number("k", 1.0), positive("tau", 1.0), positive("release", 1.0), positive("x_lo", 20.0),
                positive("x_hi", 100.0), integer("points", 81, 2, 100000), number("instantaneous_exponent", -1.0),
                positive("instantaneous_tolerance", 0.1), number("continuous_exponent", -2.0),
                positive("continuous_tolerance", 0.2), number("separation", -1.0),
                positive("separation_tolerance", 0.3)},
               check_tail_fit, run_tail_fit});

  v.push_back({{Experiment::kMomentScan, "moment-scan",
                "truncated first moments of |phi|^2 on the measured region and a convergence verdict"},
               {number("k", 1.0), positive("tau", 1.0), positive("release", 1.0),
                positive_list("cutoffs", {10, 20, 40, 80, 160}, Order::kIncreasing), positive("dx", 0.05),
                positive("rel_tol", 0.02)},
               check_moment_scan, run_moment_scan});

  v.push_back({{Experiment::kIntervalScaling, "interval-scaling",
                "dt scaling of the interval statistics a time dt after the measurement ends"},
               {number("k", 1.0), positive("tau_m", 1.0), positive("x1", 1.0), positive("x2", 2.0),
                positive_list("dt_ladder", {1e-2, 5e-3, 2.5e-3, 1.25e-3}, Order::kDecreasing),
                number("instantaneous_exponent", 0.5), number("continuous_exponent", 1.5),
                positive("exponent_tolerance", 0.15)},
               check_interval_scaling, run_interval_scaling});

  v.push_back({{Experiment::kKillingBalance, "killing-balance",
                "intermittent killing on a half-line: removed-mass ledger and Dirichlet limit"},
               {number("x_min", -10.0), number("x_max", 4.0), integer("points", 2801, 8, 10000000),
                number("boundary", 0.0), number("mean", -1.0), positive("variance", 0.1), positive("dt", 0.1),
                positive("t_final", 1.0), positive_list("dt_ladder", {0.02, 0.01, 0.005}, Order::kDecreasing),
                positive("dt_solver", 1e-3), positive("oracle_tolerance", 1e-6),
                positive("balance_tolerance", 1e-10)},
               check_killing_balance, run_killing_balance});
  return v;
}

}  // namespace

const std::vector<ExperimentDef>& registry() {
  static const std::vector<ExperimentDef> defs = build();
  return defs;
}

}  // namespace cclab::runner::detail

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cclab/fitting.hpp"
#include "cclab/quadrature.hpp"
#include "cclab/quantum_observer.hpp"

using namespace cclab;
using std::numbers::pi;

namespace {

constexpr Index kCellsPerPi = 512;

// Box [-3 pi, 4 pi] around D = [0, pi].
Grid1D boxed_grid() { return Grid1D::from_spacing(-3.0 * pi, pi / kCellsPerPi, 7 * kCellsPerPi + 1); }

WaveField eigenstate(const Grid1D& g, double t = 0.0) {
  const Complex phase = std::polar(1.0, -0.5 * t);
  return WaveField::sample(
      g,
      [&](double x) {
        return (x >= 0.0 && x <= pi) ? phase * std::sqrt(2.0 / pi) * std::sin(x) : Complex(0.0);
      },
      FieldKind::kWavefunction);
}

double sup(const WaveField& a, const WaveField& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

WaveField normalized(const WaveField& f) {
  return f.with_values(f.values() / std::sqrt(probability_mass(f)));
}

}  // namespace

TEST_CASE("power-law fit recovers exponents") {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -1.5));
  auto fit = fit_power_law(x, y);
  CHECK(fit.exponent == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(fit.amplitude == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_power_law({1.0}, {1.0}), InsufficientDataError);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0, 0.0}), InsufficientDataError);
}

TEST_CASE("dirichlet_schrodinger_solve") {
  const Grid1D g(0.0, pi, kCellsPerPi + 1);
  const auto d = DomainSpec::interval(0.0, pi);
  auto psi0 = eigenstate(g);
  auto h = dirichlet_schrodinger_solve(psi0, d, 1.0, 1e-3);
  CHECK(sup(h.final(), eigenstate(g, 1.0)) <= 1e-4);

  auto same = dirichlet_schrodinger_solve(psi0, d, 0.0, 1e-3);
  CHECK(sup(same.final(), psi0) == 0.0);
  CHECK_THROWS_AS(dirichlet_schrodinger_solve(psi0, d, 1.0, -1e-3), ArgumentError);

  // A smooth Dirichlet-compatible superposition keeps norm and energy.
  auto mix = WaveField::sample(
      g,
      [](double x) {
        return Complex(std::sin(x), 0.0) + Complex(0.3, 0.4) * std::sin(3.0 * x) +
               Complex(0.0, 0.2) * std::sin(5.0 * x);
      },
      FieldKind::kWavefunction);
  mix = normalized(mix);
  auto run = dirichlet_schrodinger_solve(mix, d, 1.0, 1e-3);
  REQUIRE(run.fields.size() == 1001);
  const double e0 = dirichlet_energy(mix, d);
  CHECK(e0 == doctest::Approx(0.5 * (1.0 + 9.0 * 0.25 + 25.0 * 0.04) / 1.29).epsilon(1e-4));
  for (const auto& f : run.fields) {
    CHECK(std::abs(probability_mass(f) - 1.0) <= 1e-10);
    CHECK(std::abs(dirichlet_energy(f, d) - e0) <= 1e-8);
  }
}

TEST_CASE("start-up half steps damp a discontinuity but keep smooth data accurate") {
  const Grid1D g(0.0, pi, kCellsPerPi + 1);
  const auto d = DomainSpec::interval(0.0, pi);
  auto h = dirichlet_schrodinger_solve(eigenstate(g), d, 1.0, 1e-3, {1, 4});
  CHECK(sup(h.final(), eigenstate(g, 1.0)) <= 1e-4);
  CHECK_THROWS_AS(dirichlet_schrodinger_solve(eigenstate(g), d, 1.0, 1e-3, {1, 3}), ArgumentError);
}

TEST_CASE("regularized flux") {
  const Grid1D g(0.0, pi, kCellsPerPi + 1);
  auto psi = eigenstate(g);
  auto j = regularized_flux(psi, 0.1);
  CHECK(j.j_value.real() == 0.0);
  CHECK(j.j_value.imag() == doctest::Approx(0.05 / 1.01).epsilon(1e-5));
  CHECK(regularized_flux(psi, 0.0).j_value == Complex(0.0));
  std::vector<double> eps{0.1, 0.01, 0.001}, mags;
  for (double e : eps) mags.push_back(std::abs(regularized_flux(psi, e).j_value));
  CHECK(fit_power_law(eps, mags).exponent == doctest::Approx(1.0).epsilon(0.02));
  CHECK_THROWS_AS(regularized_flux(psi, -1.0), ArgumentError);
}

TEST_CASE("truncation recursion") {
  SUBCASE("empty measured region is free evolution") {
    const Grid1D g(-30.0, 30.0, 1200);
    const auto d = DomainSpec::whole_box(-30.0, 30.0);
    auto psi0 = normalized(WaveField::sample(
        g, [](double x) { return Complex(std::exp(-x * x / 4.0), 0.0); },
        FieldKind::kWavefunction));
    auto run = quantum_truncation_recursion(psi0, d, ObservationSchedule::covering(1.0, 0.05, false));
    for (double s : run.survival) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("eigenstate: survival in [0,1] and unit norm when renormalising") {
    const Grid1D g = boxed_grid();
    const auto d = DomainSpec::interval(0.0, pi);
    auto run = quantum_truncation_recursion(eigenstate(g), d,
                                            ObservationSchedule::covering(0.5, 5e-3, true));
    for (double s : run.survival) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
    for (const auto& f : run.snapshots) CHECK(std::abs(probability_mass(f) - 1.0) <= 1e-10);
  }

  SUBCASE("Zeno ladder") {
    const Grid1D g = boxed_grid();
    const auto d = DomainSpec::interval(0.0, pi);
    auto scan = zeno_scan(eigenstate(g), d, 0.5, {1e-2, 5e-3, 2.5e-3}, 1e-3);
    CHECK(scan.leakage_monotone);
    CHECK(scan.error_monotone);
    CHECK(scan.leakage_fit.exponent > 0.0);
    for (const auto& r : scan.rungs) CHECK(r.max_edge_mass <= kSupportGuardTolerance);
  }

  SUBCASE("support guard trips on a small box") {
    const Grid1D g = Grid1D::from_spacing(-0.25 * pi, pi / 256, 384 + 1);
    const auto d = DomainSpec::interval(0.0, pi);
    CHECK_THROWS_AS(quantum_truncation_recursion(eigenstate(g), d,
                                                 ObservationSchedule::covering(0.5, 1e-2, false)),
                    GuardViolation);
  }
}

TEST_CASE("renormalization is irrelevant up to a phase") {
  const Grid1D g = boxed_grid();
  const auto d = DomainSpec::interval(0.0, pi);
  auto rep = renormalization_irrelevance_check(eigenstate(g), d,
                                               ObservationSchedule::covering(0.5, 1e-2, true));
  CHECK(rep.sup_distance <= 1e-8);

  auto packet = normalized(WaveField::sample(
      g,
      [](double x) {
        return (x >= 0.0 && x <= pi) ? std::sin(x) * std::polar(1.0, 2.0 * x) : Complex(0.0);
      },
      FieldKind::kWavefunction));
  auto one = renormalization_irrelevance_check(packet, DomainSpec::whole_box(g.x_min(), g.x_max()),
                                               ObservationSchedule(1e-2, 1, true));
  CHECK(one.sup_distance == 0.0);
  auto gen = renormalization_irrelevance_check(packet, d, ObservationSchedule::covering(0.5, 5e-3, true));
  CHECK(gen.sup_distance <= 1e-8);
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cclab/pmwf.hpp"
#include "cclab/propagators.hpp"

using namespace cclab;
using std::numbers::pi;

namespace {

struct Reference {
  double x, tau, re, im;
};

// 30-digit evaluations (mpmath) of the free evolution of Theta(-x) e^{-ix}.
constexpr Reference kPhiI[] = {
    {-3.0, 1.0, -0.87079435794317725, 0.76936630228277663},
    {0.0, 1.0, 0.26657835395608746, 0.1152441156922292},
    {2.0, 1.0, -0.11656758103243697, 0.057240158321489234},
    {20.0, 1.0, 0.018263468661049758, -0.0052280013780302287},
    {-10.0, 0.5, -0.97635676530202113, -0.3268333013341408},
    {1.5, 0.01, 0.025974348302697852, 0.0048253008569328564},
};

const PlaneWaveSpec kSpec{};

}  // namespace

TEST_CASE("phi^I closed form and quadrature against reference values") {
  for (const auto& r : kPhiI) {
    const Complex want(r.re, r.im);
    CHECK(std::abs(phi_instantaneous(r.x, r.tau, kSpec) - want) <= 1e-12);
    CHECK(std::abs(phi_instantaneous_quadrature(r.x, r.tau, kSpec).value - want) <= 1e-9);
  }
  std::vector<double> xs;
  for (int i = 0; i <= 60; ++i) xs.push_back(-20.0 + 0.5 * i);
  CHECK(instantaneous_dual_path_distance(kSpec, 1.0, xs) <= 1e-6);
  CHECK_THROWS_AS(phi_instantaneous(0.0, 0.0, kSpec), ArgumentError);
  CHECK_THROWS_AS(phi_instantaneous(0.0, 1.0, PlaneWaveSpec{0.0}), ArgumentError);
}

TEST_CASE("phi^I limits") {
  // Recovers the plane wave away from the cut, and half the jump at the cut.
  CHECK(std::abs(phi_instantaneous(-3.0, 1e-4, kSpec) - std::polar(1.0, 3.0)) <= 2e-3);
  CHECK(std::abs(phi_instantaneous(-3.0, 1e-6, kSpec) - std::polar(1.0, 3.0)) <= 2e-4);
  for (double tau : {1e-4, 1e-6}) {
    CHECK(std::abs(std::abs(phi_instantaneous(0.0, tau, kSpec)) - 0.5) <= 2.0 * std::sqrt(tau));
    CHECK(std::abs(std::abs(phi_instantaneous_quadrature(0.0, tau, kSpec).value) - 0.5) <=
          2.0 * std::sqrt(tau));
  }
}

TEST_CASE("phi^C: Dirichlet zero, images and the boxed solver") {
  CHECK(phi_continuous(0.0, 1.0, kSpec) == Complex(0.0));
  CHECK(phi_continuous(3.0, 1.0, kSpec) == Complex(0.0));
  CHECK(std::abs(phi_continuous(-1e-9, 1.0, kSpec)) < 1e-8);
  const Grid1D g(-5.0, 5.0, 101);
  auto f = pmwf_continuous(kSpec, 1.0, g);
  for (Index i = 0; i < g.size(); ++i) {
    if (g.x(i) >= 0.0) CHECK(f[i] == Complex(0.0));
  }
  auto box = continuous_box_crosscheck(kSpec, 1.0);
  CHECK(box.sup_distance <= 1e-4);
}

TEST_CASE("released phi^C") {
  CHECK_THROWS_AS(released_continuous(-1.0, 0.5, 1.0, kSpec), DomainError);
  // Spectral free evolution of the tapered phi^C on a large periodic box.
  const double dx = 0.005;
  const Index n = 16000;
  const Grid1D g = Grid1D::from_spacing(-60.0, dx, n);
  auto taper = [](double x) {
    const double s = std::clamp((-x - 30.0) / 15.0, 0.0, 1.0);
    auto h = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    return h(1.0 - s) / (h(1.0 - s) + h(s));
  };
  auto start = WaveField::sample(
      g, [&](double x) { return phi_continuous(x, 1.0, kSpec) * taper(x); },
      FieldKind::kWavefunction);
  auto moved = fresnel_step(start, 0.5);
  for (double x : {0.0, 0.5, 1.0, 3.0}) {
    const Index i = g.require_node(x, "probe");
    CHECK(std::abs(released_continuous(x, 0.5, 1.0, kSpec).value - moved[i]) <= 1e-4);
  }
}

TEST_CASE("tails") {
  auto ti = instantaneous_tail(kSpec, 1.0, 20.0, 100.0);
  CHECK(ti.exponent == doctest::Approx(-1.0).epsilon(0.1));
  auto tc = continuous_tail(kSpec, 1.0, 1.0, 20.0, 100.0, 41);
  CHECK(tc.exponent == doctest::Approx(-2.0).epsilon(0.1));
  CHECK(tc.exponent - ti.exponent == doctest::Approx(-1.0).epsilon(0.3));
  CHECK_THROWS_AS(fit_tail({1.0, 2.0}, {1e-10, 1e-11}, {1e-11, 1e-12}), InsufficientDataError);
}

TEST_CASE("first moment scan") {
  const Grid1D g(-10.0, 10.0, 2001);
  auto bump = WaveField::sample(
      g, [](double x) { return std::abs(x) < 1.0 ? Complex(1.0 - x * x) : Complex(0.0); },
      FieldKind::kWavefunction);
  auto s = first_moment_scan(bump, {2.0, 4.0, 8.0});
  CHECK(s.moments[0] == s.moments[1]);
  CHECK(s.moments[1] == s.moments[2]);
  CHECK(s.verdict == MomentVerdict::kConvergent);
  CHECK(s.moments[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-3));  // 2 int_0^1 x (1-x^2)^2

  const std::vector<double> cutoffs{10, 20, 40, 80, 160};
  const Grid1D half(0.0, 160.0, 3201);
  auto si = first_moment_scan(pmwf_instantaneous(kSpec, 1.0, half, false), cutoffs);
  CHECK(si.verdict == MomentVerdict::kDivergent);
  // |phi^I|^2 ~ 1 / (2 pi x^2): the moment grows by log(2) / (2 pi) per doubling.
  CHECK(si.increments.back() == doctest::Approx(std::log(2.0) / (2.0 * pi)).epsilon(0.05));

  const Grid1D coarse(0.0, 160.0, 1601);
  auto released = WaveField::sample(
      coarse, [](double x) { return released_continuous(x, 1.0, 1.0, kSpec).value; },
      FieldKind::kWavefunction);
  CHECK(first_moment_scan(released, cutoffs).verdict == MomentVerdict::kConvergent);
  CHECK_THROWS_AS(first_moment_scan(released, {10, 20, 400}), DomainError);
}

TEST_CASE("interval statistics") {
  const std::vector<double> ladder{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  auto inst = interval_mean_scaling(PmwfVariant::kInstantaneous, 1.0, 2.0, ladder);
  // |phi^I(x, dt)|^2 ~ dt / (2 pi (x + dt)^2) for x >> sqrt(dt).
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    CHECK(inst.partial_moment[i] ==
          doctest::Approx(ladder[i] * std::log(2.0) / (2.0 * pi)).epsilon(0.03));
  }
  CHECK(inst.partial_fit.exponent == doctest::Approx(1.0).epsilon(0.02));
  CHECK(inst.amplitude_fit.exponent == doctest::Approx(0.5).epsilon(0.02));

  auto cont = interval_mean_scaling(PmwfVariant::kContinuous, 1.0, 2.0, ladder);
  for (double m : cont.partial_moment) CHECK(m > 0.0);
  CHECK(cont.partial_moment.back() < cont.partial_moment.front());
  CHECK(cont.partial_fit.exponent > inst.partial_fit.exponent + 1.5);

  CHECK_THROWS_AS(interval_mean_scaling(PmwfVariant::kInstantaneous, 2.0, 1.0, ladder),
                  ArgumentError);
  CHECK_THROWS_AS(interval_mean_scaling(PmwfVariant::kInstantaneous, 1.0, 2.0, {1e-3, 1e-2}),
                  ArgumentError);
}

TEST_CASE("figure table") {
  auto t = figure1_data(kSpec);
  CHECK(t.x.size() == 3001);
  for (const auto& c : figure1_checks(t, kSpec)) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  auto broken = t;
  broken.re_continuous.back() = 1e-3;
  bool caught = false;
  for (const auto& c : figure1_checks(broken, kSpec)) caught = caught || !c.passed;
  CHECK(caught);
}

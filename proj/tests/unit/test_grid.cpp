#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cclab/grid.hpp"
#include "cclab/propagators.hpp"
#include "cclab/quadrature.hpp"
#include "cclab/special_functions.hpp"

using namespace cclab;
using std::numbers::pi;

namespace {

double gaussian_pdf(double x, double var) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * pi * var);
}

double sup_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

double sup_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Free Gaussian packet of initial width sigma (|psi|^2 has variance sigma^2).
Complex free_gaussian(double x, double t, double sigma) {
  const Complex spread = 1.0 + Complex(0.0, t / (2.0 * sigma * sigma));
  return std::pow(2.0 * pi * sigma * sigma, -0.25) / std::sqrt(spread) *
         std::exp(-x * x / (4.0 * sigma * sigma * spread));
}

}  // namespace

TEST_CASE("grid invariants and validation") {
  Grid1D g(0.0, 1.0, 101);
  CHECK(g.dx() == doctest::Approx(0.01));
  CHECK(g.x(100) == doctest::Approx(1.0));
  const Eigen::VectorXd x = g.nodes();
  for (Index i = 1; i < g.size(); ++i) CHECK(std::abs(x[i] - x[i - 1] - g.dx()) < 1e-14);

  CHECK_THROWS_AS(Grid1D(1.0, 0.0, 101), ArgumentError);
  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 7), ArgumentError);
  CHECK_THROWS_AS(Grid1D::from_spacing(0.0, -0.1, 20), ArgumentError);

  CHECK(g.node_index(0.37).value() == 37);
  CHECK_FALSE(g.node_index(0.375).has_value());
  CHECK_THROWS_AS(g.require_node(0.375, "probe"), DomainError);
}

TEST_CASE("domain spec geometry") {
  const auto d = DomainSpec::interval(0.0, pi);
  auto b = d.boundary_points();
  REQUIRE(b.size() == 2);
  CHECK(b[0].outward_sign == -1);
  CHECK(b[1].outward_sign == 1);

  const auto h = DomainSpec::negative_half_line(10.0);
  REQUIRE(h.boundary_points().size() == 1);
  CHECK(h.boundary_points()[0].x == 0.0);
  CHECK(h.lower_kind() == EdgeKind::kArtificial);
  CHECK_FALSE(DomainSpec::whole_box(-1.0, 1.0).has_measured_region());

  CHECK_THROWS_AS(DomainSpec::interval(1.0, 1.0), ArgumentError);
  // Boundary point between nodes.
  Grid1D g(0.0, 4.0, 41);
  CHECK_THROWS_AS(DomainSpec::interval(0.55, 2.0).check_on(g), DomainError);
  CHECK_THROWS_AS(DomainSpec::interval(1.0, 5.0).check_on(g), DomainError);
  CHECK_NOTHROW(DomainSpec::interval(0.5, 2.0).check_on(g));
}

TEST_CASE("observation schedule") {
  ObservationSchedule s(0.01, 50, true);
  CHECK(s.total_time() == doctest::Approx(0.5));
  CHECK(ObservationSchedule::covering(0.5, 0.0025, false).n_steps() == 200);
  CHECK_THROWS_AS(ObservationSchedule(0.0, 10, true), ArgumentError);
  CHECK_THROWS_AS(ObservationSchedule(0.1, 0, true), ArgumentError);
  CHECK_THROWS_AS(ObservationSchedule::covering(0.5, 0.3, true), ArgumentError);
}

TEST_CASE("integrate: trapezoid quadrature") {
  Grid1D unit(0.0, 1.0, 101);
  CHECK(integrate(DensityField::sample(unit, [](double) { return 1.0; }, FieldKind::kDensity)) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate(DensityField::zeros(unit, FieldKind::kDensity)) == 0.0);
  // Exact for linear functions.
  CHECK(integrate(DensityField::sample(unit, [](double x) { return 3.0 * x - 1.0; },
                                       FieldKind::kDensity)) == doctest::Approx(0.5).epsilon(1e-14));

  // Second-order convergence on sin over [0, pi].
  double prev_err = 0.0;
  for (Index n : {65, 129, 257, 513}) {
    Grid1D g(0.0, pi, n);
    const double err = std::abs(
        integrate(DensityField::sample(g, [](double x) { return std::sin(x); }, FieldKind::kDensity)) - 2.0);
    CHECK(err < 2.0 * g.dx() * g.dx());
    if (prev_err > 0.0) CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.01));
    prev_err = err;
  }

  // Integration over a sub-region, and a region the grid cannot represent.
  Grid1D g(-1.0, 2.0, 301);
  auto f = DensityField::sample(g, [](double x) { return x; }, FieldKind::kDensity);
  CHECK(integrate(f, DomainSpec::interval(0.0, 1.0)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(integrate(f, DomainSpec::interval(0.0, 3.0)), DomainError);

  auto psi = WaveField::sample(g, [](double x) { return std::polar(2.0, x); }, FieldKind::kWavefunction);
  CHECK(probability_mass(psi, DomainSpec::interval(0.0, 1.0)) == doctest::Approx(4.0));
}

TEST_CASE("gaussian_step: heat kernel convolution") {
  SUBCASE("spike spreads to a Gaussian of variance dt") {
    Grid1D g(-5.0, 5.0, 1001);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.size());
    v[500] = 1.0 / g.dx();
    auto out = gaussian_step(make_density(g, v), 0.3);
    CHECK(integrate(out) == doctest::Approx(1.0).epsilon(1e-12));
    const Eigen::VectorXd x = g.nodes();
    const double var = integrate(out.with_values(out.values().cwiseProduct(x.cwiseAbs2())));
    CHECK(var == doctest::Approx(0.3).epsilon(1e-10));
  }
  SUBCASE("constant field keeps its interior values") {
    Grid1D g(-20.0, 20.0, 801);
    auto out = gaussian_step(DensityField::sample(g, [](double) { return 1.0; }, FieldKind::kDensity), 0.5);
    for (Index i = 200; i <= 600; ++i) CHECK(std::abs(out[i] - 1.0) < 1e-12);
  }
  SUBCASE("Gaussian convolution closed form") {
    Grid1D g(-12.0, 12.0, 961);
    auto p = DensityField::sample(g, [](double x) { return gaussian_pdf(x, 0.5); }, FieldKind::kDensity);
    auto out = gaussian_step(p, 0.25);
    auto expect = DensityField::sample(g, [](double x) { return gaussian_pdf(x, 0.75); }, FieldKind::kDensity);
    CHECK(sup_distance(out.values(), expect.values()) <= 1e-6);
  }
  SUBCASE("semigroup") {
    Grid1D g(-12.0, 12.0, 961);
    auto p = DensityField::sample(g, [](double x) { return gaussian_pdf(x - 0.7, 0.3) + 0.5 * gaussian_pdf(x + 1.1, 0.8); },
                                  FieldKind::kDensity);
    CHECK(sup_distance(gaussian_step(gaussian_step(p, 0.2), 0.2).values(), gaussian_step(p, 0.4).values()) <= 1e-8);
  }
  SUBCASE("errors") {
    Grid1D g(-1.0, 1.0, 101);
    auto p = DensityField::zeros(g, FieldKind::kDensity);
    CHECK_THROWS_AS(gaussian_step(p, 0.0), ArgumentError);
    CHECK_THROWS_AS(gaussian_step(p, -1.0), ArgumentError);
  }
}

TEST_CASE("fresnel_step: spectral free propagation") {
  SUBCASE("commensurate plane wave is an eigenfunction") {
    Grid1D g = Grid1D::from_spacing(0.0, 2.0 * pi / 256.0, 256);
    const double k = 5.0;  // 2*pi*5 / period, period = 2*pi
    auto psi = WaveField::sample(g, [&](double x) { return std::polar(1.0, k * x); }, FieldKind::kWavefunction);
    auto out = fresnel_step(psi, 0.37);
    const Eigen::VectorXcd expect = psi.values() * std::polar(1.0, -0.5 * k * k * 0.37);
    CHECK(sup_distance(out.values(), expect) < 1e-12);
  }
  SUBCASE("Gaussian packet obeys the spreading law") {
    Grid1D g = Grid1D::from_spacing(-40.0, 80.0 / 1024.0, 1024);
    auto psi = WaveField::sample(g, [](double x) { return free_gaussian(x, 0.0, 1.0); }, FieldKind::kWavefunction);
    auto out = fresnel_step(psi, 1.0);
    const Eigen::VectorXd x = g.nodes();
    const Eigen::VectorXd rho = out.values().cwiseAbs2();
    const double var = trapezoid(rho.cwiseProduct(x.cwiseAbs2()), 0, g.size() - 1, g.dx());
    CHECK(std::abs(var - (1.0 + 1.0 / 4.0)) <= 1e-6);
    auto exact = WaveField::sample(g, [](double x) { return free_gaussian(x, 1.0, 1.0); }, FieldKind::kWavefunction);
    CHECK(sup_distance(out.values(), exact.values()) < 1e-10);
  }
  SUBCASE("unitarity and semigroup") {
    Grid1D g = Grid1D::from_spacing(-20.0, 40.0 / 512.0, 512);
    auto psi = WaveField::sample(
        g, [](double x) { return free_gaussian(x - 2.0, 0.0, 0.8) * std::polar(1.0, 1.5 * x) + 0.3 * free_gaussian(x + 3.0, 0.0, 1.2); },
        FieldKind::kWavefunction);
    const double n0 = probability_mass(psi);
    auto once = fresnel_step(psi, 0.6);
    CHECK(std::abs(probability_mass(once) - n0) <= 1e-12);
    CHECK(sup_distance(fresnel_step(fresnel_step(psi, 0.3), 0.3).values(), once.values()) <= 1e-8);
    CHECK_THROWS_AS(fresnel_step(psi, 0.0), ArgumentError);
  }
}

TEST_CASE("boundary_normal_derivative") {
  const auto d = DomainSpec::interval(0.0, pi);
  double prev = 0.0;
  for (Index n : {129, 257, 513}) {
    Grid1D g(0.0, pi, n);
    auto f = DensityField::sample(g, [](double x) { return 0.5 * std::sin(x); }, FieldKind::kDensity);
    auto dn = boundary_normal_derivative(f, d);
    REQUIRE(dn.size() == 2);
    const double err = std::max(std::abs(dn[0] + 0.5), std::abs(dn[1] + 0.5));
    CHECK(err < g.dx() * g.dx());
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.02));
    prev = err;
  }

  Grid1D g(-1.0, 4.0, 501);
  auto zero = DensityField::zeros(g, FieldKind::kDensity);
  for (double v : boundary_normal_derivative(zero, DomainSpec::interval(0.0, 3.0))) {
    CHECK(v == 0.0);
  }
  // Compactly supported hump well inside D.
  auto hump = DensityField::sample(
      g, [](double x) { return std::abs(x - 1.5) < 1.0 ? std::pow(std::cos(pi * (x - 1.5) / 2.0), 4) : 0.0; },
      FieldKind::kDensity);
  for (double v : boundary_normal_derivative(hump, DomainSpec::interval(-0.5, 3.5))) CHECK(std::abs(v) < 1e-12);

  CHECK_THROWS_AS(boundary_normal_derivative(hump, DomainSpec::interval(0.005, 3.5)), DomainError);

  // Complex fields use the same stencil.
  Grid1D gq(0.0, pi, 513);
  auto psi = WaveField::sample(gq, [](double x) { return Complex(0.0, std::sin(x)); }, FieldKind::kWavefunction);
  auto dq = boundary_normal_derivative(psi, DomainSpec::interval(0.0, pi));
  CHECK(std::abs(dq[0] - Complex(0.0, -1.0)) < 1e-4);
}

TEST_CASE("complex erfc against high-precision values") {
  struct Case {
    Complex z;
    Complex value;
  };
  // Frozen from a 30-digit arbitrary-precision evaluation.
  const Case cases[] = {
      {{0.3, 0.2}, {0.65876251852786141412, -0.20852883788276887638}},
      {{1.5, -1.5}, {0.1182614660887502748, -0.23124007509130206655}},
      {{-2.0, -0.5}, {2.0035022433130363472, 0.0047409030312943361045}},
      {{2.6, -2.6}, {-0.020102717497887681091, 0.15161100546101318781}},
      {{5.0, -5.0}, {0.069620396256904884146, 0.038936190895121378954}},
      {{-4.0, 4.0}, {1.9785492330760819259, -0.097339690630831865347}},
      {{10.0, -10.0}, {0.038350625727525140159, -0.01098768460819398838}},
      {{0.5, 0.0}, {0.47950012218695346232, 0.0}},
      {{3.0, 0.1}, {0.000018016608537296946629, -0.000013146330996617972419}},
      {{-7.0, 0.3}, {2.0, 4.0771152520004416139e-23}},
  };
  for (const auto& c : cases) {
    CAPTURE(c.z);
    CHECK(std::abs(cclab::erfc(c.z) - c.value) < 1e-12);
  }
  CHECK(std::abs(cclab::erfc(Complex(6.0, 0.0)).real() / 2.1519736712498913117e-17 - 1.0) < 1e-10);
  for (double x = -4.0; x <= 4.0; x += 0.37) {
    CHECK(std::abs(cclab::erfc(Complex(x, 0.0)).real() - std::erfc(x)) < 1e-12);
  }
}

TEST_CASE("adaptive Gauss-Kronrod") {
  auto r = adaptive_gauss_kronrod([](double x) { return Complex(std::sin(x), 0.0); }, 0.0, pi, 1e-14, 1e-14);
  CHECK(r.converged);
  CHECK(std::abs(r.value - 2.0) < 1e-13);
  // Fresnel: integral_0^inf exp(i x^2) dx = sqrt(pi)/2 * exp(i pi/4); truncated
  // at 30 with the asymptotic remainder i exp(i 900) / 60 removed.
  auto f = adaptive_gauss_kronrod([](double x) { return std::polar(1.0, x * x); }, 0.0, 30.0, 1e-13, 1e-13);
  const Complex tail = Complex(0.0, 1.0) * std::polar(1.0, 900.0) / 60.0;
  const Complex expect = std::sqrt(pi) / 2.0 * std::polar(1.0, pi / 4.0);
  CHECK(std::abs(f.value + tail - expect) < 2e-5);
}

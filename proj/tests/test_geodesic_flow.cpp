#include <doctest.h>

#include <cmath>
#include <numbers>

#include "trgeo/ambient.hpp"
#include "trgeo/error.hpp"
#include "trgeo/geodesic_flow.hpp"

using namespace trgeo;

namespace {

constexpr double pi = std::numbers::pi;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

double max_point_diff(const Immersion& a, const Immersion& b) {
  double m = 0.0;
  for (std::size_t node = 0; node < a.node_count(); ++node)
    m = std::max(m, (a.point(node) - b.point(node)).cwiseAbs().maxCoeff());
  return m;
}

double log_power(int n) { return std::exp(-std::log(n) * std::log(n)); }

Immersion curve_immersion(const FourierCurve& c, int M) {
  return Immersion::plane_curve(GridTorus::circle(M), AmbientChart::flat(1), c.synthesize(M));
}

FourierCurve joukowski_image(double radius, int N = 8) {
  auto c = FourierCurve::zeros(N);
  c[1] = 0.5 * radius;
  c[-1] = 0.5 / radius;
  return c;
}

}  // namespace

TEST_CASE("spectral flow of a circle shrinks it") {
  const auto grid = GridTorus::circle(64);
  const auto im = Immersion::circle(grid, AmbientChart::flat(1), 1.0);
  const auto flow = flow_spectral(im, VectorFieldOnL::coordinate(grid, 0), {0.0, 0.5});
  const auto expect = Immersion::circle(grid, AmbientChart::flat(1), std::exp(-0.5));
  CHECK(max_point_diff(flow.immersions[1], expect) < 1e-14);
  CHECK(flow.geodesic_residual < 1e-8);
  CHECK(std::abs(flow.amplification - 1.0) < 1e-15);
}

TEST_CASE("spectral flow of a product torus acts on one factor") {
  const auto grid = GridTorus::torus(32, 32);
  const auto chart = AmbientChart::flat(2);
  const auto im = Immersion::product_torus(grid, chart, 1.0, 2.0);
  const auto x = VectorFieldOnL::coordinate(grid, 0);
  const auto flow = flow_spectral(im, x, {0.3});
  CHECK(max_point_diff(flow.immersions[0], Immersion::product_torus(grid, chart, std::exp(-0.3), 2.0)) < 1e-13);
  CHECK(flow.geodesic_residual < 1e-8);
}

TEST_CASE("continuation is refused without an annulus") {
  auto c = FourierCurve::from_families(256, log_power, log_power);
  c[1] += 1.0;
  const auto im = curve_immersion(c, 1024);
  const auto x = VectorFieldOnL::coordinate(im.grid(), 0);
  CHECK(kind_of([&] { flow_spectral(im, x, {0.01}); }) == ErrorKind::AmplificationExceeded);
  CHECK(kind_of([&] { flow_spectral(im, x, {-0.01}); }) == ErrorKind::AmplificationExceeded);

  // raw mode growth alone also trips the guard
  const auto grid = GridTorus::circle(64);
  auto wavy = Immersion::circle(grid, AmbientChart::flat(1), 1.0);
  std::vector<double> bump(2 * 64);
  for (int k = 0; k < 64; ++k) bump[2 * k] = 1e-3 * std::cos(20.0 * grid.angle(0, k));
  wavy = wavy.displaced(bump, 1.0);
  CHECK(kind_of([&] { flow_spectral(wavy, VectorFieldOnL::coordinate(grid, 0), {0.8}); }) ==
        ErrorKind::AmplificationExceeded);
}

TEST_CASE("unsupported fields") {
  const auto grid = GridTorus::torus(16, 16);
  const auto im = Immersion::product_torus(grid, AmbientChart::flat(2), 1.0, 2.0);
  auto x = VectorFieldOnL::coordinate(grid, 0);
  x.components[1] = x.components[0];
  CHECK(kind_of([&] { flow_spectral(im, x, {0.1}); }) == ErrorKind::UnsupportedField);
  CHECK(kind_of([&] { flow_spectral(im, VectorFieldOnL::zero(grid), {0.1}); }) == ErrorKind::UnsupportedField);
}

TEST_CASE("group property and time reversal") {
  const auto grid = GridTorus::circle(64);
  const auto im = Immersion::ellipse(grid, AmbientChart::flat(1), 2.0, 1.0);
  const auto x = VectorFieldOnL::coordinate(grid, 0);
  const auto a = flow_spectral(im, x, {0.1}).immersions[0];
  const auto ab = flow_spectral(a, x, {0.15}).immersions[0];
  const auto direct = flow_spectral(im, x, {0.25}).immersions[0];
  CHECK(max_point_diff(ab, direct) < 1e-10);

  const auto back = flow_spectral(a, VectorFieldOnL::coordinate(grid, 0, -1.0), {0.1}).immersions[0];
  CHECK(max_point_diff(back, im) < 1e-8);
}

TEST_CASE("schemes agree on analytic data") {
  {
    const auto grid = GridTorus::circle(64);
    const auto im = Immersion::circle(grid, AmbientChart::flat(1), 1.0);
    CHECK(uniqueness_compare(im, VectorFieldOnL::coordinate(grid, 0), 0.1) < 1e-6);
  }
  {
    const auto grid = GridTorus::circle(64);
    const auto im = Immersion::ellipse(grid, AmbientChart::flat(1), 2.0, 1.0);
    CHECK(uniqueness_compare(im, VectorFieldOnL::coordinate(grid, 0), 0.05) < 1e-5);
  }
  {
    const auto grid = GridTorus::torus(32, 32);
    const auto im = Immersion::product_torus(grid, AmbientChart::flat(2), 1.0, 2.0);
    CHECK(uniqueness_compare(im, VectorFieldOnL::coordinate(grid, 0), 0.1) < 1e-6);
  }
}

TEST_CASE("variable field on a curve: pipeline against time stepping") {
  const auto grid = GridTorus::circle(64);
  const auto im = Immersion::ellipse(grid, AmbientChart::flat(1), 2.0, 1.0);
  const auto x = VectorFieldOnL::scaled_coordinate(grid, 0, [](double t, double) { return 1.0 + 0.3 * std::cos(t); });
  const auto sp = flow_spectral(im, x, {0.05});
  const auto ts = flow_timestep(im, x, {0.05});
  CHECK(max_point_diff(sp.immersions[0], ts.immersions[0]) < 1e-5);
  CHECK(sp.geodesic_residual < 1e-6);
}

TEST_CASE("time stepping guards") {
  const auto grid = GridTorus::circle(64);
  const auto im = Immersion::circle(grid, AmbientChart::flat(1), 1.0);
  const auto x = VectorFieldOnL::coordinate(grid, 0);
  TimestepOptions big;
  big.dt = 0.1;
  CHECK(kind_of([&] { flow_timestep(im, x, {0.2}, big); }) == ErrorKind::StepTooLarge);
  CHECK(kind_of([&] { flow_timestep(im, x, {0.2, 0.1}); }) == ErrorKind::InvalidArgument);

  // a_{-n} = e^{-sqrt n}: smooth but not analytic inside the disk
  auto c = FourierCurve::from_families(400, nullptr, [](int n) { return std::exp(-std::sqrt(double(n))); });
  c[1] = 16.0;
  const auto rough = curve_immersion(c, 1024);
  double blew_at = -1.0;
  try {
    flow_timestep(rough, VectorFieldOnL::coordinate(rough.grid(), 0), {0.2});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BlowUpDetected);
    blew_at = 0.0;
  }
  CHECK(blew_at == 0.0);
}

TEST_CASE("commutator check") {
  const auto grid = GridTorus::circle(64);
  const auto im = Immersion::circle(grid, AmbientChart::flat(1), 1.0);
  const auto x = VectorFieldOnL::coordinate(grid, 0);
  std::vector<double> ts;
  for (int k = 0; k <= 8; ++k) ts.push_back(0.025 * k);
  auto flow = flow_spectral(im, x, ts);
  CHECK(commutator_check(flow, x) < 1e-6);

  std::vector<double> kick(2 * 64);
  for (int k = 0; k < 64; ++k) kick[2 * k] = std::cos(3.0 * grid.angle(0, k));
  flow.immersions[4] = flow.immersions[4].displaced(kick, 1e-3);
  CHECK(commutator_check(flow, x) > 1e-4);

  const auto tgrid = GridTorus::torus(16, 16);
  const auto torus = Immersion::product_torus(tgrid, AmbientChart::flat(2), 1.0, 2.0);
  const auto tx = VectorFieldOnL::coordinate(tgrid, 0);
  CHECK(commutator_check(flow_spectral(torus, tx, ts), tx) < 1e-6);
  CHECK(commutator_check(flow_timestep(torus, tx, ts), tx) < 1e-5);

  flow.times.resize(2);
  flow.immersions.erase(flow.immersions.begin() + 2, flow.immersions.end());
  CHECK(kind_of([&] { commutator_check(flow, x); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("annulus boundary value problem") {
  {
    auto outer = FourierCurve::zeros(8), inner = FourierCurve::zeros(8);
    outer[1] = 1.0;
    inner[1] = 0.5;
    const auto r = solve_bvp_annulus(outer, inner, 8);
    CHECK(r.converged);
    CHECK(std::abs(r.rho - 0.5) < 1e-10);
    CHECK(std::abs(r.g[1] - 1.0) < 1e-10);
    for (int n = -8; n <= 8; ++n)
      if (n != 1) CHECK(std::abs(r.g[n]) < 1e-10);
  }
  {
    // images of |w| = 1.5 and |w| = 1.1 under (w + 1/w) / 2
    const auto r = solve_bvp_annulus(joukowski_image(1.5), joukowski_image(1.1), 8);
    CHECK(r.converged);
    CHECK(std::abs(r.rho - 1.1 / 1.5) < 1e-6);
    CHECK(std::max(r.outer_misfit, r.inner_misfit) < 1e-8);
    CHECK(std::abs(r.g[1] - 0.75) < 1e-6);
    CHECK(std::abs(r.g[-1] - 1.0 / 3.0) < 1e-6);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
    // interior circles are the confocal family
    for (int j = 0; j < 16; ++j) {
      const double a = 2.0 * pi * j / 16;
      const cplx w = std::polar(1.3, a);
      CHECK(std::abs(r.g.laurent(std::polar(1.3 / 1.5, a)) - 0.5 * (w + 1.0 / w)) < 1e-6);
    }
  }
  {
    auto a = FourierCurve::zeros(4), b = FourierCurve::zeros(4);
    a[1] = 1.0;
    b[1] = 0.8;
    b[0] = 0.5;
    CHECK(!nested(a, b));
    CHECK(kind_of([&] { solve_bvp_annulus(a, b, 4); }) == ErrorKind::NotNested);
  }
}

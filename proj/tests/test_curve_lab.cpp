#include <doctest.h>

#include <cmath>
#include <numbers>

#include "trgeo/curve_lab.hpp"
#include "trgeo/error.hpp"

using namespace trgeo;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<cplx> sample(int M, const std::function<cplx(double)>& f) {
  std::vector<cplx> out(M);
  for (int k = 0; k < M; ++k) out[k] = f(2.0 * pi * k / M);
  return out;
}

// plain left-endpoint quadrature of gamma e^{-i n theta}
cplx quad_coefficient(const std::function<cplx(double)>& f, int n, int M = 4096) {
  cplx acc = 0.0;
  for (int k = 0; k < M; ++k) {
    const double th = 2.0 * pi * k / M;
    acc += f(th) * std::polar(1.0, -n * th);
  }
  return acc / static_cast<double>(M);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

FourierCurve ellipse_curve(int N = 32) {
  auto c = FourierCurve::zeros(N);
  c[1] = 1.5;
  c[-1] = 0.5;
  return c;
}

double log_power(int n) { return std::exp(-std::log(n) * std::log(n)); }

}  // namespace

TEST_CASE("fourier coefficients of simple curves") {
  const auto circle = fourier_analyze(sample(128, [](double t) { return std::polar(1.0, t); }), 32);
  CHECK(std::abs(circle[1] - 1.0) < 1e-12);
  for (int n = -32; n <= 32; ++n)
    if (n != 1) CHECK(std::abs(circle[n]) < 1e-12);

  auto ell = [](double t) { return cplx(2.0 * std::cos(t), std::sin(t)); };
  const auto e = fourier_analyze(sample(128, ell), 32);
  CHECK(std::abs(e[1] - quad_coefficient(ell, 1)) < 1e-12);
  CHECK(std::abs(e[-1] - quad_coefficient(ell, -1)) < 1e-12);
  CHECK(std::abs(e[1] - 1.5) < 1e-12);
  CHECK(std::abs(e[-1] - 0.5) < 1e-12);
  for (int n = -32; n <= 32; ++n)
    if (std::abs(n) != 1) CHECK(std::abs(e[n]) < 1e-12);
  CHECK(e.parseval_residual < 1e-12);
}

TEST_CASE("inverse-square family round trips") {
  const int N = 64;
  const auto c = FourierCurve::from_families(N, [](int n) { return 1.0 / (double(n) * n); }, nullptr);
  const auto back = fourier_analyze(c.synthesize(4 * N), N);
  for (int n = 1; n <= N; ++n) CHECK(std::abs(back[n] - 1.0 / (double(n) * n)) < 1e-12);
  for (int n = -N; n <= 0; ++n) CHECK(std::abs(back[n]) < 1e-12);
}

TEST_CASE("aliasing is detected") {
  // mode 40 cannot be represented with N = 16
  const auto s = sample(64, [](double t) { return std::polar(1.0, t) + 0.1 * std::polar(1.0, 20 * t); });
  CHECK(kind_of([&] { fourier_analyze(s, 16); }) == ErrorKind::AliasingDetected);
  CHECK(kind_of([&] { fourier_analyze(s, 32); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("radius estimates") {
  const auto geo = FourierCurve::from_families(32, [](int n) { return std::pow(0.5, n); }, nullptr);
  const auto g = estimate_radii(geo);
  CHECK(std::abs(g.r_outer - 2.0) < 1e-6);
  CHECK(g.r_inner == 0.0);
  CHECK(g.inner.absent);

  const auto sq = FourierCurve::from_families(256, [](int n) { return 1.0 / (double(n) * n); }, nullptr);
  CHECK(std::abs(estimate_radii(sq).r_outer - 1.0) < 0.05);

  const auto lp = FourierCurve::from_families(256, log_power, nullptr);
  CHECK(std::abs(estimate_radii(lp).r_outer - 1.0) < 0.05);

  // finite radii on both sides
  const auto both = FourierCurve::from_families(
      256, [](int n) { return std::pow(1.05, -n); }, [](int n) { return std::pow(1.1, -n); });
  const auto b = estimate_radii(both);
  CHECK(std::abs(b.r_outer - 1.05) < 1e-6);
  CHECK(std::abs(b.r_inner - 1.0 / 1.1) < 1e-6);

  CHECK(kind_of([&] { estimate_radii(sq, {10, 200}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("direction trichotomy") {
  auto unit = FourierCurve::zeros(32);
  unit[1] = 1.0;
  CHECK(classify_direction(unit).kind == DirectionKind::GeodesicAnnulus);

  const auto annulus = FourierCurve::from_families(
      256, [](int n) { return std::pow(1.05, -n); }, [](int n) { return std::pow(1.1, -n); });
  CHECK(classify_direction(annulus).kind == DirectionKind::GeodesicAnnulus);

  const auto ray = FourierCurve::from_families(256, log_power, [](int n) { return std::pow(2.0, -n); });
  const auto rc = classify_direction(ray);
  CHECK(rc.kind == DirectionKind::RayOnly);
  CHECK(rc.outer_l1_convergent);

  const auto none = FourierCurve::from_families(256, log_power, log_power);
  CHECK(classify_direction(none).kind == DirectionKind::NoRay);

  // radius one but not summable on the boundary
  const auto harmonic = FourierCurve::from_families(256, [](int n) { return 1.0 / n; }, [](int n) {
    return std::pow(2.0, -n);
  });
  CHECK(classify_direction(harmonic).kind == DirectionKind::NoRay);
}

TEST_CASE("reparametrization by a positive field") {
  const int M = 64;
  const auto circle = sample(M, [](double t) { return std::polar(1.0, t); });
  {
    const auto r = reparametrize_by_field(circle, std::vector<double>(M, 1.0));
    CHECK(std::abs(r.R - 1.0) < 1e-14);
    for (int k = 0; k < M; ++k) CHECK(std::abs(r.theta_of_s[k] - 2.0 * pi * k / M) < 1e-12);
  }
  {
    const auto r = reparametrize_by_field(circle, std::vector<double>(M, 2.0));
    CHECK(std::abs(r.R - 0.5) < 1e-14);
    for (int k = 0; k < M; ++k) CHECK(std::abs(r.theta_of_s[k] - 2.0 * (pi * k / M)) < 1e-12);
  }
  {
    std::vector<double> f(M);
    for (int k = 0; k < M; ++k) f[k] = 1.0 + 0.5 * std::cos(2.0 * pi * k / M);
    const auto r = reparametrize_by_field(circle, f);
    CHECK(std::abs(r.R - 1.0 / std::sqrt(0.75)) < 1e-12);
    CHECK(r.closure_error < 1e-8);
    f[3] = -0.1;
    CHECK(kind_of([&] { reparametrize_by_field(circle, f); }) == ErrorKind::FieldNotPositive);
  }
}

TEST_CASE("geodesic evaluation on circles") {
  auto unit = FourierCurve::zeros(32);
  unit[1] = 1.0;
  const auto half = geodesic_evaluate(unit, 0.5);
  for (std::size_t k = 0; k < half.size(); ++k)
    CHECK(std::abs(half[k] - 0.5 * std::polar(1.0, 2.0 * pi * k / half.size())) < 1e-14);

  const auto e = geodesic_evaluate(ellipse_curve(), 0.9, 128);
  for (int k = 0; k < 128; ++k) {
    const cplx z = std::polar(0.9, 2.0 * pi * k / 128);
    CHECK(std::abs(e[k] - (1.5 * z + 0.5 / z)) < 1e-13);
  }

  const auto sq = FourierCurve::from_families(256, [](int n) { return 1.0 / (double(n) * n); }, nullptr);
  const auto inside = geodesic_evaluate(sq, 0.99);
  for (const auto& z : inside) CHECK(std::isfinite(std::abs(z)));
  CHECK(kind_of([&] { geodesic_evaluate(sq, 1.01); }) == ErrorKind::OutsideAnnulus);

  const auto at_one = geodesic_evaluate(sq, 1.0, 1024);
  const auto original = sq.synthesize(1024);
  for (int k = 0; k < 1024; ++k) CHECK(std::abs(at_one[k] - original[k]) < 1e-10);
}

TEST_CASE("Abel means") {
  auto unit = FourierCurve::zeros(32);
  unit[1] = 1.0;
  CHECK(std::abs(abel_evaluate(unit, 0.9, 0.0) - 0.9) < 1e-14);
  CHECK(std::abs(abel_evaluate(ellipse_curve(), 0.5, pi / 2) - cplx(0.0, 0.5)) < 1e-14);

  const int N = 100000;
  const auto sq = FourierCurve::from_families(N, [](int n) { return 1.0 / (double(n) * n); }, nullptr);
  const double zeta2 = pi * pi / 6.0;
  double prev = 1e9;
  for (double r : {0.9, 0.99, 0.999}) {
    const double err = std::abs(abel_evaluate(sq, r, 0.0) - zeta2);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.01);

  // C^1 data: monotone approach to the boundary values along r = 1 - 2^{-k}
  const auto cube = FourierCurve::from_families(2048, [](int n) { return std::pow(double(n), -3.0); }, [](int n) {
    return 0.5 * std::pow(double(n), -3.0);
  });
  const cplx target = cube.laurent(std::polar(1.0, 0.7));
  prev = 1e9;
  for (int k = 3; k <= 10; ++k) {
    const double err = std::abs(abel_evaluate(cube, 1.0 - std::ldexp(1.0, -k), 0.7) - target);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("length profiles") {
  auto unit = FourierCurve::zeros(32);
  unit[1] = 1.0;
  std::vector<double> radii;
  for (int k = 0; k < 10; ++k) radii.push_back(1.0 - 0.05 * k);
  const auto p = length_profile(unit, radii);
  for (std::size_t k = 0; k < radii.size(); ++k) CHECK(std::abs(p.lambda[k] - 2.0 * pi * radii[k]) < 1e-12);
  for (double d : p.second_differences) CHECK(d > 0.0);

  // perimeter 4 a E(e) of the (2, 1) ellipse
  const double oracle = 8.0 * std::comp_ellint_2(std::sqrt(0.75));
  const auto e = length_profile(ellipse_curve(), {1.0});
  CHECK(std::abs(e.lambda[0] - oracle) < 1e-10);
  CHECK(std::abs(e.lambda[0] - 9.68845) < 1e-5);

  auto cubic = FourierCurve::zeros(32);
  cubic[1] = 1.0;
  cubic[3] = 0.2;
  std::vector<double> rs;
  for (int k = 0; k <= 20; ++k) rs.push_back(0.5 + 0.025 * k);
  const auto c = length_profile(cubic, rs);
  for (double d : c.second_differences) CHECK(d >= -1e-9 * c.lambda.back());
  for (std::size_t k = 1; k < rs.size(); ++k) CHECK(c.lambda[k] - c.lambda[k - 1] >= -1e-10);

  const auto sq = FourierCurve::from_families(256, [](int n) { return 1.0 / (double(n) * n); }, nullptr);
  CHECK(kind_of([&] { length_profile(sq, {0.9, 1.05}); }) == ErrorKind::OutsideAnnulus);
}

TEST_CASE("Riesz convexity on annulus curves") {
  const std::vector<FourierCurve> curves = {
      ellipse_curve(),
      FourierCurve::from_families(256, [](int n) { return std::pow(1.05, -n); },
                                  [](int n) { return 0.5 * std::pow(1.1, -n); }),
  };
  for (auto c : curves) {
    c[1] += 2.0;
    const auto est = estimate_radii(c);
    std::vector<double> rs;
    const double lo = std::max(est.r_inner, 0.05) * 1.01, hi = std::min(est.r_outer, 3.0) * 0.99;
    for (int k = 0; k < 20; ++k) rs.push_back(lo * std::pow(hi / lo, k / 19.0));
    const auto p = length_profile(c, rs);
    double lmax = 0.0;
    for (double l : p.lambda) lmax = std::max(lmax, l);
    for (double d : p.second_differences) CHECK(d >= -1e-9 * lmax);
  }
}

TEST_CASE("second variation of length") {
  const int M = 64;
  const auto circle = sample(M, [](double t) { return std::polar(1.0, t); });
  {
    const auto r = second_variation_length(circle, std::vector<double>(M, 1.0));
    CHECK(std::abs(r.analytic - 2.0 * pi) < 1e-12);
    CHECK(r.rel_err < 1e-4);
    CHECK(r.abs_err <= std::abs(r.fd_estimates.back() - r.analytic));
  }
  {
    std::vector<double> f(M);
    for (int k = 0; k < M; ++k) f[k] = std::cos(2.0 * pi * k / M);
    const auto r = second_variation_length(circle, f);
    CHECK(std::abs(r.analytic - 2.0 * pi) < 1e-12);
    CHECK(r.rel_err < 1e-4);
  }
  {
    const auto ell = sample(256, [](double t) { return cplx(2.0 * std::cos(t), std::sin(t)); });
    CHECK(kind_of([&] { second_variation_length(ell, std::vector<double>(256, 1.0)); }) == ErrorKind::NotArclength);
    const auto arc = resample_arclength(ell);
    const auto r = second_variation_length(arc, std::vector<double>(256, 1.0));
    CHECK(r.analytic > 0.0);
    CHECK(r.rel_err < 1e-4);
    CHECK(r.abs_err <= std::abs(r.fd_estimates.back() - r.analytic));
  }
}

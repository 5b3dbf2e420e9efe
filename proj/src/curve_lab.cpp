#include "trgeo/curve_lab.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "trgeo/ambient.hpp"
#include "trgeo/error.hpp"
#include "trgeo/geodesic_flow.hpp"
#include "trgeo/immersion.hpp"
#include "trgeo/numerics.hpp"
#include "trgeo/spectral.hpp"

namespace trgeo {

namespace {

int next_pow2(int n) {
  int m = 16;
  while (m < n) m *= 2;
  return m;
}

bool radius_allowed(const RadiusEstimate& est, double r) {
  if (r == 1.0) return true;
  return r > est.r_inner && r < est.r_outer;
}

void require_in_annulus(const FourierCurve& curve, double r) {
  if (!(r > 0.0)) fail(ErrorKind::OutsideAnnulus, "radius must be positive");
  const auto est = estimate_radii(curve);
  if (!radius_allowed(est, r))
    fail(ErrorKind::OutsideAnnulus, "radius " + std::to_string(r) + " outside (" + std::to_string(est.r_inner) + ", " +
                                        std::to_string(est.r_outer) + ")");
}

SideFit fit_side(const FourierCurve& curve, int sign, int lo, int hi) {
  SideFit fit;
  std::vector<int> ns;
  std::vector<double> ys;
  for (int n = 1; n <= curve.N; ++n) fit.l1_partial += std::abs(curve[sign * n]);
  for (int n = lo; n <= hi; ++n) {
    const double a = std::abs(curve[sign * n]);
    if (a > kCoefficientFloor) {
      ns.push_back(n);
      ys.push_back(std::log(a));
    }
  }
  fit.points = static_cast<int>(ns.size());
  if (fit.points < 5) {
    fit.absent = true;
    fit.radius = sign > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    return fit;
  }
  Mat a(fit.points, 4);
  Vec y(fit.points);
  for (int k = 0; k < fit.points; ++k) {
    const double ln = std::log(static_cast<double>(ns[k]));
    a(k, 0) = 1.0;
    a(k, 1) = ln;
    a(k, 2) = ln * ln;
    a(k, 3) = ns[k];
    y[k] = ys[k];
  }
  const Vec c = a.colPivHouseholderQr().solve(y);
  fit.c0 = c[0];
  fit.c1 = c[1];
  fit.c2 = c[2];
  fit.slope = c[3];
  fit.residual = std::sqrt((a * c - y).squaredNorm() / fit.points);
  // |a_n| ~ R^{-n} on the positive side and ~ r^n on the negative side
  fit.radius = sign > 0 ? std::exp(-fit.slope) : std::exp(fit.slope);
  return fit;
}

// Trigonometric interpolant of a real periodic function with its antiderivative.
class RealSeries {
 public:
  RealSeries(const std::vector<double>& values) : m_(static_cast<int>(values.size())) {
    std::vector<cplx> z(values.begin(), values.end());
    c_ = spectral::analyze(z, GridTorus::circle(m_));
  }
  double mean() const { return c_[0].real(); }
  double operator()(double theta) const {
    double acc = c_[0].real();
    for (int idx = 1; idx < m_; ++idx) {
      const int k = spectral::wavenumber(idx, m_);
      if (2 * k == m_) {
        acc += c_[idx].real() * std::cos(k * theta);
        continue;
      }
      acc += (c_[idx] * std::polar(1.0, k * theta)).real();
    }
    return acc;
  }
  // int_0^theta (f - mean)
  double antiderivative(double theta) const {
    double acc = 0.0;
    for (int idx = 1; idx < m_; ++idx) {
      const int k = spectral::wavenumber(idx, m_);
      if (2 * k == m_) {
        acc += c_[idx].real() * std::sin(k * theta) / k;
        continue;
      }
      acc += (c_[idx] * (std::polar(1.0, k * theta) - 1.0) / cplx(0.0, k)).real();
    }
    return acc;
  }

 private:
  int m_;
  std::vector<cplx> c_;
};

}  // namespace

FourierCurve FourierCurve::zeros(int N) {
  if (N < 1) fail(ErrorKind::InvalidArgument, "truncation N must be positive");
  FourierCurve c;
  c.N = N;
  c.coeffs.assign(static_cast<std::size_t>(2 * N + 1), 0.0);
  return c;
}

FourierCurve FourierCurve::from_families(int N, const std::function<cplx(int)>& pos, const std::function<cplx(int)>& neg,
                                         cplx a0) {
  auto c = zeros(N);
  c[0] = a0;
  for (int n = 1; n <= N; ++n) {
    if (pos) c[n] = pos(n);
    if (neg) c[-n] = neg(n);
  }
  return c;
}

std::vector<cplx> FourierCurve::synthesize(int M) const {
  if (!is_power_of_two(M) || M <= 2 * N) fail(ErrorKind::InvalidArgument, "synthesis needs a power of two M > 2N");
  std::vector<cplx> bins(static_cast<std::size_t>(M), 0.0);
  for (int n = -N; n <= N; ++n) bins[static_cast<std::size_t>((n + M) % M)] = (*this)[n];
  return spectral::synthesize(bins, GridTorus::circle(M));
}

cplx FourierCurve::laurent(cplx z) const {
  cplx acc = 0.0;
  for (int n = -N; n <= N; ++n) acc += (*this)[n] * std::pow(z, n);
  return acc;
}

cplx FourierCurve::laurent_derivative(cplx z) const {
  cplx acc = 0.0;
  for (int n = -N; n <= N; ++n)
    if (n != 0) acc += static_cast<double>(n) * (*this)[n] * std::pow(z, n - 1);
  return acc;
}

FourierCurve fourier_analyze(const std::vector<cplx>& samples, int N) {
  const int M = static_cast<int>(samples.size());
  if (!is_power_of_two(M) || M < 16) fail(ErrorKind::InvalidArgument, "sample count must be a power of two >= 16");
  if (M < 4 * N) fail(ErrorKind::InvalidArgument, "need at least 4N samples");
  const auto raw = spectral::analyze(samples, GridTorus::circle(M));
  auto curve = FourierCurve::zeros(N);
  CompensatedSum total, tail, sample_energy;
  for (int idx = 0; idx < M; ++idx) {
    const int n = spectral::wavenumber(idx, M);
    const double e = std::norm(raw[idx]);
    total.add(e);
    if (std::abs(n) > N)
      tail.add(e);
    else
      curve[n] = raw[idx];
  }
  for (const auto& z : samples) sample_energy.add(std::norm(z));
  if (tail.value() > 1e-8 * total.value())
    fail(ErrorKind::AliasingDetected, "spectral tail holds " + std::to_string(tail.value() / total.value()) +
                                          " of the energy");
  curve.parseval_residual = std::abs(sample_energy.value() / M - total.value());
  return curve;
}

RadiusEstimate estimate_radii(const FourierCurve& curve, std::pair<int, int> window) {
  int lo = window.first, hi = window.second;
  if (lo == 0 && hi == 0) {
    lo = curve.N / 2;
    hi = curve.N;
  }
  if (lo < curve.N / 2 || hi > curve.N || lo >= hi) fail(ErrorKind::InvalidArgument, "tail window must lie in [N/2, N]");
  RadiusEstimate est;
  est.outer = fit_side(curve, +1, lo, hi);
  est.inner = fit_side(curve, -1, lo, hi);
  est.r_outer = est.outer.radius;
  est.r_inner = est.inner.radius;
  return est;
}

std::string to_string(DirectionKind k) {
  switch (k) {
    case DirectionKind::GeodesicAnnulus: return "GeodesicAnnulus";
    case DirectionKind::RayOnly: return "RayOnly";
    case DirectionKind::NoRay: return "NoRay";
  }
  return "?";
}

bool l1_convergent(const SideFit& fit) {
  if (fit.absent) return true;
  constexpr double tol = 1e-8;
  if (fit.slope < -tol) return true;
  if (fit.slope > tol) return false;
  if (fit.c2 < -tol) return true;
  if (fit.c2 > tol) return false;
  return fit.c1 < -1.0;
}

DirectionClass classify_direction(const FourierCurve& curve, double margin) {
  DirectionClass out;
  out.evidence = estimate_radii(curve);
  out.outer_l1_convergent = l1_convergent(out.evidence.outer);
  const double ri = out.evidence.r_inner, ro = out.evidence.r_outer;
  if (ri < 1.0 - margin && ro > 1.0 + margin)
    out.kind = DirectionKind::GeodesicAnnulus;
  else if (ri < 1.0 - margin && std::abs(ro - 1.0) <= margin && out.outer_l1_convergent)
    out.kind = DirectionKind::RayOnly;
  else
    out.kind = DirectionKind::NoRay;
  return out;
}

Reparametrization reparametrize_by_field(const std::vector<cplx>& curve, const std::vector<double>& f,
                                         int oversample) {
  const int M = static_cast<int>(curve.size());
  const auto grid = GridTorus::circle(M);
  if (f.size() != curve.size()) fail(ErrorKind::InvalidArgument, "field and curve sample counts differ");
  for (double v : f)
    if (!(v > 0.0)) fail(ErrorKind::FieldNotPositive, "reparametrizing field must be positive");
  if (oversample < 8) fail(ErrorKind::InvalidArgument, "oversampling must be at least 8");
  const RealSeries fs(f);
  std::vector<double> inv(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) inv[k] = 1.0 / f[k];
  Reparametrization out;
  out.R = RealSeries(inv).mean();
  const double ds = kTwoPi * out.R / M;
  const int sub = oversample;
  const double h = ds / sub;
  double theta = 0.0;
  out.theta_of_s.resize(M);
  for (int k = 0; k < M; ++k) {
    out.theta_of_s[k] = theta;
    for (int j = 0; j < sub; ++j) {
      const double k1 = fs(theta);
      const double k2 = fs(theta + 0.5 * h * k1);
      const double k3 = fs(theta + 0.5 * h * k2);
      const double k4 = fs(theta + h * k3);
      theta += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    }
  }
  out.closure_error = std::abs(theta - kTwoPi);
  const spectral::PeriodicInterpolant gamma(curve, grid);
  out.curve_of_s.resize(M);
  for (int k = 0; k < M; ++k) out.curve_of_s[k] = gamma(out.theta_of_s[k]);
  return out;
}

std::vector<cplx> geodesic_evaluate(const FourierCurve& curve, double r, int M) {
  require_in_annulus(curve, r);
  if (M == 0) M = next_pow2(4 * curve.N);
  auto scaled = curve;
  for (int n = -curve.N; n <= curve.N; ++n) scaled[n] *= std::pow(r, n);
  return scaled.synthesize(M);
}

cplx abel_evaluate(const FourierCurve& curve, double r, double theta) {
  if (!(r >= 0.0 && r < 1.0)) fail(ErrorKind::InvalidArgument, "Abel radius must lie in [0, 1)");
  double amax = 0.0;
  for (const auto& a : curve.coeffs) amax = std::max(amax, std::abs(a));
  CompensatedSum re, im;
  re.add(curve[0].real());
  im.add(curve[0].imag());
  double rn = 1.0;
  for (int n = 1; n <= curve.N; ++n) {
    rn *= r;
    const cplx term = rn * (curve[n] * std::polar(1.0, n * theta) + curve[-n] * std::polar(1.0, -n * theta));
    re.add(term.real());
    im.add(term.imag());
    // remaining terms are bounded by 2 amax r^{n+1} / (1 - r)
    if (2.0 * amax * rn * r / (1.0 - r) < 1e-12) break;
  }
  return {re.value(), im.value()};
}

LengthProfile length_profile(const FourierCurve& curve, const std::vector<double>& radii) {
  if (radii.size() < 1) fail(ErrorKind::InvalidArgument, "length profile needs radii");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if ((radii[k] - radii[k - 1]) * (radii[1] - radii[0]) <= 0.0)
      fail(ErrorKind::InvalidArgument, "radii must be strictly monotone");
  for (double r : radii) require_in_annulus(curve, r);
  const int M = next_pow2(std::max(8 * curve.N, 1024));
  LengthProfile out;
  out.radii = radii;
  for (double r : radii) {
    // z g'(z) on |z| = r has coefficients n a_n r^n
    auto d = curve;
    for (int n = -curve.N; n <= curve.N; ++n) d[n] *= static_cast<double>(n) * std::pow(r, n);
    const auto v = d.synthesize(M);
    CompensatedSum s;
    for (const auto& z : v) s.add(std::abs(z));
    out.t.push_back(-std::log(r));
    out.lambda.push_back(s.value() * kTwoPi / M);
  }
  for (std::size_t k = 1; k + 1 < radii.size(); ++k) {
    const double hm = out.t[k] - out.t[k - 1], hp = out.t[k + 1] - out.t[k];
    const double hbar = 0.5 * (hm + hp);
    // divided second difference scaled by the mean step; equals the plain
    // second difference on uniform grids
    const double dd = 2.0 * ((out.lambda[k + 1] - out.lambda[k]) / hp - (out.lambda[k] - out.lambda[k - 1]) / hm) /
                      (hp + hm);
    out.second_differences.push_back(dd * hbar * hbar);
  }
  return out;
}

std::vector<cplx> resample_arclength(const std::vector<cplx>& samples, int M) {
  const int M0 = static_cast<int>(samples.size());
  if (M == 0) M = M0;
  const auto grid = GridTorus::circle(M0);
  const auto d = spectral::derivative(std::span<const cplx>(samples), grid, 1, 0);
  std::vector<double> speed(M0);
  for (int k = 0; k < M0; ++k) speed[k] = std::abs(d[k]);
  const RealSeries sp(speed);
  const double c = sp.mean();
  const double length = kTwoPi * c;
  const spectral::PeriodicInterpolant gamma(samples, grid);
  std::vector<cplx> out(M);
  double theta = 0.0;
  for (int j = 0; j < M; ++j) {
    const double target = length * j / M;
    // Newton on s(theta) = c theta + antiderivative(theta)
    for (int it = 0; it < 50; ++it) {
      const double s = c * theta + sp.antiderivative(theta);
      const double step = (s - target) / sp(theta);
      theta -= step;
      if (std::abs(step) < 1e-15) break;
    }
    out[j] = gamma(theta);
  }
  return out;
}

SecondVariationLength second_variation_length(const std::vector<cplx>& arclength_curve, const std::vector<double>& f) {
  const int M = static_cast<int>(arclength_curve.size());
  const auto grid = GridTorus::circle(M);
  if (f.size() != arclength_curve.size()) fail(ErrorKind::InvalidArgument, "field and curve sample counts differ");
  const auto d1 = spectral::derivative(std::span<const cplx>(arclength_curve), grid, 1, 0);
  const auto d2 = spectral::derivative(std::span<const cplx>(arclength_curve), grid, 1, 0, 2);
  double c = 0.0;
  for (const auto& v : d1) c += std::abs(v) / M;
  for (const auto& v : d1)
    if (std::abs(std::abs(v) - c) > 1e-8 * c) fail(ErrorKind::NotArclength, "curve is not at constant speed");
  const auto df = spectral::derivative(std::span<const double>(f), grid, 1, 0);

  SecondVariationLength out;
  CompensatedSum acc;
  for (int k = 0; k < M; ++k) {
    const double speed = std::abs(d1[k]);
    const double kappa = (d2[k] * std::conj(d1[k])).imag() / (speed * speed * speed);
    const double fs = df[k] / c;  // d/ds
    acc.add((fs * fs + f[k] * f[k] * kappa * kappa) * c);
  }
  out.analytic = acc.value() * kTwoPi / M;

  // d iota/dt = i f d iota/ds, i.e. the geodesic of the field (f / c) d/dtheta
  const auto im = Immersion::plane_curve(grid, AmbientChart::flat(1), arclength_curve);
  auto plus = VectorFieldOnL::zero(grid), minus = VectorFieldOnL::zero(grid);
  double fmax = 0.0;
  for (int k = 0; k < M; ++k) {
    plus.components[0][k] = f[k] / c;
    minus.components[0][k] = -f[k] / c;
    fmax = std::max(fmax, std::abs(f[k] / c));
  }
  const std::vector<double> eps = {1e-2, 5e-3, 2.5e-3};
  TimestepOptions opts;
  opts.dt = 0.125 / (M * std::max(fmax, 1e-12));
  for (double e : eps) {
    const auto fp = flow_timestep(im, plus, {0.0, e}, opts);
    const auto fm = flow_timestep(im, minus, {e}, opts);
    const double l0 = total_volumes(fp.immersions[0]).vol_g;
    const double lp = total_volumes(fp.immersions[1]).vol_g;
    const double lm = total_volumes(fm.immersions[0]).vol_g;
    out.fd_estimates.push_back((lp - 2.0 * l0 + lm) / (e * e));
  }
  const auto rich = richardson_central(out.fd_estimates, eps);
  out.fd = rich.value;
  out.richardson_order = rich.order;
  out.exact = rich.exact;
  out.abs_err = std::abs(out.fd - out.analytic);
  out.rel_err = out.abs_err / std::max(std::abs(out.analytic), 1e-300);
  return out;
}

}  // namespace trgeo

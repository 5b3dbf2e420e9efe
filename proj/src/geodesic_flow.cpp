#include "trgeo/geodesic_flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "trgeo/error.hpp"
#include "trgeo/numerics.hpp"
#include "trgeo/spectral.hpp"

namespace trgeo {

namespace {

constexpr cplx kI{0.0, 1.0};

// Complex view of a node-major real field: one complex number per (x, y) pair.
std::vector<cplx> to_complex(const std::vector<double>& p) {
  std::vector<cplx> z(p.size() / 2);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = {p[2 * i], p[2 * i + 1]};
  return z;
}

std::vector<double> to_real(const std::vector<cplx>& z) {
  std::vector<double> p(2 * z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[2 * i] = z[i].real();
    p[2 * i + 1] = z[i].imag();
  }
  return p;
}

// Coefficients per component, zeroing everything below the relative floor so
// rounding noise is not continued.
std::vector<std::vector<cplx>> floored_coefficients(const std::vector<cplx>& z, const GridTorus& grid, int comps) {
  std::vector<std::vector<cplx>> out;
  for (int c = 0; c < comps; ++c) {
    auto coeffs = spectral::analyze(spectral::component(z, grid.node_count(), comps, c), grid);
    double top = 0.0;
    for (const auto& v : coeffs) top = std::max(top, std::abs(v));
    for (auto& v : coeffs)
      if (std::abs(v) <= kCoefficientFloor * top) v = 0.0;
    out.push_back(std::move(coeffs));
  }
  return out;
}

// One-sided radius guard for curves: continuing to |w| = e^{-c t} must stay
// inside the estimated annulus of the Laurent series.
void guard_annulus(const std::vector<cplx>& coeffs, int M, double ct) {
  if (ct == 0.0) return;
  // truncate at the highest retained mode so the tail window sees the data
  int N = 1;
  for (int idx = 0; idx < M; ++idx)
    if (coeffs[idx] != 0.0) N = std::max(N, std::abs(spectral::wavenumber(idx, M)));
  N = std::min(N, M / 2 - 1);
  auto curve = FourierCurve::zeros(N);
  for (int idx = 0; idx < M; ++idx) {
    const int n = spectral::wavenumber(idx, M);
    if (std::abs(n) <= N) curve[n] = coeffs[idx];
  }
  const auto est = estimate_radii(curve);
  const double r = std::exp(-ct);
  if (ct > 0.0 && r <= est.r_inner)
    fail(ErrorKind::AmplificationExceeded, "continuation to |z| = " + std::to_string(r) +
                                               " crosses the inner radius " + std::to_string(est.r_inner));
  if (ct < 0.0 && r >= est.r_outer)
    fail(ErrorKind::AmplificationExceeded, "continuation to |z| = " + std::to_string(r) +
                                               " crosses the outer radius " + std::to_string(est.r_outer));
}

struct FieldShape {
  bool coordinate = false;
  int axis = 0;
  double c = 0.0;
};

FieldShape classify_field(const VectorFieldOnL& x) {
  FieldShape s;
  const int n = x.grid.dim;
  int active = -1;
  for (int k = 0; k < n; ++k) {
    const auto& comp = x.components[k];
    const bool zero = std::all_of(comp.begin(), comp.end(), [](double v) { return v == 0.0; });
    if (zero) continue;
    if (active >= 0) return s;  // two active components
    active = k;
  }
  if (active < 0) fail(ErrorKind::UnsupportedField, "zero field");
  const auto& comp = x.components[active];
  const bool constant = std::all_of(comp.begin(), comp.end(), [&](double v) { return v == comp[0]; });
  if (constant) {
    s.coordinate = true;
    s.axis = active;
    s.c = comp[0];
  }
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

FlowResult flow_coordinate(const Immersion& im, const FieldShape& shape, const std::vector<double>& times) {
  const auto& grid = im.grid();
  const int comps = im.chart()->complex_dim();
  const std::size_t nodes = grid.node_count();
  const auto coeffs = floored_coefficients(to_complex(im.periodic()), grid, comps);
  const int n_axis = grid.sizes[shape.axis];
  const Mat& w = im.winding();

  FlowResult out;
  out.scheme = FlowScheme::Spectral;
  for (double t : times) {
    if (comps == 1) guard_annulus(coeffs[0], n_axis, shape.c * t);
    std::vector<cplx> z(nodes * comps), dz(nodes * comps);
    for (int c = 0; c < comps; ++c) {
      std::vector<cplx> scaled(nodes), rate(nodes);
      for (std::size_t node = 0; node < nodes; ++node) {
        if (coeffs[c][node] == 0.0) continue;
        const int k = spectral::wavenumber(grid.multi_index(node)[shape.axis], n_axis);
        const double factor = std::exp(-shape.c * k * t);
        out.amplification = std::max(out.amplification, factor);
        scaled[node] = coeffs[c][node] * factor;
        rate[node] = -shape.c * k * scaled[node];
      }
      if (out.amplification > kAmpMax)
        fail(ErrorKind::AmplificationExceeded, "mode growth " + std::to_string(out.amplification) + " at t = " +
                                                   std::to_string(t));
      const auto v = spectral::synthesize(scaled, grid);
      const auto dv = spectral::synthesize(rate, grid);
      // the winding part moves rigidly by c t J W_axis
      const cplx drift = shape.c * kI * cplx(w(2 * c, shape.axis), w(2 * c + 1, shape.axis));
      for (std::size_t node = 0; node < nodes; ++node) {
        z[node * comps + c] = v[node] + drift * t;
        dz[node * comps + c] = dv[node] + drift;
      }
    }
    Immersion next(grid, im.chart(), to_real(z), w);
    // d iota/dt against J iota_* X
    const auto jx = next.j_push_forward(VectorFieldOnL::coordinate(grid, shape.axis, shape.c));
    out.geodesic_residual = std::max(out.geodesic_residual, max_abs_diff(to_real(dz), jx));
    out.times.push_back(t);
    out.immersions.push_back(std::move(next));
  }
  return out;
}

FlowResult flow_reparametrized(const Immersion& im, const VectorFieldOnL& x, const std::vector<double>& times) {
  const auto& grid = im.grid();
  const int M = grid.sizes[0];
  std::vector<double> f = x.components[0];
  const double sign = f[0] > 0.0 ? 1.0 : -1.0;
  for (double& v : f) {
    v *= sign;
    if (!(v > 0.0)) fail(ErrorKind::UnsupportedField, "curve fields must not vanish");
  }
  const auto curve = to_complex(im.periodic());
  const auto rep = reparametrize_by_field(curve, f);
  // in s the field is d/ds, the map is holomorphic in s + i t, period 2 pi R
  const auto sgrid = GridTorus::circle(M);
  auto b = floored_coefficients(rep.curve_of_s, sgrid, 1)[0];

  // phi_k = s(theta_k) / R, with s(theta) = int_0^theta 1/f
  std::vector<cplx> inv(M);
  for (int k = 0; k < M; ++k) inv[k] = 1.0 / f[k];
  const auto ic = spectral::analyze(inv, sgrid);
  std::vector<double> phi(M);
  for (int k = 0; k < M; ++k) {
    const double th = grid.angle(0, k);
    double s = ic[0].real() * th;
    for (int idx = 1; idx < M; ++idx) {
      const int m = spectral::wavenumber(idx, M);
      if (2 * m == M) {
        s += ic[idx].real() * std::sin(m * th) / m;
        continue;
      }
      s += (ic[idx] * (std::polar(1.0, m * th) - 1.0) / cplx(0.0, m)).real();
    }
    phi[k] = s / rep.R;
  }

  FlowResult out;
  out.scheme = FlowScheme::Spectral;
  for (double t : times) {
    const double ct = sign * t / rep.R;
    guard_annulus(b, M, ct);
    std::vector<cplx> scaled(M, 0.0), rate(M, 0.0);
    for (int idx = 0; idx < M; ++idx) {
      if (b[idx] == 0.0) continue;
      const int m = spectral::wavenumber(idx, M);
      const double factor = std::exp(-m * ct);
      out.amplification = std::max(out.amplification, factor);
      scaled[idx] = b[idx] * factor;
      rate[idx] = -m * (sign / rep.R) * scaled[idx];
    }
    if (out.amplification > kAmpMax)
      fail(ErrorKind::AmplificationExceeded, "mode growth " + std::to_string(out.amplification));
    const spectral::PeriodicInterpolant g(spectral::synthesize(scaled, sgrid), sgrid);
    const spectral::PeriodicInterpolant dg(spectral::synthesize(rate, sgrid), sgrid);
    std::vector<cplx> z(M), dz(M);
    for (int k = 0; k < M; ++k) {
      z[k] = g(phi[k]);
      dz[k] = dg(phi[k]);
    }
    Immersion next(grid, im.chart(), to_real(z), im.winding());
    const auto jx = next.j_push_forward(x);
    out.geodesic_residual = std::max(out.geodesic_residual, max_abs_diff(to_real(dz), jx));
    out.times.push_back(t);
    out.immersions.push_back(std::move(next));
  }
  return out;
}

// Band-limits a real node-major field: modes beyond the cutoff along any axis
// are dropped. Returns the energy share of the upper half of the kept band.
double filter_field(std::vector<double>& p, const GridTorus& grid, int comps, double fraction) {
  auto z = to_complex(p);
  const std::size_t nodes = grid.node_count();
  CompensatedSum total, tail;
  for (int c = 0; c < comps; ++c) {
    auto coeffs = spectral::analyze(spectral::component(z, nodes, comps, c), grid);
    for (std::size_t node = 0; node < nodes; ++node) {
      const auto mi = grid.multi_index(node);
      double level = 0.0;  // largest |k_axis| / (N_axis / 2)
      for (int axis = 0; axis < grid.dim; ++axis)
        level = std::max(level, std::abs(spectral::wavenumber(mi[axis], grid.sizes[axis])) / (0.5 * grid.sizes[axis]));
      if (level > fraction) {
        coeffs[node] = 0.0;
        continue;
      }
      if (node == 0) continue;  // the mean is not part of the shape
      const double e = std::norm(coeffs[node]);
      total.add(e);
      if (level > 0.5 * fraction) tail.add(e);
    }
    const auto v = spectral::synthesize(coeffs, grid);
    for (std::size_t node = 0; node < nodes; ++node) z[node * comps + c] = v[node];
  }
  p = to_real(z);
  const double tot = total.value();
  return tot > 0.0 ? tail.value() / tot : 0.0;
}

double shape_energy(const std::vector<double>& p, const GridTorus& grid, int comps) {
  const auto z = to_complex(p);
  CompensatedSum e;
  for (int c = 0; c < comps; ++c) {
    const auto coeffs = spectral::analyze(spectral::component(z, grid.node_count(), comps, c), grid);
    for (std::size_t node = 1; node < coeffs.size(); ++node) e.add(std::norm(coeffs[node]));
  }
  return e.value();
}

// Lagrange derivative weights at times[i] through the given stencil.
std::vector<double> lagrange_derivative(const std::vector<double>& t, std::size_t i, const std::vector<std::size_t>& st) {
  std::vector<double> w(st.size(), 0.0);
  for (std::size_t a = 0; a < st.size(); ++a) {
    const std::size_t j = st[a];
    if (j == i) {
      for (std::size_t m : st)
        if (m != i) w[a] += 1.0 / (t[i] - t[m]);
      continue;
    }
    double v = 1.0 / (t[j] - t[i]);
    for (std::size_t m : st)
      if (m != i && m != j) v *= (t[i] - t[m]) / (t[j] - t[m]);
    w[a] = v;
  }
  return w;
}

}  // namespace

std::string to_string(FlowScheme s) { return s == FlowScheme::Spectral ? "spectral" : "timestep"; }

FlowResult flow_spectral(const Immersion& im, const VectorFieldOnL& x, const std::vector<double>& times) {
  if (!(x.grid == im.grid())) fail(ErrorKind::InvalidArgument, "field and immersion grids differ");
  const auto shape = classify_field(x);
  if (shape.coordinate) return flow_coordinate(im, shape, times);
  if (im.dim() == 1 && im.winding().isZero(0.0)) return flow_reparametrized(im, x, times);
  fail(ErrorKind::UnsupportedField, "spectral flow needs c d/dtheta_k, or a nonvanishing field on a closed curve");
}

FlowResult flow_timestep(const Immersion& im, const VectorFieldOnL& x, const std::vector<double>& times,
                         const TimestepOptions& opts) {
  const auto& grid = im.grid();
  if (!(x.grid == grid)) fail(ErrorKind::InvalidArgument, "field and immersion grids differ");
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] < 0.0 || (k > 0 && times[k] <= times[k - 1]))
      fail(ErrorKind::InvalidArgument, "timestep output times must be non-negative and increasing");
  const int dim = im.ambient_dim();
  const int comps = im.chart()->complex_dim();
  const std::size_t nodes = grid.node_count();
  double xmax = 0.0;
  for (const auto& comp : x.components)
    for (double v : comp) xmax = std::max(xmax, std::abs(v));
  const int nmax = std::max(grid.sizes[0], grid.dim == 2 ? grid.sizes[1] : 0);
  const double limit = 0.5 / (nmax * std::max(xmax, 1e-300));
  double dt = opts.dt > 0.0 ? opts.dt : 0.5 * limit;
  if (dt > limit * (1.0 + 1e-12)) fail(ErrorKind::StepTooLarge, "dt * N * max|X| exceeds 0.5");
  const Mat& j = im.chart()->complex_structure();
  const Mat& w = im.winding();

  auto rhs = [&](const std::vector<double>& p) {
    std::vector<std::vector<double>> d;
    for (int axis = 0; axis < grid.dim; ++axis) d.push_back(spectral::derivative(std::span<const double>(p), grid, dim, axis));
    std::vector<double> out(p.size());
    for (std::size_t node = 0; node < nodes; ++node) {
      Vec v = Vec::Zero(dim);
      for (int axis = 0; axis < grid.dim; ++axis) {
        const double xk = x.components[axis][node];
        if (xk == 0.0) continue;
        v += xk * (w.col(axis) + Eigen::Map<const Vec>(d[axis].data() + node * dim, dim));
      }
      const Vec jv = j * v;
      std::copy(jv.data(), jv.data() + dim, out.begin() + static_cast<std::ptrdiff_t>(node * dim));
    }
    return out;
  };

  FlowResult out;
  out.scheme = FlowScheme::TimeStep;
  std::vector<double> p = im.periodic();
  double tail = filter_field(p, grid, comps, opts.filter);
  const double e0 = shape_energy(p, grid, comps);
  double t = 0.0;
  for (double target : times) {
    while (t < target) {
      const double h = std::min(dt, target - t);
      const auto k1 = rhs(p);
      std::vector<double> s(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) s[i] = p[i] + 0.5 * h * k1[i];
      const auto k2 = rhs(s);
      for (std::size_t i = 0; i < p.size(); ++i) s[i] = p[i] + 0.5 * h * k2[i];
      const auto k3 = rhs(s);
      for (std::size_t i = 0; i < p.size(); ++i) s[i] = p[i] + h * k3[i];
      const auto k4 = rhs(s);
      for (std::size_t i = 0; i < p.size(); ++i) p[i] += h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
      t = (target - t <= dt) ? target : t + h;
      tail = filter_field(p, grid, comps, opts.filter);
      const double e = shape_energy(p, grid, comps);
      if (!std::isfinite(e) || tail > opts.tail_abort)
        fail(ErrorKind::BlowUpDetected, "spectral tail share " + std::to_string(tail) + " at t = " + std::to_string(t));
      if (e0 > 0.0) out.amplification = std::max(out.amplification, std::sqrt(e / e0));
    }
    if (tail > opts.tail_abort) fail(ErrorKind::BlowUpDetected, "initial data is not resolved by the filter");
    out.times.push_back(target);
    out.immersions.emplace_back(grid, im.chart(), p, w);
  }
  return out;
}

double commutator_check(const FlowResult& flow, const VectorFieldOnL& x) {
  const std::size_t m = flow.times.size();
  if (m < 3) fail(ErrorKind::InvalidArgument, "commutator check needs at least three time samples");
  const auto& grid = flow.immersions[0].grid();
  const int dim = flow.immersions[0].ambient_dim();
  const std::size_t nodes = grid.node_count();
  std::vector<std::vector<double>> a;
  for (const auto& im : flow.immersions) a.push_back(im.push_forward(x));
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    // nearest (up to) five samples
    const std::size_t width = std::min<std::size_t>(5, m);
    std::size_t lo = i >= width / 2 ? i - width / 2 : 0;
    lo = std::min(lo, m - width);
    std::vector<std::size_t> st;
    for (std::size_t k = lo; k < lo + width; ++k) st.push_back(k);
    const auto wts = lagrange_derivative(flow.times, i, st);
    const auto jx = flow.immersions[i].j_push_forward(x);
    std::vector<std::vector<double>> d;
    for (int axis = 0; axis < grid.dim; ++axis) d.push_back(spectral::derivative(std::span<const double>(jx), grid, dim, axis));
    for (std::size_t node = 0; node < nodes; ++node)
      for (int c = 0; c < dim; ++c) {
        double dt = 0.0;
        for (std::size_t q = 0; q < st.size(); ++q) dt += wts[q] * a[st[q]][node * dim + c];
        double dx = 0.0;
        for (int axis = 0; axis < grid.dim; ++axis) dx += x.components[axis][node] * d[axis][node * dim + c];
        worst = std::max(worst, std::abs(dt - dx));
      }
  }
  return worst;
}

bool nested(const FourierCurve& outer, const FourierCurve& inner) {
  constexpr int M = 1024;
  const auto a = outer.synthesize(M);
  const auto b = inner.synthesize(M);
  for (const auto& p : b) {
    double turn = 0.0;
    for (int k = 0; k < M; ++k) {
      const cplx u = a[k] - p, v = a[(k + 1) % M] - p;
      if (std::abs(u) < 1e-12) return false;
      turn += std::arg(v / u);
    }
    if (std::abs(turn / kTwoPi - 1.0) > 1e-6) return false;
  }
  // inner must also wind once around itself (non-degenerate, anticlockwise)
  double area = 0.0;
  for (int k = 0; k < M; ++k) area += (std::conj(b[k]) * b[(k + 1) % M]).imag();
  return area > 0.0;
}

BvpResult solve_bvp_annulus(const FourierCurve& outer, const FourierCurve& inner, int modes, int max_iter) {
  if (modes < 1) fail(ErrorKind::InvalidArgument, "need at least one Laurent mode");
  if (!nested(outer, inner)) fail(ErrorKind::NotNested, "inner curve is not strictly inside the outer curve");
  const int K = modes;
  const int M = 4 * K + 8;         // collocation angles per boundary
  const int nc = 2 * (2 * K + 1);  // real unknowns of the coefficients
  const int n_unknown = nc + 1 + (M - 1) + M;
  const int n_res = 4 * M;
  std::vector<double> alpha(M);
  for (int j = 0; j < M; ++j) alpha[j] = kTwoPi * j / M;

  auto area = [](const FourierCurve& c) {
    double s = 0.0;
    for (int n = -c.N; n <= c.N; ++n) s += n * std::norm(c[n]);
    return kPi * s;
  };
  // initial guess: rho from the area ratio, coefficients fitted to both
  // boundaries mode by mode, uniform correspondence
  Vec x = Vec::Zero(n_unknown);
  const double rho0 = std::sqrt(area(inner) / area(outer));
  for (int n = -K; n <= K; ++n) {
    const cplx a0 = std::abs(n) <= outer.N ? outer[n] : 0.0;
    const cplx a1 = std::abs(n) <= inner.N ? inner[n] : 0.0;
    const double rn = std::pow(rho0, n);
    const cplx c = (a0 + rn * a1) / (1.0 + rn * rn);
    x[n + K] = c.real();
    x[2 * K + 1 + n + K] = c.imag();
  }
  x[nc] = rho0;
  for (int j = 1; j < M; ++j) x[nc + j] = alpha[j];
  for (int j = 0; j < M; ++j) x[nc + M + j] = alpha[j];

  auto coeff = [&](const Vec& v, int n) { return cplx(v[n + K], v[2 * K + 1 + n + K]); };
  auto phi_of = [&](const Vec& v, int j) { return j == 0 ? 0.0 : v[nc + j]; };
  auto residual = [&](const Vec& v) {
    Vec r(n_res);
    const double rho = v[nc];
    for (int j = 0; j < M; ++j) {
      cplx g1 = 0.0, g2 = 0.0;
      for (int n = -K; n <= K; ++n) {
        const cplx e = std::polar(1.0, n * alpha[j]);
        g1 += coeff(v, n) * e;
        g2 += coeff(v, n) * std::pow(rho, n) * e;
      }
      const cplx d1 = g1 - outer.laurent(std::polar(1.0, phi_of(v, j)));
      const cplx d2 = g2 - inner.laurent(std::polar(1.0, v[nc + M + j]));
      r[4 * j] = d1.real();
      r[4 * j + 1] = d1.imag();
      r[4 * j + 2] = d2.real();
      r[4 * j + 3] = d2.imag();
    }
    return r;
  };
  auto jacobian = [&](const Vec& v) {
    Mat jac = Mat::Zero(n_res, n_unknown);
    const double rho = v[nc];
    for (int j = 0; j < M; ++j) {
      cplx drho = 0.0;
      for (int n = -K; n <= K; ++n) {
        const cplx e = std::polar(1.0, n * alpha[j]);
        const double rn = std::pow(rho, n);
        const int re = n + K, im = 2 * K + 1 + n + K;
        jac(4 * j, re) = e.real();
        jac(4 * j + 1, re) = e.imag();
        jac(4 * j, im) = -e.imag();
        jac(4 * j + 1, im) = e.real();
        jac(4 * j + 2, re) = rn * e.real();
        jac(4 * j + 3, re) = rn * e.imag();
        jac(4 * j + 2, im) = -rn * e.imag();
        jac(4 * j + 3, im) = rn * e.real();
        if (n != 0) drho += coeff(v, n) * (n * std::pow(rho, n - 1)) * e;
      }
      jac(4 * j + 2, nc) = drho.real();
      jac(4 * j + 3, nc) = drho.imag();
      if (j > 0) {
        const cplx w = std::polar(1.0, phi_of(v, j));
        const cplx dg = -kI * w * outer.laurent_derivative(w);
        jac(4 * j, nc + j) = dg.real();
        jac(4 * j + 1, nc + j) = dg.imag();
      }
      const cplx w = std::polar(1.0, v[nc + M + j]);
      const cplx dg = -kI * w * inner.laurent_derivative(w);
      jac(4 * j + 2, nc + M + j) = dg.real();
      jac(4 * j + 3, nc + M + j) = dg.imag();
    }
    return jac;
  };

  BvpResult out;
  Vec r = residual(x);
  double obj = r.squaredNorm();
  out.history.push_back(obj);
  int it = 0;
  for (; it < max_iter; ++it) {
    const Mat jac = jacobian(x);
    const Vec step = jac.colPivHouseholderQr().solve(-r);
    double lam = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, lam *= 0.5) {
      const Vec trial = x + lam * step;
      if (!(trial[nc] > 0.0 && trial[nc] < 1.0)) continue;
      const Vec rt = residual(trial);
      const double ot = rt.squaredNorm();
      if (ot < obj) {
        x = trial;
        r = rt;
        obj = ot;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    out.history.push_back(obj);
    if ((lam * step).norm() < 1e-14 * (1.0 + x.norm())) break;
  }
  out.iterations = it;
  out.rho = x[nc];
  out.g = FourierCurve::zeros(K);
  for (int n = -K; n <= K; ++n) out.g[n] = coeff(x, n);
  for (int j = 0; j < M; ++j) {
    out.outer_misfit = std::max(out.outer_misfit, std::hypot(r[4 * j], r[4 * j + 1]));
    out.inner_misfit = std::max(out.inner_misfit, std::hypot(r[4 * j + 2], r[4 * j + 3]));
  }
  out.converged = std::max(out.outer_misfit, out.inner_misfit) < 1e-8;
  return out;
}

double uniqueness_compare(const Immersion& im, const VectorFieldOnL& x, double t_final) {
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(t_final * k / 10.0);
  const auto a = flow_spectral(im, x, times);
  const auto b = flow_timestep(im, x, times);
  double worst = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t node = 0; node < im.node_count(); ++node)
      worst = std::max(worst, (a.immersions[k].point(node) - b.immersions[k].point(node)).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace trgeo

#include "trgeo/variation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "trgeo/error.hpp"
#include "trgeo/numerics.hpp"
#include "trgeo/spectral.hpp"

namespace trgeo {

namespace {

double vol_j(const Immersion& im) { return total_volumes(im).vol_j; }

// Rounding level of a difference quotient of volumes of size v over step^power.
double quotient_noise(double v, const std::vector<double>& eps, int power) {
  const double h = *std::min_element(eps.begin(), eps.end());
  return 64.0 * std::numeric_limits<double>::epsilon() * std::abs(v) / std::pow(h, power);
}

std::vector<double> densities(const Immersion& im) {
  std::vector<double> mu(im.node_count());
  for (std::size_t node = 0; node < mu.size(); ++node) mu[node] = im.volj_density(node);
  return mu;
}

double integrate(const GridTorus& grid, const std::vector<double>& per_node) {
  CompensatedSum s;
  for (double v : per_node) s.add(v);
  return s.value() * grid.cell_area();
}

Vec node_vec(const std::vector<double>& field, std::size_t node, int dim) {
  return Eigen::Map<const Vec>(field.data() + node * dim, dim);
}

VectorFieldOnL negated(const VectorFieldOnL& x) {
  auto out = x;
  for (auto& comp : out.components)
    for (double& v : comp) v = -v;
  return out;
}

bool is_coordinate(const VectorFieldOnL& x, int& axis, double& c) {
  axis = -1;
  for (int k = 0; k < x.grid.dim; ++k) {
    const auto& comp = x.components[k];
    const bool zero = std::all_of(comp.begin(), comp.end(), [](double v) { return v == 0.0; });
    if (zero) continue;
    if (axis >= 0) return false;
    axis = k;
  }
  if (axis < 0) {
    axis = 0;
    c = 0.0;
    return true;
  }
  const auto& comp = x.components[axis];
  c = comp[0];
  return std::all_of(comp.begin(), comp.end(), [&](double v) { return v == c; });
}

// Vol_J at flow times +eps and -eps along J iota_* y, choosing the spectral
// scheme when it applies.
std::vector<Immersion> geodesic_samples(const Immersion& im, const VectorFieldOnL& y, const std::vector<double>& eps) {
  try {
    try {
      std::vector<double> times;
      for (double e : eps) times.push_back(e);
      for (double e : eps) times.push_back(-e);
      return flow_spectral(im, y, times).immersions;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnsupportedField) throw;
    }
    std::vector<double> times(eps.rbegin(), eps.rend());
    auto plus = flow_timestep(im, y, times).immersions;
    auto minus = flow_timestep(im, negated(y), times).immersions;
    std::vector<Immersion> out;
    for (std::size_t k = eps.size(); k-- > 0;) out.push_back(plus[k]);
    for (std::size_t k = eps.size(); k-- > 0;) out.push_back(minus[k]);
    return out;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::AmplificationExceeded || e.kind() == ErrorKind::BlowUpDetected ||
        e.kind() == ErrorKind::UnsupportedField || e.kind() == ErrorKind::StepTooLarge)
      fail(ErrorKind::GeodesicUnavailable, std::string("no geodesic in this direction: ") + e.what());
    throw;
  }
}

}  // namespace

void VariationReport::finish(const std::vector<double>& estimates, const std::vector<double>& eps, double scale,
                             double noise) {
  steps = eps;
  fd_estimates = estimates;
  const auto r = richardson_central(estimates, eps, noise);
  fd = r.value;
  richardson_order = r.exact ? std::numeric_limits<double>::infinity() : r.order;
  exact = r.exact;
  abs_err = std::abs(fd - analytic);
  rel_err = abs_err / std::max({std::abs(analytic), scale, std::numeric_limits<double>::min()});
}

FirstVariationFD fd_first_variation(const Immersion& im, const std::vector<double>& z, const std::vector<double>& eps) {
  if (z.size() != im.node_count() * static_cast<std::size_t>(im.ambient_dim()))
    fail(ErrorKind::InvalidArgument, "deformation field has the wrong size");
  FirstVariationFD out;
  const std::size_t nodes = im.node_count();
  std::vector<std::vector<double>> per_node(nodes);
  for (double e : eps) {
    const auto plus = im.displaced(z, e);
    const auto minus = im.displaced(z, -e);
    out.estimates.push_back((vol_j(plus) - vol_j(minus)) / (2.0 * e));
    for (std::size_t node = 0; node < nodes; ++node)
      per_node[node].push_back((plus.volj_density(node) - minus.volj_density(node)) / (2.0 * e));
  }
  const auto r = richardson_central(out.estimates, eps, quotient_noise(vol_j(im), eps, 1));
  out.value = r.value;
  out.exact = r.exact;
  out.richardson_order = r.exact ? std::numeric_limits<double>::infinity() : r.order;
  out.density_derivative.resize(nodes);
  for (std::size_t node = 0; node < nodes; ++node)
    out.density_derivative[node] = richardson_central(per_node[node], eps).value;
  return out;
}

VariationReport check_first_variation(const Immersion& im, const VectorFieldOnL& y) {
  const int dim = im.ambient_dim();
  const auto jy = im.j_push_forward(y);
  const auto hj = h_j_field(im);
  std::vector<double> integrand(im.node_count());
  for (std::size_t node = 0; node < integrand.size(); ++node)
    integrand[node] =
        -node_vec(jy, node, dim).dot(im.metric(node) * node_vec(hj, node, dim)) * im.volj_density(node);
  VariationReport rep;
  rep.context = "first variation along J iota_* Y in chart " + im.chart()->name();
  rep.analytic = integrate(im.grid(), integrand);
  const auto fd = fd_first_variation(im, jy);
  const double v0 = vol_j(im);
  rep.finish(fd.estimates, kVariationSteps, 1e-12 * v0, quotient_noise(v0, kVariationSteps, 1));
  return rep;
}

Immersion tangential_flow(const Immersion& im, const VectorFieldOnL& x, double t) {
  if (!(x.grid == im.grid())) fail(ErrorKind::InvalidArgument, "field and immersion grids differ");
  int axis = 0;
  double c = 0.0;
  if (is_coordinate(x, axis, c)) return c == 0.0 ? im : im.shifted(axis, c * t);

  const auto& grid = im.grid();
  const int n = grid.dim, dim = im.ambient_dim(), comps = dim / 2;
  const std::size_t nodes = grid.node_count();
  std::vector<spectral::PeriodicInterpolant> field, part;
  for (int k = 0; k < n; ++k) {
    std::vector<cplx> z(x.components[k].begin(), x.components[k].end());
    field.emplace_back(z, grid);
  }
  const auto& p = im.periodic();
  for (int c2 = 0; c2 < comps; ++c2) {
    std::vector<cplx> z(nodes);
    for (std::size_t node = 0; node < nodes; ++node) z[node] = {p[node * dim + 2 * c2], p[node * dim + 2 * c2 + 1]};
    part.emplace_back(z, grid);
  }
  auto rate = [&](const std::array<double, 2>& a) {
    std::array<double, 2> r{0.0, 0.0};
    for (int k = 0; k < n; ++k) r[k] = field[k](a[0], a[1]).real();
    return r;
  };
  constexpr int kSub = 8;
  const double h = t / kSub;
  std::vector<double> out(p.size());
  parallel_for(nodes, [&](std::size_t node) {
    const auto a0 = grid.angles(node);
    std::array<double, 2> a{a0[0], n == 2 ? a0[1] : 0.0};
    for (int s = 0; s < kSub; ++s) {
      const auto k1 = rate(a);
      const auto k2 = rate({a[0] + 0.5 * h * k1[0], a[1] + 0.5 * h * k1[1]});
      const auto k3 = rate({a[0] + 0.5 * h * k2[0], a[1] + 0.5 * h * k2[1]});
      const auto k4 = rate({a[0] + h * k3[0], a[1] + h * k3[1]});
      for (int k = 0; k < 2; ++k) a[k] += h * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]) / 6.0;
    }
    Vec shift = Vec::Zero(dim);
    for (int k = 0; k < n; ++k) shift += im.winding().col(k) * (a[k] - a0[k]);
    for (int c2 = 0; c2 < comps; ++c2) {
      const cplx v = part[c2](a[0], a[1]);
      out[node * dim + 2 * c2] = v.real() + shift[2 * c2];
      out[node * dim + 2 * c2 + 1] = v.imag() + shift[2 * c2 + 1];
    }
  });
  return Immersion(grid, im.chart(), std::move(out), im.winding());
}

DensityReport check_density_divergence(const Immersion& im, const VectorFieldOnL& x, const std::vector<double>& eps) {
  const auto& grid = im.grid();
  const std::size_t nodes = im.node_count();
  const auto mu = densities(im);
  const double mu_max = *std::max_element(mu.begin(), mu.end());

  DensityReport out;
  // d_k(mu X^k) and d_k(X^k d_j(mu X^j))
  const auto div1 = weighted_divergence(grid, mu, x);
  out.first_analytic.resize(nodes);
  for (std::size_t node = 0; node < nodes; ++node) out.first_analytic[node] = mu[node] * div1[node];
  auto flux = x;
  for (auto& comp : flux.components)
    for (std::size_t node = 0; node < nodes; ++node) comp[node] *= out.first_analytic[node];
  out.second_analytic = weighted_divergence(grid, std::vector<double>(nodes, 1.0), flux);
  out.total_second = integrate(grid, out.second_analytic);

  std::vector<std::vector<double>> d1(nodes), d2(nodes);
  for (double e : eps) {
    const auto plus = densities(tangential_flow(im, x, e));
    const auto minus = densities(tangential_flow(im, x, -e));
    for (std::size_t node = 0; node < nodes; ++node) {
      d1[node].push_back((plus[node] - minus[node]) / (2.0 * e));
      d2[node].push_back((plus[node] - 2.0 * mu[node] + minus[node]) / (e * e));
    }
  }
  auto worst = [&](const std::vector<std::vector<double>>& est, const std::vector<double>& analytic,
                   const std::string& what) {
    VariationReport best;
    best.rel_err = -1.0;
    for (std::size_t node = 0; node < nodes; ++node) {
      VariationReport r;
      r.context = what + " at node " + std::to_string(node);
      r.analytic = analytic[node];
      r.finish(est[node], eps);
      r.rel_err = r.abs_err / mu_max;
      if (r.rel_err > best.rel_err) best = r;
    }
    return best;
  };
  out.first = worst(d1, out.first_analytic, "first density derivative");
  out.second = worst(d2, out.second_analytic, "second density derivative");
  return out;
}

std::vector<double> kahler_second_variation_integrand(const Immersion& im, const VectorFieldOnL& y) {
  const int dim = im.ambient_dim();
  const std::size_t nodes = im.node_count();
  const auto mu = densities(im);
  const auto div = weighted_divergence(im.grid(), mu, y);  // Div(rho Y) / rho
  const auto jy = im.j_push_forward(y);
  const auto py = im.push_forward(y);
  const auto hj = h_j_field(im);
  std::vector<double> out(nodes);
  parallel_for(nodes, [&](std::size_t node) {
    const double gh = node_vec(jy, node, dim).dot(im.metric(node) * node_vec(hj, node, dim));
    double ric = 0.0;
    if (!im.chart()->is_flat()) {
      const Vec p = im.point(node);
      const Vec v = node_vec(py, node, dim);
      ric = v.dot(ricci_at(*im.chart(), std::span<const double>(p.data(), dim)) * v);
    }
    out[node] = div[node] * div[node] + gh * gh - ric;
  });
  return out;
}

VariationReport check_second_variation_kahler(const Immersion& im, const VectorFieldOnL& y) {
  VariationReport rep;
  rep.context = "second variation along the geodesic of Y in chart " + im.chart()->name();
  const auto f = kahler_second_variation_integrand(im, y);
  std::vector<double> weighted(f.size());
  for (std::size_t node = 0; node < f.size(); ++node) weighted[node] = f[node] * im.volj_density(node);
  rep.analytic = integrate(im.grid(), weighted);

  const auto samples = geodesic_samples(im, y, kVariationSteps);
  const double v0 = vol_j(im);
  const std::size_t m = kVariationSteps.size();
  std::vector<double> est;
  for (std::size_t k = 0; k < m; ++k) {
    const double e = kVariationSteps[k];
    est.push_back((vol_j(samples[k]) - 2.0 * v0 + vol_j(samples[m + k])) / (e * e));
  }
  rep.finish(est, kVariationSteps, 1e-12 * v0, quotient_noise(v0, kVariationSteps, 2));
  return rep;
}

double mixed_second_variation_flat(const Immersion& im, const std::vector<double>& w, const std::vector<double>& z) {
  if (!im.chart()->is_flat()) fail(ErrorKind::InvalidArgument, "mixed second variation needs a flat chart");
  const auto& grid = im.grid();
  const int n = grid.dim, dim = im.ambient_dim();
  const std::size_t nodes = im.node_count();
  const Mat& j = im.chart()->complex_structure();
  std::vector<std::vector<double>> dw, dz;
  for (int k = 0; k < n; ++k) {
    dw.push_back(spectral::derivative(std::span<const double>(w), grid, dim, k));
    dz.push_back(spectral::derivative(std::span<const double>(z), grid, dim, k));
  }
  std::vector<double> integrand(nodes);
  for (std::size_t node = 0; node < nodes; ++node) {
    const auto& pl = im.plane(node);
    const Mat& g = im.metric(node);
    // columns: nabla_{e_i} W = sum_k C_ki d_k W
    Mat nw = Mat::Zero(dim, n), nz = Mat::Zero(dim, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        nw.col(i) += pl.coeffs(k, i) * node_vec(dw[k], node, dim);
        nz.col(i) += pl.coeffs(k, i) * node_vec(dz[k], node, dim);
      }
    const Mat lw = pl.frame.transpose() * g * (pl.pi_l * nw);  // (j, i) = g(pi_L nabla_{e_i} W, e_j)
    const Mat lz = pl.frame.transpose() * g * (pl.pi_l * nz);
    const Mat kw = pl.frame.transpose() * g * (pl.pi_l * j * nw);
    const Mat kz = pl.frame.transpose() * g * (pl.pi_l * j * nz);
    double a = 0.0, b = 0.0;
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) {
        a += kw(jj, i) * kz(i, jj);
        b += lw(jj, i) * lz(i, jj);
      }
    const double c = lw.trace() * lz.trace();
    integrand[node] = (a - b + c) * im.volj_density(node);
  }
  return integrate(grid, integrand);
}

VariationReport check_mixed_second_variation(const Immersion& im, const std::vector<double>& w,
                                             const std::vector<double>& z) {
  VariationReport rep;
  rep.context = "mixed second variation of iota + s W + t Z in chart " + im.chart()->name();
  rep.analytic = mixed_second_variation_flat(im, w, z);
  std::vector<double> est;
  for (double e : kVariationSteps) {
    auto at = [&](double s, double t) { return vol_j(im.displaced(w, s).displaced(z, t)); };
    est.push_back((at(e, e) - at(e, -e) - at(-e, e) + at(-e, -e)) / (4.0 * e * e));
  }
  const double v0 = vol_j(im);
  rep.finish(est, kVariationSteps, 1e-12 * v0, quotient_noise(v0, kVariationSteps, 2));
  return rep;
}

VariationReport check_stability(const Immersion& im, const VectorFieldOnL& y) {
  const auto hj = h_j_field(im);
  double hmax = 0.0;
  for (double v : hj) hmax = std::max(hmax, std::abs(v));
  if (hmax > 1e-8) fail(ErrorKind::InvalidArgument, "stability is tested at H_J = 0 only");
  VariationReport rep;
  rep.context = "second variation at a J-minimal immersion in chart " + im.chart()->name();
  const auto f = kahler_second_variation_integrand(im, y);
  std::vector<double> weighted(f.size());
  for (std::size_t node = 0; node < f.size(); ++node) weighted[node] = f[node] * im.volj_density(node);
  rep.analytic = integrate(im.grid(), weighted);
  const auto jy = im.j_push_forward(y);
  const double v0 = vol_j(im);
  std::vector<double> est;
  for (double e : kVariationSteps)
    est.push_back((vol_j(im.displaced(jy, e)) - 2.0 * v0 + vol_j(im.displaced(jy, -e))) / (e * e));
  rep.finish(est, kVariationSteps, 1e-12 * v0, quotient_noise(v0, kVariationSteps, 2));
  return rep;
}

ConvexityProfile convexity_experiment(const Immersion& im, const VectorFieldOnL& x, const std::vector<double>& times,
                                      const std::function<double(double)>& closed_form) {
  if (times.size() < 3) fail(ErrorKind::InvalidArgument, "convexity needs at least three times");
  FlowResult flow;
  try {
    flow = flow_spectral(im, x, times);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnsupportedField) throw;
    flow = flow_timestep(im, x, times);
  }
  ConvexityProfile out;
  out.t = times;
  for (const auto& f : flow.immersions) out.vol_j.push_back(vol_j(f));
  if (closed_form)
    for (double t : times) out.closed_form.push_back(closed_form(t));
  const double vmax = *std::max_element(out.vol_j.begin(), out.vol_j.end());
  out.min_relative = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < times.size(); ++k) {
    const double hm = times[k] - times[k - 1], hp = times[k + 1] - times[k];
    const double hbar = 0.5 * (hm + hp);
    const double dd =
        2.0 * ((out.vol_j[k + 1] - out.vol_j[k]) / hp - (out.vol_j[k] - out.vol_j[k - 1]) / hm) / (hp + hm);
    out.second_differences.push_back(dd * hbar * hbar);
    out.min_relative = std::min(out.min_relative, dd * hbar * hbar / vmax);
  }
  return out;
}

}  // namespace trgeo

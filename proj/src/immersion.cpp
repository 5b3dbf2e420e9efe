#include "trgeo/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "trgeo/error.hpp"
#include "trgeo/numerics.hpp"
#include "trgeo/spectral.hpp"

namespace trgeo {

namespace {

using CMat = Eigen::MatrixXcd;

double unit_uniform(std::mt19937_64& rng) {
  // 53 random bits; independent of the standard library's distribution code
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Spectral derivative of an n-component real field along every axis.
std::vector<std::vector<double>> gradient(const std::vector<double>& field, const GridTorus& grid, int components) {
  std::vector<std::vector<double>> out;
  for (int axis = 0; axis < grid.dim; ++axis) out.push_back(spectral::derivative(std::span<const double>(field), grid, components, axis));
  return out;
}

Vec slice(const std::vector<double>& field, std::size_t node, int components) {
  return Eigen::Map<const Vec>(field.data() + node * components, components);
}

void store(std::vector<double>& field, std::size_t node, const Vec& v) {
  std::copy(v.data(), v.data() + v.size(), field.begin() + static_cast<std::ptrdiff_t>(node * v.size()));
}

// Sum over i of the covariant derivative along e_i of the field F_i, where
// fields[i] holds F_i node-major and e_i = sum_k C_ki d/dtheta_k.
std::vector<double> traced_derivative(const Immersion& im, const std::vector<std::vector<double>>& fields) {
  const int dim = im.ambient_dim();
  const int n = im.dim();
  const std::size_t nodes = im.node_count();
  std::vector<std::vector<std::vector<double>>> grads;
  for (const auto& f : fields) grads.push_back(gradient(f, im.grid(), dim));
  std::vector<double> out(nodes * dim);
  parallel_for(nodes, [&](std::size_t node) {
    const auto& c = im.plane(node).coeffs;
    const Mat& v = im.frame(node);
    Christoffels gamma(dim);
    if (!im.chart()->is_flat()) {
      const Vec p = im.point(node);
      gamma = christoffels_at(*im.chart(), std::span<const double>(p.data(), dim));
    }
    Vec acc = Vec::Zero(dim);
    for (int i = 0; i < n; ++i) {
      const Vec f = slice(fields[i], node, dim);
      for (int k = 0; k < n; ++k) {
        if (c(k, i) == 0.0) continue;
        Vec d = slice(grads[i][k], node, dim);
        if (!im.chart()->is_flat()) d += gamma.contract(v.col(k), f);
        acc += c(k, i) * d;
      }
    }
    store(out, node, acc);
  });
  return out;
}

}  // namespace

VectorFieldOnL VectorFieldOnL::zero(const GridTorus& grid) {
  return {grid, std::vector<std::vector<double>>(grid.dim, std::vector<double>(grid.node_count(), 0.0))};
}

VectorFieldOnL VectorFieldOnL::coordinate(const GridTorus& grid, int axis, double c) {
  if (axis < 0 || axis >= grid.dim) fail(ErrorKind::InvalidArgument, "coordinate field axis out of range");
  auto out = zero(grid);
  std::fill(out.components[axis].begin(), out.components[axis].end(), c);
  return out;
}

VectorFieldOnL VectorFieldOnL::random_smooth(const GridTorus& grid, std::uint64_t seed, int max_mode,
                                             double amplitude) {
  std::mt19937_64 rng(seed);
  auto out = zero(grid);
  const int m2 = grid.dim == 2 ? max_mode : 0;
  for (int comp = 0; comp < grid.dim; ++comp)
    for (int k1 = 0; k1 <= max_mode; ++k1)
      for (int k2 = -m2; k2 <= m2; ++k2) {
        if (k1 == 0 && k2 < 0) continue;
        const double decay = amplitude / (1.0 + k1 * k1 + k2 * k2);
        const double a = decay * (2.0 * unit_uniform(rng) - 1.0);
        const double b = (k1 == 0 && k2 == 0) ? 0.0 : decay * (2.0 * unit_uniform(rng) - 1.0);
        for (std::size_t node = 0; node < grid.node_count(); ++node) {
          const auto th = grid.angles(node);
          const double phase = k1 * th[0] + k2 * th[1];
          out.components[comp][node] += a * std::cos(phase) + b * std::sin(phase);
        }
      }
  return out;
}

PlaneGeometry plane_geometry(const Mat& g, const Mat& j, const Mat& v) {
  const int dim = static_cast<int>(g.rows());
  const int n = static_cast<int>(v.cols());
  PlaneGeometry out;
  out.induced = v.transpose() * g * v;
  Eigen::LLT<Mat> llt(out.induced);
  const double scale = out.induced.diagonal().maxCoeff();
  if (llt.info() != Eigen::Success || !(scale > 0.0))
    fail(ErrorKind::DegenerateFrame, "tangent frame is rank deficient");
  const Mat r = llt.matrixU();
  if (r.diagonal().minCoeff() <= 1e-8 * std::sqrt(scale)) fail(ErrorKind::DegenerateFrame, "tangent frame is rank deficient");
  // induced = R^T R, so E = V R^{-1} is orthonormal and R^{-1} is upper triangular
  out.coeffs = r.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  out.frame = v * out.coeffs;
  out.volg = r.diagonal().prod();

  const Mat omega_e = out.frame.transpose() * j.transpose() * g * out.frame;
  const CMat h = CMat::Identity(n, n) - std::complex<double>(0.0, 1.0) * omega_e.cast<std::complex<double>>();
  out.rho = std::sqrt(std::abs(h.determinant()));

  Mat both(dim, 2 * n);
  both << out.frame, j * out.frame;
  const double gram = (both.transpose() * g * both).determinant();
  out.rho_gram = std::pow(std::max(gram, 0.0), 0.25);

  if (out.rho <= kRhoMin) fail(ErrorKind::NotTotallyReal, "rho_J below rho_min");
  Mat b(dim, 2 * n);
  b << v, j * v;
  const Mat b_inv = b.inverse();
  out.pi_l = v * b_inv.topRows(n);
  out.pi_j = Mat::Identity(dim, dim) - out.pi_l;
  out.pi_t = v * out.induced.inverse() * v.transpose() * g;
  out.pi_l_adj = g.inverse() * out.pi_l.transpose() * g;
  return out;
}

Immersion::Immersion(GridTorus grid, ChartPtr chart, std::vector<double> periodic, Mat winding)
    : grid_(grid), chart_(std::move(chart)), periodic_(std::move(periodic)), winding_(std::move(winding)) {
  if (!chart_) fail(ErrorKind::InvalidArgument, "immersion needs a chart");
  if (chart_->complex_dim() != grid_.dim)
    fail(ErrorKind::InvalidArgument, "torus dimension must equal the complex dimension of the chart");
  const int dim = chart_->real_dim();
  if (periodic_.size() != grid_.node_count() * dim) fail(ErrorKind::InvalidArgument, "point array has wrong size");
  if (winding_.size() == 0) winding_ = Mat::Zero(dim, grid_.dim);
  if (winding_.rows() != dim || winding_.cols() != grid_.dim) fail(ErrorKind::InvalidArgument, "winding has wrong shape");
  if (!winding_.isZero(0.0) && chart_->kind() != ChartKind::FlatQuotient)
    fail(ErrorKind::InvalidArgument, "winding immersions need the flat quotient chart");
  build();
}

void Immersion::build() {
  const int dim = chart_->real_dim();
  const std::size_t nodes = grid_.node_count();
  const auto grads = gradient(periodic_, grid_, dim);
  frames_.assign(nodes, Mat());
  metrics_.assign(nodes, Mat());
  planes_.assign(nodes, PlaneGeometry());
  parallel_for(nodes, [&](std::size_t node) {
    Mat v(dim, grid_.dim);
    for (int k = 0; k < grid_.dim; ++k) v.col(k) = winding_.col(k) + slice(grads[k], node, dim);
    const Vec p = point(node);
    if (!chart_->contains(std::span<const double>(p.data(), dim), chart_->metric_reach()))
      fail(ErrorKind::PointOutsideDomain, "immersion leaves the chart domain");
    const Mat g = metric_at(*chart_, std::span<const double>(p.data(), dim)).g;
    const Mat induced = v.transpose() * g * v;
    Eigen::SelfAdjointEigenSolver<Mat> eig(induced, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0) || eig.eigenvalues().minCoeff() <= 1e-16 * top)
      fail(ErrorKind::NotImmersed, "coordinate frame loses rank at node " + std::to_string(node));
    planes_[node] = plane_geometry(g, chart_->complex_structure(), v);
    frames_[node] = std::move(v);
    metrics_[node] = g;
  });
}

Vec Immersion::point(std::size_t node) const {
  const int dim = chart_->real_dim();
  const auto th = grid_.angles(node);
  Vec p = slice(periodic_, node, dim);
  for (int k = 0; k < grid_.dim; ++k) p += winding_.col(k) * th[k];
  return p;
}

double Immersion::rho_route_discrepancy() const {
  double m = 0.0;
  for (const auto& pl : planes_) m = std::max(m, std::abs(pl.rho - pl.rho_gram));
  return m;
}

double Immersion::min_rho() const {
  double m = 1.0;
  for (const auto& pl : planes_) m = std::min(m, pl.rho);
  return m;
}

std::vector<double> Immersion::push_forward(const VectorFieldOnL& x) const {
  if (!(x.grid == grid_)) fail(ErrorKind::InvalidArgument, "vector field lives on a different grid");
  const int dim = chart_->real_dim();
  std::vector<double> out(node_count() * dim);
  for (std::size_t node = 0; node < node_count(); ++node) {
    Vec acc = Vec::Zero(dim);
    for (int k = 0; k < grid_.dim; ++k) acc += x.components[k][node] * frames_[node].col(k);
    store(out, node, acc);
  }
  return out;
}

std::vector<double> Immersion::j_push_forward(const VectorFieldOnL& x) const {
  const int dim = chart_->real_dim();
  auto out = push_forward(x);
  for (std::size_t node = 0; node < node_count(); ++node)
    store(out, node, chart_->complex_structure() * slice(out, node, dim));
  return out;
}

Immersion Immersion::displaced(const std::vector<double>& field, double eps) const {
  if (field.size() != periodic_.size()) fail(ErrorKind::InvalidArgument, "displacement has wrong size");
  std::vector<double> p = periodic_;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += eps * field[i];
  return Immersion(grid_, chart_, std::move(p), winding_);
}

Immersion Immersion::shifted(int axis, double delta) const {
  const int n = chart_->complex_dim();
  const std::size_t nodes = node_count();
  std::vector<cplx> z(nodes * n);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = {periodic_[2 * i], periodic_[2 * i + 1]};
  const auto s = spectral::shift(z, grid_, n, axis, delta);
  std::vector<double> p(periodic_.size());
  for (std::size_t node = 0; node < nodes; ++node)
    for (int c = 0; c < 2 * n; ++c) {
      const cplx v = s[node * n + c / 2];
      p[node * 2 * n + c] = (c % 2 == 0 ? v.real() : v.imag()) + winding_(c, axis) * delta;
    }
  return Immersion(grid_, chart_, std::move(p), winding_);
}

Immersion Immersion::circle(const GridTorus& grid, ChartPtr chart, double r, cplx center) {
  std::vector<cplx> z(grid.node_count());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = center + std::polar(r, grid.angle(0, static_cast<int>(k)));
  return plane_curve(grid, std::move(chart), z);
}

Immersion Immersion::ellipse(const GridTorus& grid, ChartPtr chart, double a, double b) {
  std::vector<cplx> z(grid.node_count());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double t = grid.angle(0, static_cast<int>(k));
    z[k] = {a * std::cos(t), b * std::sin(t)};
  }
  return plane_curve(grid, std::move(chart), z);
}

Immersion Immersion::plane_curve(const GridTorus& grid, ChartPtr chart, const std::vector<cplx>& samples) {
  if (grid.dim != 1) fail(ErrorKind::InvalidArgument, "plane curves need a 1-d grid");
  if (samples.size() != grid.node_count()) fail(ErrorKind::InvalidArgument, "sample count does not match grid");
  // turning number of the tangent: must be positive (anticlockwise)
  const auto d = spectral::derivative(std::span<const cplx>(samples), grid, 1, 0);
  double turn = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const cplx a = d[k], b = d[(k + 1) % d.size()];
    if (std::abs(a) == 0.0) fail(ErrorKind::NotImmersed, "curve velocity vanishes");
    turn += std::arg(b / a);
  }
  if (turn <= 0.0) fail(ErrorKind::OrientationReversed, "curve is not anticlockwise");
  std::vector<double> p(2 * samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    p[2 * k] = samples[k].real();
    p[2 * k + 1] = samples[k].imag();
  }
  return Immersion(grid, std::move(chart), std::move(p));
}

Immersion Immersion::product_torus(const GridTorus& grid, ChartPtr chart, double r1, double r2) {
  return graph_perturbed_torus(grid, std::move(chart), r1, r2, 0.0, 0, 0);
}

Immersion Immersion::graph_perturbed_torus(const GridTorus& grid, ChartPtr chart, double r1, double r2, double amp,
                                           int m1, int m2) {
  if (grid.dim != 2) fail(ErrorKind::InvalidArgument, "tori need a 2-d grid");
  std::vector<double> p(4 * grid.node_count());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto th = grid.angles(node);
    const cplx z1 = std::polar(r1, th[0]);
    const cplx z2 = std::polar(r2 + amp * std::cos(m1 * th[0] + m2 * th[1]), th[1]);
    p[4 * node] = z1.real();
    p[4 * node + 1] = z1.imag();
    p[4 * node + 2] = z2.real();
    p[4 * node + 3] = z2.imag();
  }
  return Immersion(grid, std::move(chart), std::move(p));
}

Immersion Immersion::straight_torus(const GridTorus& grid, ChartPtr chart, double offset) {
  const int n = grid.dim;
  std::vector<double> p(2 * n * grid.node_count(), 0.0);
  for (std::size_t node = 0; node < grid.node_count(); ++node) p[2 * n * node + 1] = offset;
  Mat w = Mat::Zero(2 * n, n);
  for (int k = 0; k < n; ++k) w(2 * k, k) = 1.0;
  return Immersion(grid, std::move(chart), std::move(p), w);
}

Volumes total_volumes(const Immersion& im) {
  CompensatedSum vj, vg;
  for (std::size_t node = 0; node < im.node_count(); ++node) {
    vj.add(im.volj_density(node));
    vg.add(im.volg_density(node));
  }
  const double cell = im.grid().cell_area();
  return {vj.value() * cell, vg.value() * cell};
}

double lagrangian_defect(const Immersion& im) {
  if (im.dim() == 1) return 0.0;
  const Mat& j = im.chart()->complex_structure();
  double m = 0.0;
  for (std::size_t node = 0; node < im.node_count(); ++node) {
    const Mat& e = im.plane(node).frame;
    const Mat& g = im.metric(node);
    m = std::max(m, std::abs((j * e.col(0)).dot(g * e.col(1))));
  }
  return m;
}

std::vector<double> h_j_field(const Immersion& im) {
  const int dim = im.ambient_dim();
  const std::size_t nodes = im.node_count();
  // F_i = pi_L^t e_i. The companion term pi_L^t (nabla_{e_i} e_i) is dropped:
  // J maps the image of pi_L^t onto the normal space, so pi_T J kills it.
  std::vector<std::vector<double>> fields(im.dim(), std::vector<double>(nodes * dim));
  for (std::size_t node = 0; node < nodes; ++node) {
    const auto& pl = im.plane(node);
    for (int i = 0; i < im.dim(); ++i) store(fields[i], node, pl.pi_l_adj * pl.frame.col(i));
  }
  auto out = traced_derivative(im, fields);
  const Mat& j = im.chart()->complex_structure();
  for (std::size_t node = 0; node < nodes; ++node)
    store(out, node, -j * im.plane(node).pi_t * j * slice(out, node, dim));
  return out;
}

std::vector<double> mean_curvature_field(const Immersion& im) {
  const int dim = im.ambient_dim();
  const std::size_t nodes = im.node_count();
  std::vector<std::vector<double>> fields(im.dim(), std::vector<double>(nodes * dim));
  for (std::size_t node = 0; node < nodes; ++node)
    for (int i = 0; i < im.dim(); ++i) store(fields[i], node, im.plane(node).frame.col(i));
  auto out = traced_derivative(im, fields);
  for (std::size_t node = 0; node < nodes; ++node) {
    const Mat normal = Mat::Identity(dim, dim) - im.plane(node).pi_t;
    store(out, node, normal * slice(out, node, dim));
  }
  return out;
}

std::vector<double> weighted_divergence(const GridTorus& grid, const std::vector<double>& weight,
                                        const VectorFieldOnL& x) {
  const std::size_t nodes = grid.node_count();
  std::vector<double> out(nodes, 0.0);
  for (int k = 0; k < grid.dim; ++k) {
    std::vector<double> flux(nodes);
    for (std::size_t node = 0; node < nodes; ++node) flux[node] = weight[node] * x.components[k][node];
    const auto d = spectral::derivative(std::span<const double>(flux), grid, 1, k);
    for (std::size_t node = 0; node < nodes; ++node) out[node] += d[node];
  }
  for (std::size_t node = 0; node < nodes; ++node) out[node] /= weight[node];
  return out;
}

}  // namespace trgeo

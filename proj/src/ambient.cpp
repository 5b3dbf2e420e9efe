#include "trgeo/ambient.hpp"

#include <algorithm>
#include <cmath>

#include "trgeo/error.hpp"
#include "trgeo/numerics.hpp"

namespace trgeo {

namespace {

// Per-level steps as multiples of the chart's fd_step. Each level uses a
// second-order central stencil at steps s and s/2 combined by one Richardson
// elimination, so the truncation error is O(s^4).
constexpr double kHessianScale = 3.0;
constexpr double kThirdScale = 30.0;
constexpr double kRicciScale = 30.0;

using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

class Stencil {
 public:
  Stencil(const AmbientChart& chart, std::span<const double> p) : chart_(chart), base_(p.begin(), p.end()) {}

  long double eval(const LVec& offset) const {
    LVec q = offset;
    for (std::size_t i = 0; i < base_.size(); ++i) q[static_cast<Eigen::Index>(i)] += base_[i];
    return chart_.potential(std::span<const long double>(q.data(), static_cast<std::size_t>(q.size())));
  }

  // second-order central approximation of d_a d_b phi at base + offset
  long double hessian_entry(const LVec& offset, int a, int b, long double s) const {
    const int dim = chart_.real_dim();
    LVec ea = LVec::Zero(dim), eb = LVec::Zero(dim);
    ea[a] = s;
    eb[b] = s;
    if (a == b) return (eval(offset + ea) - 2.0L * eval(offset) + eval(offset - ea)) / (s * s);
    return (eval(offset + ea + eb) - eval(offset + ea - eb) - eval(offset - ea + eb) + eval(offset - ea - eb)) /
           (4.0L * s * s);
  }

  Mat hessian(double s) const {
    const int dim = chart_.real_dim();
    const LVec zero = LVec::Zero(dim);
    Mat h(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b) {
        const double v = richardson(static_cast<double>(hessian_entry(zero, a, b, s)),
                                    static_cast<double>(hessian_entry(zero, a, b, 0.5 * s)));
        h(a, b) = v;
        h(b, a) = v;
      }
    return h;
  }

  // d_c of the Hessian, one matrix per direction c
  std::vector<Mat> hessian_gradient(double s) const {
    const int dim = chart_.real_dim();
    std::vector<Mat> out(dim, Mat(dim, dim));
    auto level = [&](int a, int b, int c, double step) {
      LVec ec = LVec::Zero(dim);
      ec[c] = step;
      return static_cast<double>((hessian_entry(ec, a, b, step) - hessian_entry(-ec, a, b, step)) / (2.0L * step));
    };
    for (int c = 0; c < dim; ++c)
      for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b) {
          const double v = richardson(level(a, b, c, s), level(a, b, c, 0.5 * s));
          out[c](a, b) = v;
          out[c](b, a) = v;
        }
    return out;
  }

 private:
  const AmbientChart& chart_;
  std::vector<double> base_;
};

// J-invariant part of a real symmetric matrix: the Kähler metric of a potential
// is the J-invariant part of its real Hessian.
Mat j_invariant_part(const Mat& h, const Mat& j) { return 0.5 * (h + j.transpose() * h * j); }

void require_inside(const AmbientChart& chart, std::span<const double> p, double margin) {
  if (!chart.contains(p, margin)) fail(ErrorKind::PointOutsideDomain, "point (with stencil) leaves chart " + chart.name());
}

Mat potential_metric(const AmbientChart& chart, std::span<const double> p) {
  const Mat g = j_invariant_part(Stencil(chart, p).hessian(kHessianScale * chart.fd_step()), chart.complex_structure());
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) fail(ErrorKind::MetricNotPositiveDefinite, "metric of " + chart.name() + " not positive definite");
  return g;
}

}  // namespace

Vec Christoffels::contract(const Vec& u, const Vec& w) const {
  Vec out = Vec::Zero(dim_);
  for (int a = 0; a < dim_; ++a) {
    double acc = 0.0;
    for (int b = 0; b < dim_; ++b)
      for (int c = 0; c < dim_; ++c) acc += (*this)(a, b, c) * u[b] * w[c];
    out[a] = acc;
  }
  return out;
}

double Christoffels::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Mat standard_complex_structure(int n) {
  Mat j = Mat::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    j(2 * k + 1, 2 * k) = 1.0;   // J d/dx = d/dy
    j(2 * k, 2 * k + 1) = -1.0;  // J d/dy = -d/dx
  }
  return j;
}

AmbientChart::AmbientChart(std::string name, ChartKind kind, int n, Potential phi, ChartDomain domain, double fd_step)
    : name_(std::move(name)), kind_(kind), n_(n), phi_(std::move(phi)), domain_(domain), j_(standard_complex_structure(n)) {
  if (n != 1 && n != 2) fail(ErrorKind::InvalidArgument, "complex dimension must be 1 or 2");
  const double scale = domain_.shape == ChartDomain::Shape::Ball ? domain_.outer_radius : 1.0;
  fd_step_ = fd_step > 0.0 ? fd_step : 1e-4 * scale;
}

std::shared_ptr<const AmbientChart> AmbientChart::flat(int n) {
  return std::shared_ptr<const AmbientChart>(new AmbientChart("flat", ChartKind::Flat, n, nullptr, {}, 0.0));
}

std::shared_ptr<const AmbientChart> AmbientChart::flat_quotient(int n) {
  return std::shared_ptr<const AmbientChart>(
      new AmbientChart("flat_quotient", ChartKind::FlatQuotient, n, nullptr, {}, 0.0));
}

namespace {
long double log_ball_potential(std::span<const long double> p) {
  long double r2 = 0.0L;
  for (long double x : p) r2 += x * x;
  return -2.0L * std::log(1.0L - r2);
}
}  // namespace

std::shared_ptr<const AmbientChart> AmbientChart::poincare_disk(double fd_step) {
  return from_potential("poincare_disk", 1, log_ball_potential, {ChartDomain::Shape::Ball, 1.0, 0.0}, fd_step);
}

std::shared_ptr<const AmbientChart> AmbientChart::complex_hyperbolic_ball(double fd_step) {
  return from_potential("complex_hyperbolic_ball", 2, log_ball_potential, {ChartDomain::Shape::Ball, 1.0, 0.0},
                        fd_step);
}

std::shared_ptr<const AmbientChart> AmbientChart::quartic(double fd_step) {
  auto phi = [](std::span<const long double> p) {
    long double r2 = 0.0L;
    for (long double x : p) r2 += x * x;
    return r2 * r2;
  };
  return from_potential("quartic", 2, phi, {ChartDomain::Shape::Ball, 2.0, 0.5}, fd_step);
}

std::shared_ptr<const AmbientChart> AmbientChart::from_potential(std::string name, int n, Potential phi,
                                                                 ChartDomain domain, double fd_step) {
  if (!phi) fail(ErrorKind::InvalidArgument, "potential chart needs a potential");
  return std::shared_ptr<const AmbientChart>(
      new AmbientChart(std::move(name), ChartKind::Potential, n, std::move(phi), domain, fd_step));
}

bool AmbientChart::contains(std::span<const double> p, double margin) const {
  if (static_cast<int>(p.size()) != real_dim()) return false;
  for (double x : p)
    if (!std::isfinite(x)) return false;
  if (domain_.shape == ChartDomain::Shape::Unbounded) return true;
  double r2 = 0.0;
  for (double x : p) r2 += x * x;
  const double r = std::sqrt(r2);
  if (r + margin >= domain_.outer_radius) return false;
  if (domain_.inner_radius > 0.0 && r - margin <= domain_.inner_radius) return false;
  return true;
}

double AmbientChart::metric_reach() const {
  return is_flat() ? 0.0 : 2.0 * kHessianScale * fd_step_;
}

double AmbientChart::christoffel_reach() const {
  return is_flat() ? 0.0 : 2.0 * kThirdScale * fd_step_;
}

double AmbientChart::ricci_reach() const {
  return is_flat() ? 0.0 : kRicciScale * fd_step_ + christoffel_reach();
}

MetricData metric_at(const AmbientChart& chart, std::span<const double> p) {
  const int dim = chart.real_dim();
  if (static_cast<int>(p.size()) != dim) fail(ErrorKind::InvalidArgument, "point has wrong dimension");
  MetricData out;
  out.point = Eigen::Map<const Vec>(p.data(), dim);
  if (chart.is_flat()) {
    out.g = Mat::Identity(dim, dim);
  } else {
    require_inside(chart, p, chart.metric_reach());
    out.g = potential_metric(chart, p);
  }
  out.omega = chart.complex_structure().transpose() * out.g;
  out.christoffels = Christoffels(dim);
  out.ricci = Mat::Zero(dim, dim);
  return out;
}

Christoffels christoffels_at(const AmbientChart& chart, std::span<const double> p) {
  const int dim = chart.real_dim();
  Christoffels gamma(dim);
  if (chart.is_flat()) return gamma;
  require_inside(chart, p, chart.christoffel_reach());
  const Mat& j = chart.complex_structure();
  const Mat g = potential_metric(chart, p);
  const Mat g_inv = g.inverse();
  Stencil stencil(chart, p);
  const auto dh = stencil.hessian_gradient(kThirdScale * chart.fd_step());
  std::vector<Mat> dg(dim);  // dg[c](a, b) = d_c g_ab
  for (int c = 0; c < dim; ++c) dg[c] = j_invariant_part(dh[c], j);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      for (int c = b; c < dim; ++c) {
        double acc = 0.0;
        for (int d = 0; d < dim; ++d) acc += g_inv(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
        gamma(a, b, c) = 0.5 * acc;
        gamma(a, c, b) = 0.5 * acc;
      }
  return gamma;
}

Mat ricci_at(const AmbientChart& chart, std::span<const double> p) {
  const int dim = chart.real_dim();
  if (chart.is_flat()) return Mat::Zero(dim, dim);
  require_inside(chart, p, chart.ricci_reach());
  const Christoffels gamma = christoffels_at(chart, p);
  const double s = kRicciScale * chart.fd_step();
  const Vec base = Eigen::Map<const Vec>(p.data(), dim);

  // dgamma[e] holds d_e Gamma
  std::vector<Christoffels> dgamma;
  dgamma.reserve(dim);
  for (int e = 0; e < dim; ++e) {
    auto level = [&](double step) {
      Vec plus = base, minus = base;
      plus[e] += step;
      minus[e] -= step;
      const auto gp = christoffels_at(chart, std::span<const double>(plus.data(), dim));
      const auto gm = christoffels_at(chart, std::span<const double>(minus.data(), dim));
      Christoffels d(dim);
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
          for (int c = 0; c < dim; ++c) d(a, b, c) = (gp(a, b, c) - gm(a, b, c)) / (2.0 * step);
      return d;
    };
    const auto coarse = level(s);
    const auto fine = level(0.5 * s);
    Christoffels d(dim);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        for (int c = 0; c < dim; ++c) d(a, b, c) = richardson(coarse(a, b, c), fine(a, b, c));
    dgamma.push_back(std::move(d));
  }

  Mat ric(dim, dim);
  for (int b = 0; b < dim; ++b)
    for (int d = 0; d < dim; ++d) {
      double acc = 0.0;
      for (int a = 0; a < dim; ++a) {
        acc += dgamma[a](a, b, d) - dgamma[d](a, a, b);
        for (int e = 0; e < dim; ++e) acc += gamma(a, a, e) * gamma(e, b, d) - gamma(a, d, e) * gamma(e, a, b);
      }
      ric(b, d) = acc;
    }
  return 0.5 * (ric + ric.transpose());
}

MetricData full_metric_at(const AmbientChart& chart, std::span<const double> p) {
  MetricData out = metric_at(chart, p);
  out.christoffels = christoffels_at(chart, p);
  out.ricci = ricci_at(chart, p);
  return out;
}

KahlerEinsteinReport verify_kahler_einstein(const AmbientChart& chart, std::span<const Vec> points) {
  if (points.size() < 8) fail(ErrorKind::InvalidArgument, "verify_kahler_einstein needs at least 8 sample points");
  const int dim = chart.real_dim();
  const Mat& j = chart.complex_structure();
  KahlerEinsteinReport report;
  report.samples = points.size();

  std::vector<Mat> gs, rics;
  for (const auto& p : points) {
    const std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
    const auto md = metric_at(chart, ps);
    const auto gamma = christoffels_at(chart, ps);
    // (nabla_a J)^b_c = Gamma^b_{ad} J^d_c - J^b_d Gamma^d_{ac}
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        for (int c = 0; c < dim; ++c) {
          double v = 0.0;
          for (int d = 0; d < dim; ++d) v += gamma(b, a, d) * j(d, c) - j(b, d) * gamma(d, a, c);
          report.max_nabla_j = std::max(report.max_nabla_j, std::abs(v));
        }
    gs.push_back(md.g);
    rics.push_back(ricci_at(chart, ps));
  }

  CompensatedSum num, den;
  double max_ric = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    num.add(rics[k].cwiseProduct(gs[k]).sum());
    den.add(gs[k].squaredNorm());
    max_ric = std::max(max_ric, rics[k].cwiseAbs().maxCoeff());
  }
  report.einstein_constant = num.value() / den.value();
  for (std::size_t k = 0; k < points.size(); ++k)
    report.max_einstein_residual =
        std::max(report.max_einstein_residual, (rics[k] - report.einstein_constant * gs[k]).cwiseAbs().maxCoeff());
  report.einstein = report.max_einstein_residual <= 1e-5 * std::max(1.0, max_ric);
  return report;
}

}  // namespace trgeo

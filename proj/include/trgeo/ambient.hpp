#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace trgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Real coordinates on C^n are interleaved: (x1, y1, x2, y2, ...), z_k = x_k + i y_k.
/// Potentials are evaluated in extended precision: curvature needs fourth
/// differences of phi, which double rounding alone would swamp.
using Potential = std::function<long double(std::span<const long double>)>;

struct ChartDomain {
  enum class Shape { Unbounded, Ball };
  Shape shape = Shape::Unbounded;
  double outer_radius = 0.0;  // Ball: |p| < outer_radius
  double inner_radius = 0.0;  // Ball: |p| > inner_radius (0 = no hole)
};

enum class ChartKind { Flat, FlatQuotient, Potential };

/// Levi-Civita symbols Gamma^a_{bc}, stored a-major.
class Christoffels {
 public:
  explicit Christoffels(int dim = 0) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}
  int dim() const { return dim_; }
  double& operator()(int a, int b, int c) { return data_[(static_cast<std::size_t>(a) * dim_ + b) * dim_ + c]; }
  double operator()(int a, int b, int c) const { return data_[(static_cast<std::size_t>(a) * dim_ + b) * dim_ + c]; }
  /// Gamma(u, w)^a = Gamma^a_{bc} u^b w^c
  Vec contract(const Vec& u, const Vec& w) const;
  double max_abs() const;

 private:
  int dim_;
  std::vector<double> data_;
};

struct MetricData {
  Vec point;
  Mat g;      // 2n x 2n, symmetric positive definite
  Mat omega;  // omega(v, w) = g(Jv, w) = v^T omega w
  Christoffels christoffels;
  Mat ricci;
};

/// A Kähler chart domain in R^{2n} with the constant complex structure J.
/// Immutable once built; share through shared_ptr<const AmbientChart>.
class AmbientChart {
 public:
  static std::shared_ptr<const AmbientChart> flat(int n);
  /// Flat C^n modulo the lattice 2*pi*Z^{2n}; hosts closed straight tori.
  static std::shared_ptr<const AmbientChart> flat_quotient(int n);
  /// phi = -2 log(1 - |z|^2) on the unit disk; curvature -1.
  static std::shared_ptr<const AmbientChart> poincare_disk(double fd_step = 0.0);
  /// phi = -2 log(1 - |z|^2) on the unit ball of C^2; Ric = -(3/2) g.
  static std::shared_ptr<const AmbientChart> complex_hyperbolic_ball(double fd_step = 0.0);
  /// phi = |z|^4 on the shell 0.5 < |z| < 2 in C^2; Kähler, not Einstein.
  static std::shared_ptr<const AmbientChart> quartic(double fd_step = 0.0);
  static std::shared_ptr<const AmbientChart> from_potential(std::string name, int n, Potential phi, ChartDomain domain,
                                                            double fd_step = 0.0);

  const std::string& name() const { return name_; }
  ChartKind kind() const { return kind_; }
  bool is_flat() const { return kind_ != ChartKind::Potential; }
  int complex_dim() const { return n_; }
  int real_dim() const { return 2 * n_; }
  double fd_step() const { return fd_step_; }
  const ChartDomain& domain() const { return domain_; }
  const Mat& complex_structure() const { return j_; }

  /// True when the closed ball of radius `margin` around p lies in the domain.
  bool contains(std::span<const double> p, double margin = 0.0) const;

  // Stencil reach of each derivative level; potentials need this much room.
  double metric_reach() const;
  double christoffel_reach() const;
  double ricci_reach() const;

  long double potential(std::span<const long double> p) const { return phi_(p); }

 private:
  AmbientChart(std::string name, ChartKind kind, int n, Potential phi, ChartDomain domain, double fd_step);

  std::string name_;
  ChartKind kind_;
  int n_;
  Potential phi_;
  ChartDomain domain_;
  double fd_step_;
  Mat j_;
};

using ChartPtr = std::shared_ptr<const AmbientChart>;

/// Standard complex structure on R^{2n} in interleaved coordinates.
Mat standard_complex_structure(int n);

/// g and omega only.
MetricData metric_at(const AmbientChart& chart, std::span<const double> p);
Christoffels christoffels_at(const AmbientChart& chart, std::span<const double> p);
Mat ricci_at(const AmbientChart& chart, std::span<const double> p);
/// g, omega, christoffels and ricci together.
MetricData full_metric_at(const AmbientChart& chart, std::span<const double> p);

struct KahlerEinsteinReport {
  double max_nabla_j = 0.0;           // max |(nabla J)| over samples
  double max_einstein_residual = 0.0;  // max |Ric - c g| over samples
  double einstein_constant = 0.0;      // least-squares c
  bool einstein = false;               // residual small relative to |Ric|
  std::size_t samples = 0;
};

/// Needs at least 8 interior sample points.
KahlerEinsteinReport verify_kahler_einstein(const AmbientChart& chart, std::span<const Vec> points);

}  // namespace trgeo

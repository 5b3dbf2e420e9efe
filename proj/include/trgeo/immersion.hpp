#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "trgeo/ambient.hpp"
#include "trgeo/grid.hpp"

namespace trgeo {

using cplx = std::complex<double>;

inline constexpr double kRhoMin = 1e-6;

/// Tangent field on the abstract torus: components[k][node] is the
/// coefficient of d/dtheta_k.
struct VectorFieldOnL {
  GridTorus grid;
  std::vector<std::vector<double>> components;

  static VectorFieldOnL zero(const GridTorus& grid);
  /// Constant coordinate field c * d/dtheta_axis.
  static VectorFieldOnL coordinate(const GridTorus& grid, int axis, double c = 1.0);
  /// f(theta) d/dtheta_axis with f sampled from a callable of the node angles.
  template <class F>
  static VectorFieldOnL scaled_coordinate(const GridTorus& grid, int axis, F&& f) {
    auto out = zero(grid);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      const auto a = grid.angles(node);
      out.components[axis][node] = f(a[0], a[1]);
    }
    return out;
  }
  /// Random trigonometric polynomial field with modes |k_i| <= max_mode.
  static VectorFieldOnL random_smooth(const GridTorus& grid, std::uint64_t seed, int max_mode = 3,
                                      double amplitude = 1.0);
};

/// Linear algebra of a tangent n-plane spanned by the columns of V in a
/// hermitian vector space (G, J).
struct PlaneGeometry {
  Mat induced;  // V^T G V
  Mat coeffs;   // upper triangular C with E = V C orthonormal (Gram-Schmidt in column order)
  Mat frame;    // E
  double rho = 0.0;       // sqrt |det_C h(e_i, e_j)|
  double rho_gram = 0.0;  // det(Gram[E, JE])^{1/4}
  double volg = 0.0;      // sqrt det induced
  Mat pi_l, pi_j, pi_t, pi_l_adj;  // pi_l_adj is the G-adjoint of pi_l
};

/// Throws DegenerateFrame when V is rank deficient and NotTotallyReal when
/// V and JV fail to span.
PlaneGeometry plane_geometry(const Mat& g, const Mat& j, const Mat& v);

/// Sampled immersion of T^1 or T^2. Points are stored as a periodic part plus
/// a linear winding W theta (nonzero only in the quotient chart), so the
/// coordinate frame is W + d(periodic)/dtheta.
class Immersion {
 public:
  Immersion(GridTorus grid, ChartPtr chart, std::vector<double> periodic, Mat winding = Mat());

  static Immersion circle(const GridTorus& grid, ChartPtr chart, double r, cplx center = 0.0);
  static Immersion ellipse(const GridTorus& grid, ChartPtr chart, double a, double b);
  /// Plane curve from complex samples; rejects clockwise curves.
  static Immersion plane_curve(const GridTorus& grid, ChartPtr chart, const std::vector<cplx>& samples);
  static Immersion product_torus(const GridTorus& grid, ChartPtr chart, double r1, double r2);
  /// z1 = r1 e^{i t1}, z2 = e^{i t2} (r2 + amp cos(m1 t1 + m2 t2)).
  static Immersion graph_perturbed_torus(const GridTorus& grid, ChartPtr chart, double r1, double r2, double amp,
                                         int m1, int m2);
  /// theta -> (theta_1 + i offset, theta_2): a real plane closed up by the
  /// lattice of the quotient chart. Minimal and Lagrangian.
  static Immersion straight_torus(const GridTorus& grid, ChartPtr chart, double offset = 0.0);

  const GridTorus& grid() const { return grid_; }
  const ChartPtr& chart() const { return chart_; }
  int dim() const { return grid_.dim; }
  int ambient_dim() const { return chart_->real_dim(); }
  std::size_t node_count() const { return grid_.node_count(); }
  const std::vector<double>& periodic() const { return periodic_; }
  const Mat& winding() const { return winding_; }

  Vec point(std::size_t node) const;
  /// 2n x n coordinate frame d iota / d theta_k.
  const Mat& frame(std::size_t node) const { return frames_[node]; }
  const Mat& metric(std::size_t node) const { return metrics_[node]; }
  const PlaneGeometry& plane(std::size_t node) const { return planes_[node]; }
  double rho(std::size_t node) const { return planes_[node].rho; }
  double volg_density(std::size_t node) const { return planes_[node].volg; }
  double volj_density(std::size_t node) const { return planes_[node].rho * planes_[node].volg; }

  /// Max over nodes of |rho (hermitian) - rho (gram)|.
  double rho_route_discrepancy() const;
  double min_rho() const;

  /// iota_* X at every node, node-major (2n reals per node).
  std::vector<double> push_forward(const VectorFieldOnL& x) const;
  /// J iota_* X at every node.
  std::vector<double> j_push_forward(const VectorFieldOnL& x) const;

  /// Same map with the periodic part displaced by eps * field (node-major).
  Immersion displaced(const std::vector<double>& field, double eps) const;
  /// iota(theta + delta e_axis), by spectral phase shift.
  Immersion shifted(int axis, double delta) const;

 private:
  void build();

  GridTorus grid_;
  ChartPtr chart_;
  std::vector<double> periodic_;
  Mat winding_;
  std::vector<Mat> frames_;
  std::vector<Mat> metrics_;
  std::vector<PlaneGeometry> planes_;
};

struct Volumes {
  double vol_j = 0.0;
  double vol_g = 0.0;
};

Volumes total_volumes(const Immersion& im);

/// Max over nodes of |omega(e_1, e_2)|; exactly 0 for curves.
double lagrangian_defect(const Immersion& im);

/// J-mean curvature H_J at every node (node-major, 2n reals per node).
std::vector<double> h_j_field(const Immersion& im);

/// Classical mean curvature vector, trace of the second fundamental form.
std::vector<double> mean_curvature_field(const Immersion& im);

/// Divergence of X with respect to the density mu = weight * dtheta:
/// (1/weight) d_k(weight X^k). Spectral.
std::vector<double> weighted_divergence(const GridTorus& grid, const std::vector<double>& weight,
                                        const VectorFieldOnL& x);

}  // namespace trgeo

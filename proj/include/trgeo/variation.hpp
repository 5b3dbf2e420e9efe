#pragma once

#include <functional>
#include <string>
#include <vector>

#include "trgeo/geodesic_flow.hpp"
#include "trgeo/immersion.hpp"

namespace trgeo {

/// Default finite-difference steps, finest last.
inline const std::vector<double> kVariationSteps = {1e-2, 5e-3, 2.5e-3};

struct VariationReport {
  std::string context;
  double analytic = 0.0;
  double fd = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double richardson_order = 0.0;  // infinity when the estimates agree to rounding
  bool exact = false;
  std::vector<double> steps;
  std::vector<double> fd_estimates;

  /// Fills fd, order and the errors from raw estimates; `scale` guards the
  /// relative error when the analytic value vanishes, `noise` is the rounding
  /// level of the estimates.
  void finish(const std::vector<double>& estimates, const std::vector<double>& eps, double scale = 0.0,
              double noise = 0.0);
};

struct FirstVariationFD {
  double value = 0.0;
  double richardson_order = 0.0;
  bool exact = false;
  std::vector<double> estimates;
  std::vector<double> density_derivative;  // per node, per unit dtheta
};

/// d/dt Vol_J of iota + t Z at t = 0; Z is node-major in chart coordinates.
FirstVariationFD fd_first_variation(const Immersion& im, const std::vector<double>& z,
                                    const std::vector<double>& eps = kVariationSteps);

/// -int g(JY, H_J) vol_J against the derivative along iota + t J iota_* Y.
VariationReport check_first_variation(const Immersion& im, const VectorFieldOnL& y);

/// iota o phi_t, with phi_t the flow of X on the torus.
Immersion tangential_flow(const Immersion& im, const VectorFieldOnL& x, double t);

struct DensityReport {
  VariationReport first;   // Div(rho_J X) vol_g, worst node
  VariationReport second;  // Div(X Div(rho_J X)) vol_g, worst node
  double total_second = 0.0;  // integral of the second expression
  std::vector<double> first_analytic, second_analytic;  // per node, per unit dtheta
};

/// Pointwise t-derivatives of the density under iota o phi_t(X). Errors are
/// relative to the largest density value.
DensityReport check_density_divergence(const Immersion& im, const VectorFieldOnL& x,
                                       const std::vector<double>& eps = kVariationSteps);

/// Integrand (Div(rho Y)/rho)^2 + g(JY, H_J)^2 - Ric(Y, Y), one value per node.
std::vector<double> kahler_second_variation_integrand(const Immersion& im, const VectorFieldOnL& y);

/// Second derivative of Vol_J along the geodesic d iota/dt = J iota_* Y.
/// Throws GeodesicUnavailable when neither flow scheme can produce it.
VariationReport check_second_variation_kahler(const Immersion& im, const VectorFieldOnL& y);

/// d^2/ds dt Vol_J of iota + s W + t Z in a flat chart, as
/// int (A - B + C) vol_J with the trace terms of pi_L and pi_L J applied to
/// the derivatives of W and Z.
double mixed_second_variation_flat(const Immersion& im, const std::vector<double>& w, const std::vector<double>& z);

/// Same quantity against the four-point mixed difference.
VariationReport check_mixed_second_variation(const Immersion& im, const std::vector<double>& w,
                                             const std::vector<double>& z);

/// Second variation at an H_J = 0 immersion along iota + t J iota_* Y. The
/// acceleration term carries a factor H_J, so any family with this velocity
/// has the same second derivative as the geodesic.
VariationReport check_stability(const Immersion& im, const VectorFieldOnL& y);

struct ConvexityProfile {
  std::vector<double> t;
  std::vector<double> vol_j;
  std::vector<double> second_differences;  // interior samples
  std::vector<double> closed_form;         // optional reference column
  double min_relative = 0.0;               // min second difference / max Vol_J
};

/// Vol_J along the geodesic of X through im at the given flow times.
ConvexityProfile convexity_experiment(const Immersion& im, const VectorFieldOnL& x, const std::vector<double>& times,
                                      const std::function<double(double)>& closed_form = {});

}  // namespace trgeo

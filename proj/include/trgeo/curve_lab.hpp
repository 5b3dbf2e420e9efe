#pragma once

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "trgeo/grid.hpp"

namespace trgeo {

using cplx = std::complex<double>;

/// Coefficients a_n, n in [-N, N], of gamma(theta) = sum a_n e^{i n theta}.
struct FourierCurve {
  int N = 0;
  std::vector<cplx> coeffs;        // coeffs[n + N]
  double parseval_residual = 0.0;  // set by fourier_analyze

  static FourierCurve zeros(int N);
  /// a_n = pos(n) for n >= 1 and a_{-n} = neg(n); a_0 = a0.
  static FourierCurve from_families(int N, const std::function<cplx(int)>& pos, const std::function<cplx(int)>& neg,
                                    cplx a0 = 0.0);

  cplx operator[](int n) const { return coeffs[static_cast<std::size_t>(n + N)]; }
  cplx& operator[](int n) { return coeffs[static_cast<std::size_t>(n + N)]; }

  /// M equispaced samples, M a power of two with M > 2N.
  std::vector<cplx> synthesize(int M) const;
  /// Direct evaluation of the Laurent polynomial at z (no FFT).
  cplx laurent(cplx z) const;
  cplx laurent_derivative(cplx z) const;
};

inline constexpr double kCoefficientFloor = 1e-15;

/// FFT coefficients of M samples; requires M >= 4N. Throws AliasingDetected
/// when the energy above |n| = N exceeds 1e-8 of the total.
FourierCurve fourier_analyze(const std::vector<cplx>& samples, int N);

/// Fit of log|a_n| ~ c0 + c1 ln n + c2 (ln n)^2 + slope n on one side.
struct SideFit {
  bool absent = false;  // every window coefficient below the floor
  double radius = 0.0;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0, slope = 0.0;
  double residual = 0.0;  // rms of the regression
  int points = 0;
  double l1_partial = 0.0;  // sum of |a_n| on this side
};

struct RadiusEstimate {
  double r_inner = 0.0;  // negative powers converge for |z| > r_inner
  double r_outer = 0.0;  // positive powers converge for |z| < r_outer
  SideFit inner, outer;
};

/// Window defaults to [N/2, N].
RadiusEstimate estimate_radii(const FourierCurve& curve, std::pair<int, int> window = {0, 0});

enum class DirectionKind { GeodesicAnnulus, RayOnly, NoRay };
std::string to_string(DirectionKind k);

struct DirectionClass {
  DirectionKind kind = DirectionKind::NoRay;
  RadiusEstimate evidence;
  bool outer_l1_convergent = false;
};

/// True when the fitted decay of one side is summable on |z| = 1.
bool l1_convergent(const SideFit& fit);

DirectionClass classify_direction(const FourierCurve& curve, double margin = 0.02);

struct Reparametrization {
  double R = 0.0;                   // period of s is 2 pi R
  std::vector<double> theta_of_s;   // theta(s_k), s_k = 2 pi R k / M
  std::vector<cplx> curve_of_s;     // gamma(theta(s_k))
  double closure_error = 0.0;       // |theta(2 pi R) - 2 pi|
};

/// Solves theta' = f(theta) with f given by samples on the curve's grid.
Reparametrization reparametrize_by_field(const std::vector<cplx>& curve, const std::vector<double>& f,
                                         int oversample = 8);

/// Samples of g on |z| = r, where g is the Laurent series of the curve.
/// r = 1 is always allowed; otherwise r must lie in the estimated annulus.
std::vector<cplx> geodesic_evaluate(const FourierCurve& curve, double r, int M = 0);

/// Abel mean sum a_n r^{|n|} e^{i n theta}.
cplx abel_evaluate(const FourierCurve& curve, double r, double theta);

struct LengthProfile {
  std::vector<double> radii, t, lambda;
  std::vector<double> second_differences;  // interior points only, aligned with radii[1..K-2]
};

LengthProfile length_profile(const FourierCurve& curve, const std::vector<double>& radii);

/// Resamples a closed curve at equal arclength with M points.
std::vector<cplx> resample_arclength(const std::vector<cplx>& samples, int M = 0);

struct SecondVariationLength {
  double analytic = 0.0;
  double fd = 0.0;
  double abs_err = 0.0, rel_err = 0.0;
  double richardson_order = 0.0;
  bool exact = false;
  std::vector<double> fd_estimates;  // raw second differences per step
};

/// Curve must be at constant speed; f samples share its grid.
SecondVariationLength second_variation_length(const std::vector<cplx>& arclength_curve, const std::vector<double>& f);

}  // namespace trgeo

#pragma once

#include <string>
#include <vector>

#include "trgeo/curve_lab.hpp"
#include "trgeo/immersion.hpp"

namespace trgeo {

enum class FlowScheme { Spectral, TimeStep };
std::string to_string(FlowScheme s);

struct FlowResult {
  FlowScheme scheme = FlowScheme::Spectral;
  std::vector<double> times;
  std::vector<Immersion> immersions;
  double amplification = 1.0;      // largest growth factor of any retained mode (spectral) or of the energy (timestep)
  double geodesic_residual = 0.0;  // max |d iota/dt - J iota_* X| (spectral scheme only)
};

inline constexpr double kAmpMax = 1e6;

/// Holomorphic continuation along X. Supported fields: c d/dtheta_k with c
/// constant, and for curves any nonvanishing f d/dtheta (through
/// reparametrize_by_field). Times may be negative.
FlowResult flow_spectral(const Immersion& im, const VectorFieldOnL& x, const std::vector<double>& times);

struct TimestepOptions {
  double dt = 0.0;              // 0 picks a stable step
  double filter = 2.0 / 3.0;    // retained fraction of the resolvable band
  double tail_abort = 1e-3;     // energy share of the upper half of the retained band
};

/// RK4 on d iota/dt = J iota_* X with spectral derivatives; times must be
/// non-negative and increasing. The initial state is filtered too.
FlowResult flow_timestep(const Immersion& im, const VectorFieldOnL& x, const std::vector<double>& times,
                         const TimestepOptions& opts = {});

/// Max over samples of |d/dt(iota_* X) - X(J iota_* X)|, t-derivative by
/// Lagrange interpolation through up to five samples.
double commutator_check(const FlowResult& flow, const VectorFieldOnL& x);

struct BvpResult {
  bool converged = false;
  double rho = 0.0;
  FourierCurve g;                    // Laurent coefficients of the map
  double outer_misfit = 0.0;         // max |g(e^{i a}) - gamma_0|
  double inner_misfit = 0.0;         // max |g(rho e^{i a}) - gamma_1|
  std::vector<double> history;       // sum of squared residuals per accepted iterate
  int iterations = 0;
};

/// Annulus {rho < |z| < 1} mapped onto the region between outer and inner.
BvpResult solve_bvp_annulus(const FourierCurve& outer, const FourierCurve& inner, int modes, int max_iter = 200);

/// Winding test: every sample of inner lies inside outer and the curves do not cross.
bool nested(const FourierCurve& outer, const FourierCurve& inner);

/// Max point discrepancy between the two schemes at ten equal steps up to t_final.
double uniqueness_compare(const Immersion& im, const VectorFieldOnL& x, double t_final);

}  // namespace trgeo

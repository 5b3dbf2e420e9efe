#pragma once

#include <complex>
#include <span>
#include <vector>

#include "trgeo/grid.hpp"

namespace trgeo::spectral {

using cplx = std::complex<double>;

/// Signed wavenumber of FFT bin `index` on an `n`-point grid; the Nyquist bin
/// maps to +n/2.
inline int wavenumber(int index, int n) { return index <= n / 2 ? index : index - n; }

/// In-place DFT over a 1-D or 2-D row-major array. sign = -1 is the forward
/// transform; no normalization is applied in either direction.
void fft(std::span<cplx> data, std::span<const int> dims, int sign);

/// Forward transform normalized so that data = sum_k c_k e^{i k . theta}.
std::vector<cplx> analyze(std::span<const cplx> samples, const GridTorus& grid);
/// Inverse of analyze.
std::vector<cplx> synthesize(std::span<const cplx> coeffs, const GridTorus& grid);

/// Derivative of `order` along `axis` of a complex field with `components`
/// values per node (node-major). Nyquist modes are dropped for odd orders.
std::vector<cplx> derivative(std::span<const cplx> field, const GridTorus& grid, int components, int axis,
                             int order = 1);

/// Same for real fields; components are processed in pairs as complex numbers.
std::vector<double> derivative(std::span<const double> field, const GridTorus& grid, int components, int axis,
                               int order = 1);

/// Trigonometric interpolant of periodic samples, evaluated at arbitrary angles.
class PeriodicInterpolant {
 public:
  PeriodicInterpolant(std::span<const cplx> samples, const GridTorus& grid);
  cplx operator()(double theta0, double theta1 = 0.0) const;

 private:
  GridTorus grid_;
  std::vector<cplx> coeffs_;
};

/// Samples of f(theta + delta e_axis) on the same grid, by phase shift.
std::vector<cplx> shift(std::span<const cplx> field, const GridTorus& grid, int components, int axis, double delta);

/// Gathers complex components: out[node] = field[node*components + c].
std::vector<cplx> component(std::span<const cplx> field, std::size_t nodes, int components, int c);

}  // namespace trgeo::spectral

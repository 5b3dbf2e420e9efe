#include "trgeo/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace trgeo::spectral {

namespace {

// fftw planning is not thread-safe; execution with the new-array interface is.
std::mutex g_plan_mutex;

fftw_plan plan_for(std::span<const int> dims, int sign) {
  using Key = std::tuple<int, int, int>;
  static std::map<Key, fftw_plan> cache;
  const int d0 = dims[0];
  const int d1 = dims.size() > 1 ? dims[1] : 1;
  const Key key{d0, d1, sign};
  std::lock_guard lock(g_plan_mutex);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const std::size_t total = static_cast<std::size_t>(d0) * d1;
  auto* buf = fftw_alloc_complex(total);
  fftw_plan plan = d1 == 1 ? fftw_plan_dft_1d(d0, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
                           : fftw_plan_dft_2d(d0, d1, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  cache.emplace(key, plan);
  return plan;
}

std::array<int, 2> dims_of(const GridTorus& grid) { return {grid.sizes[0], grid.dim == 2 ? grid.sizes[1] : 1}; }

}  // namespace

void fft(std::span<cplx> data, std::span<const int> dims, int sign) {
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  if (data.size() != total) fail(ErrorKind::InvalidArgument, "fft size mismatch");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(dims, sign), ptr, ptr);
}

std::vector<cplx> analyze(std::span<const cplx> samples, const GridTorus& grid) {
  std::vector<cplx> c(samples.begin(), samples.end());
  const auto dims = dims_of(grid);
  fft(c, dims, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(grid.node_count());
  for (auto& v : c) v *= scale;
  return c;
}

std::vector<cplx> synthesize(std::span<const cplx> coeffs, const GridTorus& grid) {
  std::vector<cplx> v(coeffs.begin(), coeffs.end());
  const auto dims = dims_of(grid);
  fft(v, dims, FFTW_BACKWARD);
  return v;
}

std::vector<cplx> component(std::span<const cplx> field, std::size_t nodes, int components, int c) {
  std::vector<cplx> out(nodes);
  for (std::size_t k = 0; k < nodes; ++k) out[k] = field[k * components + c];
  return out;
}

std::vector<cplx> derivative(std::span<const cplx> field, const GridTorus& grid, int components, int axis,
                             int order) {
  const std::size_t nodes = grid.node_count();
  if (field.size() != nodes * static_cast<std::size_t>(components))
    fail(ErrorKind::InvalidArgument, "derivative: field size mismatch");
  if (axis < 0 || axis >= grid.dim) fail(ErrorKind::InvalidArgument, "derivative: bad axis");
  const int n_axis = grid.sizes[axis];
  // multiplier (i k)^order per wavenumber along the axis
  std::vector<cplx> mult(n_axis);
  for (int idx = 0; idx < n_axis; ++idx) {
    const int k = wavenumber(idx, n_axis);
    if (order % 2 == 1 && 2 * k == n_axis) {
      mult[idx] = 0.0;
      continue;
    }
    mult[idx] = std::pow(cplx(0.0, static_cast<double>(k)), order);
  }
  std::vector<cplx> out(field.size());
  for (int c = 0; c < components; ++c) {
    auto coeffs = analyze(component(field, nodes, components, c), grid);
    for (std::size_t node = 0; node < nodes; ++node) {
      const auto mi = grid.multi_index(node);
      coeffs[node] *= mult[mi[axis]];
    }
    const auto values = synthesize(coeffs, grid);
    for (std::size_t node = 0; node < nodes; ++node) out[node * components + c] = values[node];
  }
  return out;
}

std::vector<double> derivative(std::span<const double> field, const GridTorus& grid, int components, int axis,
                               int order) {
  const std::size_t nodes = grid.node_count();
  const int pairs = (components + 1) / 2;
  std::vector<cplx> packed(nodes * pairs);
  for (std::size_t node = 0; node < nodes; ++node)
    for (int p = 0; p < pairs; ++p) {
      const double re = field[node * components + 2 * p];
      const double im = 2 * p + 1 < components ? field[node * components + 2 * p + 1] : 0.0;
      packed[node * pairs + p] = {re, im};
    }
  const auto d = derivative(std::span<const cplx>(packed), grid, pairs, axis, order);
  std::vector<double> out(field.size());
  for (std::size_t node = 0; node < nodes; ++node)
    for (int p = 0; p < pairs; ++p) {
      out[node * components + 2 * p] = d[node * pairs + p].real();
      if (2 * p + 1 < components) out[node * components + 2 * p + 1] = d[node * pairs + p].imag();
    }
  return out;
}

PeriodicInterpolant::PeriodicInterpolant(std::span<const cplx> samples, const GridTorus& grid)
    : grid_(grid), coeffs_(analyze(samples, grid)) {}

cplx PeriodicInterpolant::operator()(double theta0, double theta1) const {
  // Nyquist bins enter as cosines so real data interpolates to real values.
  auto basis = [](int idx, int n, double theta) -> cplx {
    const int k = wavenumber(idx, n);
    if (2 * k == n) return std::cos(k * theta);
    return std::polar(1.0, k * theta);
  };
  const int n0 = grid_.sizes[0];
  std::vector<cplx> b0(n0);
  for (int i = 0; i < n0; ++i) b0[i] = basis(i, n0, theta0);
  if (grid_.dim == 1) {
    cplx acc = 0.0;
    for (int i = 0; i < n0; ++i) acc += coeffs_[i] * b0[i];
    return acc;
  }
  const int n1 = grid_.sizes[1];
  std::vector<cplx> b1(n1);
  for (int j = 0; j < n1; ++j) b1[j] = basis(j, n1, theta1);
  cplx acc = 0.0;
  for (int i = 0; i < n0; ++i) {
    cplx row = 0.0;
    for (int j = 0; j < n1; ++j) row += coeffs_[grid_.index(i, j)] * b1[j];
    acc += row * b0[i];
  }
  return acc;
}

std::vector<cplx> shift(std::span<const cplx> field, const GridTorus& grid, int components, int axis, double delta) {
  const std::size_t nodes = grid.node_count();
  const int n_axis = grid.sizes[axis];
  std::vector<cplx> out(field.size());
  for (int c = 0; c < components; ++c) {
    auto coeffs = analyze(component(field, nodes, components, c), grid);
    for (std::size_t node = 0; node < nodes; ++node) {
      const int k = wavenumber(grid.multi_index(node)[axis], n_axis);
      coeffs[node] *= 2 * k == n_axis ? cplx(std::cos(k * delta)) : std::polar(1.0, k * delta);
    }
    const auto values = synthesize(coeffs, grid);
    for (std::size_t node = 0; node < nodes; ++node) out[node * components + c] = values[node];
  }
  return out;
}

}  // namespace trgeo::spectral

#pragma once

#include <array>
#include <cstddef>

#include "trgeo/error.hpp"
#include "trgeo/numerics.hpp"

namespace trgeo {

/// Uniform periodic grid on the n-torus (n = 1 or 2). Node (i0, i1) is stored
/// at index i0 * sizes[1] + i1; for n = 1 sizes[1] == 1.
struct GridTorus {
  int dim = 1;
  std::array<int, 2> sizes{16, 1};

  static GridTorus circle(int n);
  static GridTorus torus(int n0, int n1);

  std::size_t node_count() const { return static_cast<std::size_t>(sizes[0]) * sizes[1]; }
  double spacing(int axis) const { return kTwoPi / sizes[axis]; }
  double cell_area() const { return dim == 1 ? spacing(0) : spacing(0) * spacing(1); }
  double angle(int axis, int index) const { return spacing(axis) * index; }
  std::size_t index(int i0, int i1 = 0) const { return static_cast<std::size_t>(i0) * sizes[1] + i1; }
  std::array<int, 2> multi_index(std::size_t node) const {
    return {static_cast<int>(node / sizes[1]), static_cast<int>(node % sizes[1])};
  }
  std::array<double, 2> angles(std::size_t node) const {
    const auto mi = multi_index(node);
    return {angle(0, mi[0]), dim == 2 ? angle(1, mi[1]) : 0.0};
  }

  bool operator==(const GridTorus&) const = default;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline GridTorus GridTorus::circle(int n) {
  if (!is_power_of_two(n) || n < 16) fail(ErrorKind::InvalidArgument, "grid size must be a power of two >= 16");
  return GridTorus{1, {n, 1}};
}

inline GridTorus GridTorus::torus(int n0, int n1) {
  if (!is_power_of_two(n0) || n0 < 16 || !is_power_of_two(n1) || n1 < 16)
    fail(ErrorKind::InvalidArgument, "grid sizes must be powers of two >= 16");
  return GridTorus{2, {n0, n1}};
}

}  // namespace trgeo

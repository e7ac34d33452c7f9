#pragma once

#include <vector>

#include "finitenet/grid.hpp"
#include "finitenet/types.hpp"

namespace finitenet {

/// Offsets -radius..+radius.
std::vector<int> centered_offsets(int radius);

/// Taylor moment of an FDM stencil point: offset^m / m!.
double point_moment(int offset, int m);

/// Moment of a unit-width cell average: integral of x^m / m! over
/// [offset - 1/2, offset + 1/2].
double cell_average_moment(int offset, int m);

/// Unique coefficients c with sum_k c_k k^m / m! = delta_{m,d} for
/// m = 0..width-1 (the maximum-order finite-difference stencil). Applied as
/// (sum_k c_k u_{i+k}) / dx^d. Rejects derivative_order >= width or repeated
/// offsets.
Vec max_order_fdm_coefficients(int derivative_order,
                               const std::vector<int>& offsets);

/// Unique coefficients reconstructing the point value at the right cell face
/// (offset +1/2) from `width` cell averages, exact for polynomials up to
/// degree width-1. For offsets -2..2 this is the classical fifth-order FV
/// interpolation (2, -13, 47, 27, -3)/60.
Vec max_order_face_coefficients(const std::vector<int>& offsets);

/// Per-point coefficient sets over a fixed offset pattern. `values` row i
/// holds the set applied at grid point i; the inner product is divided by
/// dx^dx_power.
struct StencilCoefficients {
  std::vector<int> offsets;
  Mat values;  // n_points x width
  int dx_power = 0;
};

/// out_i = (sum_k values(i,k) * u_{i+offsets[k]}) / dx^dx_power, periodic.
Vec apply_stencil(const Vec& u, const Mat& values,
                  const std::vector<int>& offsets, double dx, int dx_power);
GridField apply_stencil(const GridField& u, const StencilCoefficients& c);

/// Same with one shared coefficient set for every point.
Vec apply_uniform_stencil(const Vec& u, const Vec& coeffs,
                          const std::vector<int>& offsets, double dx,
                          int dx_power);

}  // namespace finitenet

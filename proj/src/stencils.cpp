#include "finitenet/stencils.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace finitenet {

std::vector<int> centered_offsets(int radius) {
  std::vector<int> offsets;
  for (int k = -radius; k <= radius; ++k) offsets.push_back(k);
  return offsets;
}

double point_moment(int offset, int m) {
  double fact = 1.0;
  for (int j = 2; j <= m; ++j) fact *= j;
  return std::pow(static_cast<double>(offset), m) / fact;
}

double cell_average_moment(int offset, int m) {
  double fact = 1.0;
  for (int j = 2; j <= m; ++j) fact *= j;
  const double hi = offset + 0.5, lo = offset - 0.5;
  return (std::pow(hi, m + 1) - std::pow(lo, m + 1)) / ((m + 1) * fact);
}

namespace {

void check_offsets_distinct(const std::vector<int>& offsets) {
  std::set<int> seen(offsets.begin(), offsets.end());
  if (seen.size() != offsets.size()) {
    throw std::invalid_argument("stencil offsets must be distinct");
  }
}

}  // namespace

Vec max_order_fdm_coefficients(int derivative_order,
                               const std::vector<int>& offsets) {
  const int width = static_cast<int>(offsets.size());
  if (derivative_order < 0 || derivative_order >= width) {
    throw std::invalid_argument(
        "max_order_fdm_coefficients: need derivative_order < stencil width");
  }
  check_offsets_distinct(offsets);
  Mat moments(width, width);
  Vec rhs = Vec::Zero(width);
  for (int m = 0; m < width; ++m) {
    for (int k = 0; k < width; ++k) moments(m, k) = point_moment(offsets[k], m);
  }
  rhs[derivative_order] = 1.0;
  return moments.fullPivLu().solve(rhs);
}

Vec max_order_face_coefficients(const std::vector<int>& offsets) {
  const int width = static_cast<int>(offsets.size());
  check_offsets_distinct(offsets);
  Mat moments(width, width);
  Vec rhs(width);
  for (int m = 0; m < width; ++m) {
    for (int k = 0; k < width; ++k) {
      moments(m, k) = cell_average_moment(offsets[k], m);
    }
    rhs[m] = point_moment(1, m) * std::pow(0.5, m);  // x^m / m! at x = 1/2
  }
  return moments.fullPivLu().solve(rhs);
}

Vec apply_stencil(const Vec& u, const Mat& values,
                  const std::vector<int>& offsets, double dx, int dx_power) {
  const int n = static_cast<int>(u.size());
  const int width = static_cast<int>(offsets.size());
  if (values.rows() != n || values.cols() != width) {
    throw std::invalid_argument("apply_stencil: coefficient shape mismatch");
  }
  const double scale = 1.0 / std::pow(dx, dx_power);
  Vec out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = 0; k < width; ++k) {
      acc += values(i, k) * u[wrap_index(i + offsets[k], n)];
    }
    out[i] = acc * scale;
  }
  return out;
}

GridField apply_stencil(const GridField& u, const StencilCoefficients& c) {
  return GridField{u.grid, apply_stencil(u.values, c.values, c.offsets,
                                         u.grid.dx, c.dx_power)};
}

Vec apply_uniform_stencil(const Vec& u, const Vec& coeffs,
                          const std::vector<int>& offsets, double dx,
                          int dx_power) {
  const int n = static_cast<int>(u.size());
  const int width = static_cast<int>(offsets.size());
  if (coeffs.size() != width) {
    throw std::invalid_argument("apply_uniform_stencil: width mismatch");
  }
  const double scale = 1.0 / std::pow(dx, dx_power);
  Vec out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = 0; k < width; ++k) {
      acc += coeffs[k] * u[wrap_index(i + offsets[k], n)];
    }
    out[i] = acc * scale;
  }
  return out;
}

}  // namespace finitenet

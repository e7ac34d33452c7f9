#pragma once

#include <Eigen/Dense>

namespace finitenet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Every scheme in this library works on a 5-point stencil i-2..i+2.
inline constexpr int kStencilRadius = 2;
inline constexpr int kStencilWidth = 2 * kStencilRadius + 1;

inline int wrap_index(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace finitenet

#pragma once

#include <array>

#include "finitenet/types.hpp"

namespace finitenet {

enum class FaceBias { Left, Right };

constexpr double kWenoEpsilon = 1e-6;

struct Weno5Eval {
  double value = 0.0;
  std::array<double, 3> weights{};  // nonlinear weights, sum to 1
};

/// Fifth-order WENO reconstruction of the value at the face between window
/// cells 2 and 3 from the five cell averages w[0..4] (cells j-2..j+2 of
/// cell j, face j+1/2). Jiang-Shu smoothness indicators, power 2.
Weno5Eval weno5_from_window(const std::array<double, 5>& w,
                            double eps = kWenoEpsilon);

/// Face values for every face i+1/2 of a periodic field of cell averages.
/// Left bias gives the state reconstructed from cells i-2..i+2 (the upwind
/// side for positive speeds); Right bias mirrors the stencil to cells
/// i-1..i+3.
Vec weno5_face_values(const Vec& ubar, FaceBias bias,
                      double eps = kWenoEpsilon);

}  // namespace finitenet

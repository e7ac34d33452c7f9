#pragma once

#include "finitenet/types.hpp"

namespace finitenet {

/// One step of the three-stage, third-order strong-stability-preserving
/// Runge-Kutta method:
///
///   u1 = u + dt L(u)
///   u2 = 3/4 u + 1/4 u1 + 1/4 dt L(u1)
///   u+ = 1/3 u + 2/3 u2 + 2/3 dt L(u2)
///
/// L is any callable Vec -> Vec.
template <class Rhs>
Vec ssprk3_step(Rhs&& rhs, const Vec& u, double dt) {
  const Vec u1 = u + dt * rhs(u);
  const Vec u2 = 0.75 * u + 0.25 * u1 + 0.25 * dt * rhs(u1);
  return (1.0 / 3.0) * u + (2.0 / 3.0) * u2 + (2.0 / 3.0) * dt * rhs(u2);
}

}  // namespace finitenet

#pragma once

#include "finitenet/types.hpp"

namespace finitenet {

enum class NumericalFlux { Godunov, LocalLaxFriedrichs };

inline double burgers_flux(double u) { return 0.5 * u * u; }

/// Exact Riemann (Godunov) flux for f(u) = u^2/2: the convex flux with a
/// sonic point at u = 0.
inline double godunov_flux_burgers(double ul, double ur) {
  const double a = ul > 0.0 ? ul : 0.0;
  const double b = ur < 0.0 ? ur : 0.0;
  const double fa = burgers_flux(a);
  const double fb = burgers_flux(b);
  return fa >= fb ? fa : fb;
}

inline double lax_friedrichs_flux_burgers(double ul, double ur, double alpha) {
  return 0.5 * (burgers_flux(ul) + burgers_flux(ur)) - 0.5 * alpha * (ur - ul);
}

/// Conservative update du_i/dt = -(F_{i+1/2} - F_{i-1/2}) / dx where
/// face_flux[i] holds F_{i+1/2}, periodic.
inline Vec flux_divergence(const Vec& face_flux, double dx) {
  const int n = static_cast<int>(face_flux.size());
  Vec rhs(n);
  rhs[0] = -(face_flux[0] - face_flux[n - 1]) / dx;
  for (int i = 1; i < n; ++i) {
    rhs[i] = -(face_flux[i] - face_flux[i - 1]) / dx;
  }
  return rhs;
}

}  // namespace finitenet

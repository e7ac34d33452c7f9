#pragma once

#include <optional>
#include <vector>

#include "finitenet/grid.hpp"
#include "finitenet/pde.hpp"
#include "finitenet/types.hpp"

namespace finitenet {

struct SolveResult {
  Trajectory traj;
  // Index of the first non-finite frame; the trajectory retains the finite
  // frames before it.
  std::optional<int> blowup_frame;
};

/// Fixed-stencil semi-discretization of the KS right-hand side
///   du/dt = -(nu u_xxxx + u_xx + 1/2 (u^2)_x),
/// with maximum-order 5-point stencils for the first and second derivatives
/// and a centered stencil of configurable width for the fourth.
struct KsScheme {
  double nu = 1.0;
  std::vector<int> offsets5;
  std::vector<int> offsets_d4;
  Vec c1, c2, c4;

  Vec rhs(const Vec& u, double dx) const;
};

KsScheme make_ks_scheme(double nu, int d4_width);

/// Largest dt for which SSPRK3 applied to the linearized scheme is stable
/// (negative real axis bound 2.51), from the discrete Fourier symbols.
double ks_linear_stable_dt(const KsScheme& scheme, double dx);

/// Baseline semi-discretization: WENO5 reconstruction with the upwind /
/// Godunov flux for advection and Burgers, the KsScheme for KS.
Vec baseline_rhs(const PDESpec& spec, const NumericsConfig& numerics,
                 const Vec& u, double dx);

/// Roll the baseline scheme forward n_steps with SSPRK3 at fixed dt,
/// recording every frame. Stops at the first non-finite frame.
SolveResult baseline_solve(const PDESpec& spec, const NumericsConfig& numerics,
                           const GridField& ic, double dt, int n_steps);

/// The fixed maximum-order linear scheme on the 5-point stencil: the scheme
/// the learned solver reproduces when its head outputs zero. FVM equations
/// use the unique fifth-order face interpolation (mirrored for the right
/// state) with the Godunov flux; KS uses the maximum-order stencils with the
/// 5-point u_xxxx.
Vec linear_scheme_rhs(const PDESpec& spec, const Vec& u, double dx);
SolveResult linear_scheme_solve(const PDESpec& spec, const GridField& ic,
                                double dt, int n_steps);

/// Advance a field of the given equation by `time` with sub-cycled SSPRK3,
/// respecting the scheme's own stability limit (advective CFL for FVM, the
/// linear bound and CFL for KS). Returns false if the state went non-finite.
bool evolve_fine(const PDESpec& spec, const NumericsConfig& numerics, Vec& u,
                 double dx, double time);

}  // namespace finitenet

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "finitenet/baseline.hpp"
#include "finitenet/grid.hpp"
#include "finitenet/pde.hpp"

namespace finitenet {

/// Piecewise-constant function on the periodic domain: value amplitudes[j]
/// on [breakpoints[j-1], breakpoints[j]) with amplitudes[0] starting at 0.
/// K breakpoints carry K+1 amplitudes; the wrap at 0/L is a jump whenever
/// the first and last amplitudes differ.
struct PiecewiseConstantDescriptor {
  std::vector<double> breakpoints;  // sorted, in [0, L)
  std::vector<double> amplitudes;   // breakpoints.size() + 1 values

  double value_at(double x, double domain_length) const;
  /// Exact integral over [lo, hi] (may wrap around the domain).
  double integral(double lo, double hi, double domain_length) const;
};

/// Truncated Fourier series sum_k s_k sin(2 pi k x / L) + c_k cos(...).
struct FourierDescriptor {
  std::vector<double> sin_coeffs;  // index k-1 holds mode k
  std::vector<double> cos_coeffs;

  double value_at(double x, double domain_length) const;
  double cell_average(double lo, double hi, double domain_length) const;
};

/// A state drawn from the KS chaotic attractor, replayable from the shared
/// pool trajectory (offset_time into it) or a per-seed burn-in run.
struct AttractorDescriptor {
  bool from_pool = true;
  double offset_time = 0.0;  // into the pool span (pool mode)
  double burn_in = 0.0;      // per-seed mode
};

using ICDescriptor = std::variant<PiecewiseConstantDescriptor,
                                  FourierDescriptor, AttractorDescriptor>;

struct InitialCondition {
  GridField field;  // on the fine (reference) grid
  PDEKind kind = PDEKind::Advection;
  std::uint64_t seed = 0;
  ICDescriptor descriptor;
};

/// Distribution settings for random initial conditions.
struct IcConfig {
  int adv_breakpoints_min = 2;
  int adv_breakpoints_max = 6;
  double adv_amplitude_lo = -1.0;
  double adv_amplitude_hi = 1.0;
  int burgers_modes = 4;  // coefficients of mode k uniform in [-1/k, 1/k]
  int ks_seed_modes = 3;
  double ks_seed_amplitude = 0.5;
  double ks_burn_in = 50.0;
  bool ks_use_pool = true;
  double ks_pool_span = 400.0;
  double ks_pool_snapshot_dt = 1.0;
  std::uint64_t ks_pool_seed = 20240501;
};

/// Draw a random initial condition on the fine grid. Deterministic in
/// (spec, config, seed, grid). Advection: piecewise-constant with K
/// breakpoints; Burgers: random truncated Fourier series (exact cell
/// averages); KS: a state on the chaotic attractor.
InitialCondition sample_initial_condition(const PDESpec& spec,
                                          const IcConfig& ic_config,
                                          const NumericsConfig& numerics,
                                          std::uint64_t seed,
                                          const Grid& fine_grid);

/// Exact advection solution f(x - a t) evaluated on `grid`: cell averages
/// in FVM mode, point samples in FDM mode. Requires a piecewise-constant
/// descriptor.
GridField advection_exact(const InitialCondition& ic, double wavespeed,
                          double t, const Grid& grid, Discretization mode);

/// Evaluate a functional descriptor on a grid (exact cell averages in FVM
/// mode, point samples in FDM mode). Attractor descriptors have no
/// functional form and are rejected.
GridField evaluate_descriptor(const ICDescriptor& descriptor, const Grid& grid,
                              Discretization mode);

/// Approximately-exact solution emitted at the coarse cadence dt:
/// advection uses the analytic translation (no numerical solve); Burgers
/// runs WENO5 FVM and KS the fourth-order FDM scheme on the `refine`-times
/// finer mesh, sub-cycling to respect their own stability limits, and
/// restricts each frame (cell-block averages for FVM, point samples for
/// FDM).
SolveResult reference_trajectory(const PDESpec& spec,
                                 const NumericsConfig& numerics,
                                 const InitialCondition& ic, double dt,
                                 int n_steps, int refine);

/// Descriptor records serialize to a small key = value text block so any
/// run can be replayed.
void write_ic_descriptor(std::ostream& os, const InitialCondition& ic);
void write_ic_descriptor(const std::string& path, const InitialCondition& ic);

/// Location of the on-disk cache for KS attractor pools ("" disables disk
/// caching; pools are always memoized in-process).
void set_pool_cache_dir(const std::string& dir);

}  // namespace finitenet

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "finitenet/types.hpp"

namespace finitenet {

/// Uniform periodic 1D grid. Index i and i + n_cells refer to the same
/// location; dx * n_cells == domain_length.
struct Grid {
  int n_cells = 0;
  double domain_length = 0.0;
  double dx = 0.0;

  bool operator==(const Grid&) const = default;
};

/// Throws std::invalid_argument if n_cells < 5 (a 5-point stencil cannot
/// fit) or domain_length <= 0.
Grid make_grid(double domain_length, int n_cells);

/// Solution values on a periodic grid. FVM equations store cell averages,
/// FDM equations store point values; the container does not care.
struct GridField {
  Grid grid;
  Vec values;
};

GridField make_field(Grid grid, Vec values);

enum class RestrictionMode { CellAverage, PointSample };

/// Downsample a fine field onto a grid coarsened by `factor`. CellAverage
/// averages each block of `factor` fine cells; PointSample takes the value
/// at each block start.
GridField restrict_field(const GridField& fine, int factor,
                         RestrictionMode mode);

/// Sum of |u_i - u_{i-1}| with periodic closure (the i = 0 term pairs the
/// first and last cells).
double total_variation(const Vec& values);
double total_variation(const GridField& u);

/// Space-time solution: frame k holds the field at time k * dt.
struct Trajectory {
  Grid grid;
  double dt = 0.0;
  std::vector<Vec> frames;
};

/// Mean over every (space, time) point of the squared difference, frame 0
/// included. Rejects mismatched grids, dt, or frame counts.
double trajectory_mse(const Trajectory& a, const Trajectory& b);

/// Columnar text format: header `t,x_0,...,x_{N-1}`, one row per frame,
/// values printed with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is, double domain_length);
Trajectory read_trajectory_csv(const std::string& path, double domain_length);

}  // namespace finitenet

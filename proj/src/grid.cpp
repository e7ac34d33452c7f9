#include "finitenet/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace finitenet {

Grid make_grid(double domain_length, int n_cells) {
  if (n_cells < kStencilWidth) {
    throw std::invalid_argument("make_grid: n_cells must be at least " +
                                std::to_string(kStencilWidth));
  }
  if (!(domain_length > 0.0)) {
    throw std::invalid_argument("make_grid: domain_length must be positive");
  }
  return Grid{n_cells, domain_length, domain_length / n_cells};
}

GridField make_field(Grid grid, Vec values) {
  if (values.size() != grid.n_cells) {
    throw std::invalid_argument("make_field: values length " +
                                std::to_string(values.size()) +
                                " does not match grid n_cells " +
                                std::to_string(grid.n_cells));
  }
  return GridField{grid, std::move(values)};
}

GridField restrict_field(const GridField& fine, int factor,
                         RestrictionMode mode) {
  if (factor < 1) throw std::invalid_argument("restrict_field: factor >= 1");
  const int n_fine = fine.grid.n_cells;
  if (n_fine % factor != 0) {
    throw std::invalid_argument(
        "restrict_field: n_cells not divisible by factor");
  }
  const int n_coarse = n_fine / factor;
  Grid coarse = make_grid(fine.grid.domain_length, n_coarse);
  Vec out(n_coarse);
  if (mode == RestrictionMode::CellAverage) {
    for (int i = 0; i < n_coarse; ++i) {
      out[i] = fine.values.segment(i * factor, factor).mean();
    }
  } else {
    for (int i = 0; i < n_coarse; ++i) out[i] = fine.values[i * factor];
  }
  return GridField{coarse, std::move(out)};
}

double total_variation(const Vec& values) {
  const auto n = values.size();
  double tv = std::abs(values[0] - values[n - 1]);
  for (Eigen::Index i = 1; i < n; ++i) {
    tv += std::abs(values[i] - values[i - 1]);
  }
  return tv;
}

double total_variation(const GridField& u) { return total_variation(u.values); }

double trajectory_mse(const Trajectory& a, const Trajectory& b) {
  if (!(a.grid == b.grid) || a.dt != b.dt ||
      a.frames.size() != b.frames.size()) {
    throw std::invalid_argument("trajectory_mse: shape mismatch");
  }
  if (a.frames.empty()) {
    throw std::invalid_argument("trajectory_mse: empty trajectory");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.frames.size(); ++k) {
    sum += (a.frames[k] - b.frames[k]).squaredNorm();
  }
  return sum / (static_cast<double>(a.frames.size()) * a.grid.n_cells);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (int i = 0; i < traj.grid.n_cells; ++i) os << ",x_" << i;
  os << "\n";
  char buf[40];
  for (std::size_t k = 0; k < traj.frames.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(k) * traj.dt);
    os << buf;
    for (int i = 0; i < traj.grid.n_cells; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", traj.frames[k][i]);
      os << ',' << buf;
    }
    os << "\n";
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_trajectory_csv(os, traj);
}

Trajectory read_trajectory_csv(std::istream& is, double domain_length) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("trajectory csv: missing header");
  }
  int n_cols = 0;
  for (char c : line) n_cols += (c == ',');

  Trajectory traj;
  traj.grid = make_grid(domain_length, n_cols);
  std::vector<double> times;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    times.push_back(std::stod(cell));
    Vec frame(n_cols);
    for (int i = 0; i < n_cols; ++i) {
      if (!std::getline(row, cell, ',')) {
        throw std::runtime_error("trajectory csv: short row");
      }
      frame[i] = std::stod(cell);
    }
    traj.frames.push_back(std::move(frame));
  }
  if (traj.frames.empty()) {
    throw std::runtime_error("trajectory csv: no frames");
  }
  traj.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
  return traj;
}

Trajectory read_trajectory_csv(const std::string& path, double domain_length) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_trajectory_csv(is, domain_length);
}

}  // namespace finitenet

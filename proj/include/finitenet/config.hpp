#pragma once

#include <string>
#include <utility>
#include <vector>

#include "finitenet/training.hpp"

namespace finitenet {

/// Full run configuration: every tunable in the toolkit appears here as a
/// named key, with per-equation defaults. Flat INI-style text files
/// ([section] + key = value) override the defaults; command-line flags
/// override the file.
struct AppConfig {
  PDEKind kind = PDEKind::Advection;
  PDESpec spec;
  int n_cells = 100;
  int refine = 4;
  double dt = 0.0;  // <= 0 resolves automatically from the rules below
  double cfl = 0.5;
  double burgers_wavespeed_bound = 3.0;
  double ks_dt_safety = 0.6;
  IcConfig ic;
  NumericsConfig numerics;
  TrainConfig train;
  int eval_cases = 50;
  double histogram_bin_width = 0.25;
  std::string out_dir = "runs";
  std::string cache_dir = "fncache";
};

AppConfig default_app_config(PDEKind kind);

/// Parse an INI-style config. The equation kind is read first so the
/// remaining keys override kind-specific defaults. Unknown keys are errors.
AppConfig load_app_config(const std::string& path);
AppConfig parse_app_config(const std::string& text);

/// Coarse step size: CFL-based for the FVM equations, a fixed fraction of
/// the linear stability bound (over both the baseline and learned stencil
/// choices) for KS.
double resolve_dt(const AppConfig& config);

ProblemSetup make_setup(const AppConfig& config);

/// Flattened "section.key" = value view, in fixed order (config snapshots,
/// manifests).
std::vector<std::pair<std::string, std::string>> config_items(
    const AppConfig& config);

}  // namespace finitenet

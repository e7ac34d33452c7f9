#pragma once

#include <string>

#include "finitenet/flux.hpp"

namespace finitenet {

enum class PDEKind { Advection, Burgers, KuramotoSivashinsky };

enum class Discretization { FVM, FDM };

/// One of the three periodic 1D problems. Advection and Burgers evolve cell
/// averages (FVM); Kuramoto-Sivashinsky evolves point values (FDM).
struct PDESpec {
  PDEKind kind = PDEKind::Advection;
  double wavespeed = 1.0;       // advection only, nonzero
  double hyperviscosity = 1.0;  // KS only, positive
  double domain_length = 0.0;

  Discretization discretization() const {
    return kind == PDEKind::KuramotoSivashinsky ? Discretization::FDM
                                                : Discretization::FVM;
  }
};

PDESpec default_pde_spec(PDEKind kind);
void validate_pde_spec(const PDESpec& spec);

std::string to_string(PDEKind kind);
PDEKind pde_kind_from_string(const std::string& name);

/// Scheme-level numerical choices shared by the baseline and reference
/// solvers.
struct NumericsConfig {
  NumericalFlux flux = NumericalFlux::Godunov;
  double weno_eps = 1e-6;
  // Width of the u_xxxx stencil in the KS baseline. 7 makes every term of
  // the baseline fourth-order; 5 matches the stencil the learned scheme is
  // restricted to.
  int ks_baseline_d4_width = 7;
  double fine_cfl = 0.4;          // advective CFL for fine-grid sub-cycling
  double stability_safety = 0.8;  // fraction of the linear stability bound
};

}  // namespace finitenet

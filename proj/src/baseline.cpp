#include "finitenet/baseline.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "finitenet/ssprk3.hpp"
#include "finitenet/stencils.hpp"
#include "finitenet/weno5.hpp"

namespace finitenet {

Vec KsScheme::rhs(const Vec& u, double dx) const {
  const Vec usq = u.array().square();
  const Vec d1 = apply_uniform_stencil(usq, c1, offsets5, dx, 1);
  const Vec d2 = apply_uniform_stencil(u, c2, offsets5, dx, 2);
  const Vec d4 = apply_uniform_stencil(u, c4, offsets_d4, dx, 4);
  return -(nu * d4 + d2 + 0.5 * d1);
}

KsScheme make_ks_scheme(double nu, int d4_width) {
  if (d4_width < 5 || d4_width % 2 == 0) {
    throw std::invalid_argument("ks scheme: d4 width must be odd and >= 5");
  }
  KsScheme s;
  s.nu = nu;
  s.offsets5 = centered_offsets(kStencilRadius);
  s.offsets_d4 = centered_offsets(d4_width / 2);
  s.c1 = max_order_fdm_coefficients(1, s.offsets5);
  s.c2 = max_order_fdm_coefficients(2, s.offsets5);
  s.c4 = max_order_fdm_coefficients(4, s.offsets_d4);
  return s;
}

double ks_linear_stable_dt(const KsScheme& scheme, double dx) {
  // lambda(theta) = -(nu S4(theta)/dx^4 + S2(theta)/dx^2) over theta in
  // (0, pi]; both stencils are symmetric, so the symbols are real.
  const int samples = 512;
  double most_negative = 0.0;
  for (int j = 1; j <= samples; ++j) {
    const double theta = std::numbers::pi * j / samples;
    double s2 = 0.0, s4 = 0.0;
    for (std::size_t k = 0; k < scheme.offsets5.size(); ++k) {
      s2 += scheme.c2[k] * std::cos(scheme.offsets5[k] * theta);
    }
    for (std::size_t k = 0; k < scheme.offsets_d4.size(); ++k) {
      s4 += scheme.c4[k] * std::cos(scheme.offsets_d4[k] * theta);
    }
    const double lambda = -(scheme.nu * s4 / std::pow(dx, 4) + s2 / (dx * dx));
    most_negative = std::min(most_negative, lambda);
  }
  if (most_negative >= 0.0) return std::numeric_limits<double>::infinity();
  return 2.51 / (-most_negative);
}

namespace {

Vec weno_fvm_rhs(const PDESpec& spec, const NumericsConfig& numerics,
                 const Vec& u, double dx) {
  const int n = static_cast<int>(u.size());
  Vec flux(n);
  if (spec.kind == PDEKind::Advection) {
    const double a = spec.wavespeed;
    const Vec face = weno5_face_values(
        u, a >= 0.0 ? FaceBias::Left : FaceBias::Right, numerics.weno_eps);
    flux = a * face;
  } else {
    const Vec left = weno5_face_values(u, FaceBias::Left, numerics.weno_eps);
    const Vec right = weno5_face_values(u, FaceBias::Right, numerics.weno_eps);
    if (numerics.flux == NumericalFlux::Godunov) {
      for (int i = 0; i < n; ++i) {
        flux[i] = godunov_flux_burgers(left[i], right[i]);
      }
    } else {
      const double alpha = u.cwiseAbs().maxCoeff();
      for (int i = 0; i < n; ++i) {
        flux[i] = lax_friedrichs_flux_burgers(left[i], right[i], alpha);
      }
    }
  }
  return flux_divergence(flux, dx);
}

SolveResult roll_scheme(const GridField& ic, double dt, int n_steps,
                        const std::function<Vec(const Vec&)>& rhs) {
  SolveResult out;
  out.traj.grid = ic.grid;
  out.traj.dt = dt;
  out.traj.frames.reserve(n_steps + 1);
  out.traj.frames.push_back(ic.values);
  Vec u = ic.values;
  for (int k = 1; k <= n_steps; ++k) {
    u = ssprk3_step(rhs, u, dt);
    if (!all_finite(u)) {
      out.blowup_frame = k;
      break;
    }
    out.traj.frames.push_back(u);
  }
  return out;
}

}  // namespace

Vec baseline_rhs(const PDESpec& spec, const NumericsConfig& numerics,
                 const Vec& u, double dx) {
  if (spec.kind == PDEKind::KuramotoSivashinsky) {
    const KsScheme scheme =
        make_ks_scheme(spec.hyperviscosity, numerics.ks_baseline_d4_width);
    return scheme.rhs(u, dx);
  }
  return weno_fvm_rhs(spec, numerics, u, dx);
}

SolveResult baseline_solve(const PDESpec& spec, const NumericsConfig& numerics,
                           const GridField& ic, double dt, int n_steps) {
  if (spec.kind == PDEKind::KuramotoSivashinsky) {
    const KsScheme scheme =
        make_ks_scheme(spec.hyperviscosity, numerics.ks_baseline_d4_width);
    const double dx = ic.grid.dx;
    return roll_scheme(ic, dt, n_steps,
                       [&](const Vec& u) { return scheme.rhs(u, dx); });
  }
  const double dx = ic.grid.dx;
  return roll_scheme(ic, dt, n_steps, [&](const Vec& u) {
    return weno_fvm_rhs(spec, numerics, u, dx);
  });
}

Vec linear_scheme_rhs(const PDESpec& spec, const Vec& u, double dx) {
  const int n = static_cast<int>(u.size());
  const auto offsets = centered_offsets(kStencilRadius);
  if (spec.kind == PDEKind::KuramotoSivashinsky) {
    const KsScheme scheme = make_ks_scheme(spec.hyperviscosity, 5);
    return scheme.rhs(u, dx);
  }
  const Vec c = max_order_face_coefficients(offsets);
  Vec left(n), right(n);
  for (int i = 0; i < n; ++i) {
    double vl = 0.0, vr = 0.0;
    for (int k = 0; k < kStencilWidth; ++k) {
      vl += c[k] * u[wrap_index(i + offsets[k], n)];
      vr += c[k] * u[wrap_index(i + 1 - offsets[k], n)];
    }
    left[i] = vl;
    right[i] = vr;
  }
  Vec flux(n);
  if (spec.kind == PDEKind::Advection) {
    const double a = spec.wavespeed;
    flux = a * (a >= 0.0 ? left : right);
  } else {
    for (int i = 0; i < n; ++i) {
      flux[i] = godunov_flux_burgers(left[i], right[i]);
    }
  }
  return flux_divergence(flux, dx);
}

SolveResult linear_scheme_solve(const PDESpec& spec, const GridField& ic,
                                double dt, int n_steps) {
  const double dx = ic.grid.dx;
  return roll_scheme(ic, dt, n_steps, [&](const Vec& u) {
    return linear_scheme_rhs(spec, u, dx);
  });
}

bool evolve_fine(const PDESpec& spec, const NumericsConfig& numerics, Vec& u,
                 double dx, double time) {
  if (time <= 0.0) return true;
  if (spec.kind == PDEKind::KuramotoSivashinsky) {
    const KsScheme scheme =
        make_ks_scheme(spec.hyperviscosity, numerics.ks_baseline_d4_width);
    const double dt_linear =
        numerics.stability_safety * ks_linear_stable_dt(scheme, dx);
    const double max_u = std::max(u.cwiseAbs().maxCoeff(), 1e-8);
    const double dt_allowed =
        std::min(dt_linear, numerics.fine_cfl * dx / max_u);
    const int n_sub = std::max(1, static_cast<int>(std::ceil(time / dt_allowed)));
    const double dt = time / n_sub;
    auto rhs = [&](const Vec& v) { return scheme.rhs(v, dx); };
    for (int s = 0; s < n_sub; ++s) u = ssprk3_step(rhs, u, dt);
  } else {
    const double wave = spec.kind == PDEKind::Advection
                            ? std::abs(spec.wavespeed)
                            : std::max(u.cwiseAbs().maxCoeff(), 1e-8);
    const double dt_allowed = numerics.fine_cfl * dx / std::max(wave, 1e-8);
    const int n_sub = std::max(1, static_cast<int>(std::ceil(time / dt_allowed)));
    const double dt = time / n_sub;
    auto rhs = [&](const Vec& v) { return weno_fvm_rhs(spec, numerics, v, dx); };
    for (int s = 0; s < n_sub; ++s) u = ssprk3_step(rhs, u, dt);
  }
  return all_finite(u);
}

}  // namespace finitenet

#include <array>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "finitenet/baseline.hpp"
#include "finitenet/flux.hpp"
#include "finitenet/rng.hpp"
#include "finitenet/ssprk3.hpp"
#include "finitenet/stencils.hpp"
#include "finitenet/weno5.hpp"

using namespace finitenet;

TEST_CASE("ssprk3 step") {
  SUBCASE("zero dynamics is the identity, exactly") {
    Vec u(3);
    u << 1.0, -2.0, 0.5;
    const Vec out =
        ssprk3_step([](const Vec& v) { return Vec(Vec::Zero(v.size())); }, u, 0.3);
    CHECK((out - u).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("linear dynamics reproduce the cubic Taylor polynomial") {
    // For u' = lambda u one step gives u (1 + z + z^2/2 + z^3/6), z = lambda dt.
    const double lambda = -1.37, dt = 0.21;
    Vec u(1);
    u << 0.83;
    const Vec out =
        ssprk3_step([&](const Vec& v) { return Vec(lambda * v); }, u, dt);
    const double z = lambda * dt;
    const double expect = u[0] * (1 + z + z * z / 2 + z * z * z / 6);
    CHECK(out[0] == doctest::Approx(expect).epsilon(1e-14));
  }

  SUBCASE("third-order convergence on u' = -u") {
    auto rhs = [](const Vec& v) { return Vec(-v); };
    std::vector<double> errs;
    for (double dt : {0.1, 0.05, 0.025}) {
      Vec u(1);
      u << 1.0;
      const int steps = static_cast<int>(std::round(1.0 / dt));
      for (int s = 0; s < steps; ++s) u = ssprk3_step(rhs, u, dt);
      errs.push_back(std::abs(u[0] - std::exp(-1.0)));
    }
    const double order = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    CHECK(order == doctest::Approx(3.0).epsilon(0.07));
    CHECK(order2 == doctest::Approx(3.0).epsilon(0.07));
  }
}

TEST_CASE("weno5 reconstruction") {
  SUBCASE("constant windows return the constant with unit weight sum") {
    const Weno5Eval eval = weno5_from_window({2.5, 2.5, 2.5, 2.5, 2.5});
    CHECK(eval.value == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(eval.weights[0] + eval.weights[1] + eval.weights[2] ==
          doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("linear data is reconstructed exactly") {
    // Cell averages of a linear function equal its cell-center values, and
    // every candidate stencil reproduces linear data.
    const double slope = 0.7, icept = -0.3;
    std::array<double, 5> w;
    for (int k = 0; k < 5; ++k) w[k] = icept + slope * (k - 2);
    const Weno5Eval eval = weno5_from_window(w);
    CHECK(eval.value == doctest::Approx(icept + slope * 0.5).epsilon(1e-12));
  }

  SUBCASE("weights sum to one on rough random data") {
    RngStream rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      std::array<double, 5> w;
      for (auto& x : w) x = rng.uniform(-5.0, 5.0);
      const Weno5Eval eval = weno5_from_window(w);
      CHECK(std::abs(eval.weights[0] + eval.weights[1] + eval.weights[2] - 1.0) <
            1e-14);
    }
  }

  SUBCASE("mirror symmetry of the two biases") {
    // Data symmetric about cell 3 maps face 2+1/2 onto face 3+1/2 under
    // reflection, swapping the bias.
    const int n = 16;
    Vec u(n);
    for (int i = 0; i < n; ++i) {
      const double d = std::min(wrap_index(i - 3, n), n - wrap_index(i - 3, n));
      u[i] = std::exp(-0.3 * d * d);
    }
    const Vec left = weno5_face_values(u, FaceBias::Left);
    const Vec right = weno5_face_values(u, FaceBias::Right);
    CHECK(left[2] == doctest::Approx(right[3]).epsilon(1e-12));
    CHECK(left[3] == doctest::Approx(right[2]).epsilon(1e-12));
  }
}

TEST_CASE("godunov flux for Burgers") {
  SUBCASE("shock moving right: flux of the left state") {
    CHECK(godunov_flux_burgers(1.0, 0.0) == doctest::Approx(0.5));
    CHECK(godunov_flux_burgers(2.0, 1.0) == doctest::Approx(2.0));
  }
  SUBCASE("shock moving left: flux of the right state") {
    CHECK(godunov_flux_burgers(-1.0, -2.0) == doctest::Approx(2.0));
  }
  SUBCASE("transonic rarefaction passes through zero") {
    CHECK(godunov_flux_burgers(-1.0, 1.0) == doctest::Approx(0.0));
  }
  SUBCASE("smooth region reduces to upwind") {
    CHECK(godunov_flux_burgers(0.8, 0.8) == doctest::Approx(0.32));
    CHECK(godunov_flux_burgers(-0.8, -0.8) == doctest::Approx(0.32));
  }
}

TEST_CASE("flux divergence") {
  SUBCASE("equal fluxes telescope to zero") {
    const Vec rhs = flux_divergence(Vec::Constant(12, 3.3), 0.1);
    CHECK(rhs.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("mean of the divergence vanishes on a periodic domain") {
    RngStream rng(4);
    Vec flux(40);
    for (int i = 0; i < 40; ++i) flux[i] = rng.uniform(-2, 2);
    const Vec rhs = flux_divergence(flux, 0.05);
    CHECK(std::abs(rhs.sum()) < 1e-12 * 40 / 0.05);
    CHECK(std::abs(rhs.mean()) < 1e-12);
  }
}

TEST_CASE("baseline solves") {
  SUBCASE("n_steps = 0 returns only the initial condition") {
    const Grid g = make_grid(2.0 * std::numbers::pi, 32);
    PDESpec spec = default_pde_spec(PDEKind::Burgers);
    GridField ic{g, Vec::Constant(32, 0.7)};
    const SolveResult r = baseline_solve(spec, {}, ic, 0.01, 0);
    CHECK(r.traj.frames.size() == 1);
    CHECK_FALSE(r.blowup_frame.has_value());
  }

  SUBCASE("constant data is an exact Burgers solution") {
    const Grid g = make_grid(2.0 * std::numbers::pi, 32);
    PDESpec spec = default_pde_spec(PDEKind::Burgers);
    GridField ic{g, Vec::Constant(32, 0.7)};
    const SolveResult r = baseline_solve(spec, {}, ic, 0.02, 50);
    REQUIRE(r.traj.frames.size() == 51);
    CHECK((r.traj.frames.back().array() - 0.7).abs().maxCoeff() < 1e-13);
  }

  SUBCASE("Burgers baseline conserves the mean each step") {
    const Grid g = make_grid(2.0 * std::numbers::pi, 64);
    PDESpec spec = default_pde_spec(PDEKind::Burgers);
    Vec u0(64);
    for (int i = 0; i < 64; ++i) u0[i] = std::sin(i * g.dx) + 0.3;
    const SolveResult r = baseline_solve(spec, {}, GridField{g, u0}, 0.01, 40);
    REQUIRE_FALSE(r.blowup_frame.has_value());
    for (std::size_t k = 1; k < r.traj.frames.size(); ++k) {
      CHECK(std::abs(r.traj.frames[k].mean() - r.traj.frames[k - 1].mean()) <
            1e-12);
    }
  }

  SUBCASE("KS scheme on a zero field stays zero") {
    const Grid g = make_grid(64.0, 64);
    PDESpec spec = default_pde_spec(PDEKind::KuramotoSivashinsky);
    const SolveResult r =
        baseline_solve(spec, {}, GridField{g, Vec::Zero(64)}, 0.01, 20);
    REQUIRE(r.traj.frames.size() == 21);
    CHECK(r.traj.frames.back().cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("KS linear stability bound is sane") {
    const KsScheme five = make_ks_scheme(1.0, 5);
    const double dx = 0.64;
    const double dt5 = ks_linear_stable_dt(five, dx);
    // 5-point fourth difference peaks at 16/dx^4; the second-derivative
    // term softens it slightly.
    CHECK(dt5 > 0.8 * 2.51 * std::pow(dx, 4) / 16.0);
    CHECK(dt5 < 1.2 * 2.51 * std::pow(dx, 4) / 16.0);
    const KsScheme seven = make_ks_scheme(1.0, 7);
    CHECK(ks_linear_stable_dt(seven, dx) < dt5);
  }

  SUBCASE("blow-up is reported with its frame index") {
    const Grid g = make_grid(64.0, 32);
    PDESpec spec = default_pde_spec(PDEKind::KuramotoSivashinsky);
    RngStream rng(2);
    Vec u0(32);
    for (int i = 0; i < 32; ++i) u0[i] = rng.uniform(-1, 1);
    // dt far beyond the stability limit of the stiff term.
    const SolveResult r = baseline_solve(spec, {}, GridField{g, u0}, 5.0, 50);
    REQUIRE(r.blowup_frame.has_value());
    CHECK(*r.blowup_frame >= 1);
    CHECK(static_cast<int>(r.traj.frames.size()) == *r.blowup_frame);
  }
}

TEST_CASE("linear scheme matches WENO5 linear weights on smooth data") {
  // On very smooth data the WENO weights sit near the linear weights, so the
  // two advection right-hand sides should agree closely (not exactly).
  const Grid g = make_grid(2.0 * std::numbers::pi, 128);
  PDESpec spec = default_pde_spec(PDEKind::Advection);
  Vec u(g.n_cells);
  for (int i = 0; i < g.n_cells; ++i) u[i] = std::sin(i * g.dx);
  const Vec a = baseline_rhs(spec, {}, u, g.dx);
  const Vec b = linear_scheme_rhs(spec, u, g.dx);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-4);
}

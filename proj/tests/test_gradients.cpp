#include <cmath>
#include <functional>

#include "doctest.h"
#include "finitenet/model.hpp"
#include "finitenet/rng.hpp"
#include "finitenet/scheme.hpp"

using namespace finitenet;

namespace {

Vec random_vec(int n, std::uint64_t seed, double scale = 1.0) {
  RngStream rng(seed);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

Mat random_mat(int r, int c, std::uint64_t seed, double scale = 1.0) {
  RngStream rng(seed);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

// Per-coordinate relative error with a small-denominator guard: at step
// 1e-6 the FD oracle itself carries ~1e-11 absolute noise, so coordinates
// below the guard are held to a 1e-10 absolute bound instead.
double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-5});
}

// Central finite differences of a scalar function along every coordinate.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                double step = 1e-6) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double save = xp[i];
    xp[i] = save + step;
    const double fp = f(xp);
    xp[i] = save - step;
    const double fm = f(xp);
    xp[i] = save;
    g[i] = (fp - fm) / (2 * step);
  }
  return g;
}

struct StageProbe {
  LearnedScheme scheme;
  ModelParams params;
  Vec u;
  Mat h0, c0;
  // Random linear functional of the stage outputs, so every output path is
  // exercised at once.
  Vec w_rhs;
  Mat w_h, w_c;
  double w_reg;
};

double stage_objective(const StageProbe& probe, const ModelParams& params,
                       const Vec& u, const Mat& h0, const Mat& c0) {
  StageTape tape;
  learned_stage_forward(probe.scheme, params, u, h0, c0, tape);
  return probe.w_rhs.dot(tape.rhs) + (probe.w_h.array() * tape.h_new.array()).sum() +
         (probe.w_c.array() * tape.c_new.array()).sum() +
         probe.w_reg * tape.dc_raw.squaredNorm();
}

StageProbe make_probe(PDEKind kind, std::uint64_t seed) {
  StageProbe probe{
      make_learned_scheme(default_pde_spec(kind), 3, 4, 1), {}, {}, {}, {}, {},
      {}, {}, 0.0};
  const int n = 8;
  probe.params = initialize_params(probe.scheme.shape, seed, 0.8);
  probe.u = random_vec(n, seed + 1);
  probe.h0 = random_mat(n, 3, seed + 2);
  probe.c0 = random_mat(n, 3, seed + 3);
  probe.w_rhs = random_vec(n, seed + 4);
  probe.w_h = random_mat(n, 3, seed + 5);
  probe.w_c = random_mat(n, 3, seed + 6);
  probe.w_reg = 0.37;
  return probe;
}

void check_stage_gradients(PDEKind kind, std::uint64_t seed) {
  const StageProbe probe = make_probe(kind, seed);
  const int n = static_cast<int>(probe.u.size());

  StageTape tape;
  learned_stage_forward(probe.scheme, probe.params, probe.u, probe.h0,
                        probe.c0, tape);

  ModelParams grads = make_zero_params(probe.scheme.shape);
  Vec u_bar;
  Mat h_prev_bar, c_prev_bar;
  learned_stage_backward(probe.scheme, probe.params, tape, probe.w_rhs,
                         probe.w_h, probe.w_c, probe.w_reg, u_bar, h_prev_bar,
                         c_prev_bar, grads);

  SUBCASE("input field gradient") {
    const Vec fd = fd_gradient(
        [&](const Vec& u) {
          return stage_objective(probe, probe.params, u, probe.h0, probe.c0);
        },
        probe.u);
    for (int i = 0; i < n; ++i) {
      CHECK(rel_err(fd[i], u_bar[i]) < 1e-5);
    }
  }

  SUBCASE("hidden state gradient") {
    Vec h_flat(n * 3);
    for (int i = 0; i < n; ++i) h_flat.segment(i * 3, 3) = probe.h0.row(i);
    const Vec fd = fd_gradient(
        [&](const Vec& hf) {
          Mat h(n, 3);
          for (int i = 0; i < n; ++i) h.row(i) = hf.segment(i * 3, 3);
          return stage_objective(probe, probe.params, probe.u, h, probe.c0);
        },
        h_flat);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(rel_err(fd[i * 3 + j], h_prev_bar(i, j)) < 1e-5);
      }
    }
  }

  SUBCASE("cell state gradient") {
    Vec c_flat(n * 3);
    for (int i = 0; i < n; ++i) c_flat.segment(i * 3, 3) = probe.c0.row(i);
    const Vec fd = fd_gradient(
        [&](const Vec& cf) {
          Mat c(n, 3);
          for (int i = 0; i < n; ++i) c.row(i) = cf.segment(i * 3, 3);
          return stage_objective(probe, probe.params, probe.u, probe.h0, c);
        },
        c_flat);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(rel_err(fd[i * 3 + j], c_prev_bar(i, j)) < 1e-5);
      }
    }
  }

  SUBCASE("parameter gradient") {
    const Vec flat = flatten_params(probe.params);
    const Vec fd = fd_gradient(
        [&](const Vec& f) {
          const ModelParams p = unflatten_params(probe.scheme.shape, f);
          return stage_objective(probe, p, probe.u, probe.h0, probe.c0);
        },
        flat);
    const Vec got = flatten_params(grads);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      worst = std::max(worst, rel_err(fd[i], got[i]));
    }
    CHECK(worst < 1e-5);
  }
}

}  // namespace

TEST_CASE("stage backward matches finite differences: advection") {
  check_stage_gradients(PDEKind::Advection, 101);
}

TEST_CASE("stage backward matches finite differences: burgers") {
  check_stage_gradients(PDEKind::Burgers, 202);
}

TEST_CASE("stage backward matches finite differences: ks") {
  check_stage_gradients(PDEKind::KuramotoSivashinsky, 303);
}

namespace {

struct RolloutProbe {
  LearnedScheme scheme;
  GridField ic;
  std::vector<Vec> ref;  // reference frames 0..T
  double dt;
  int T;
  double lambda;

  double loss(const ModelParams& params,
              std::vector<StepTape>* tapes = nullptr,
              RolloutResult* roll_out = nullptr) const {
    RolloutResult roll = rollout(scheme, params, ic, dt, T, tapes);
    REQUIRE_FALSE(roll.blowup_frame.has_value());
    const double denom =
        static_cast<double>(ic.grid.n_cells) * static_cast<double>(T + 1);
    double mse = 0.0;
    for (int k = 0; k <= T; ++k) {
      mse += (roll.traj.frames[k] - ref[k]).squaredNorm();
    }
    mse /= denom;
    const double reg_norm = 3.0 * T * ic.grid.n_cells;
    if (roll_out != nullptr) *roll_out = roll;
    return mse + lambda * roll.reg_sum / reg_norm;
  }

  Vec analytic_gradient(const ModelParams& params) const {
    std::vector<StepTape> tapes;
    RolloutResult roll;
    (void)loss(params, &tapes, &roll);
    const double denom =
        static_cast<double>(ic.grid.n_cells) * static_cast<double>(T + 1);
    std::vector<Vec> frame_adjoints(T + 1);
    for (int k = 0; k <= T; ++k) {
      frame_adjoints[k] = 2.0 * (roll.traj.frames[k] - ref[k]) / denom;
    }
    const double reg_adjoint = lambda / (3.0 * T * ic.grid.n_cells);
    const ModelParams grads = backprop_rollout(scheme, params, tapes,
                                               frame_adjoints, dt, reg_adjoint);
    return flatten_params(grads);
  }
};

RolloutProbe make_rollout_probe(PDEKind kind, std::uint64_t seed) {
  PDESpec spec = default_pde_spec(kind);
  const int n = 8;
  const Grid g = make_grid(spec.domain_length, n);
  RolloutProbe probe{make_learned_scheme(spec, 3, 4, 1),
                     GridField{g, 0.8 * random_vec(n, seed)},
                     {},
                     0.3 * g.dx,
                     3,
                     0.01};
  if (kind == PDEKind::KuramotoSivashinsky) probe.dt = 0.05;
  for (int k = 0; k <= probe.T; ++k) {
    probe.ref.push_back(0.5 * random_vec(n, seed + 10 + k));
  }
  return probe;
}

void check_rollout_gradients(PDEKind kind, std::uint64_t seed) {
  const RolloutProbe probe = make_rollout_probe(kind, seed);
  const ModelParams params = initialize_params(probe.scheme.shape, seed, 0.8);

  const Vec analytic = probe.analytic_gradient(params);
  const Vec flat = flatten_params(params);
  const Vec fd = fd_gradient(
      [&](const Vec& f) {
        return probe.loss(unflatten_params(probe.scheme.shape, f));
      },
      flat);

  double worst = 0.0;
  Eigen::Index worst_i = 0;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double e = rel_err(fd[i], analytic[i]);
    if (e > worst) {
      worst = e;
      worst_i = i;
    }
  }
  CAPTURE(worst_i);
  CAPTURE(fd[worst_i]);
  CAPTURE(analytic[worst_i]);
  CHECK(worst <= 1e-5);
}

}  // namespace

TEST_CASE("full-rollout parameter gradient matches finite differences: advection") {
  check_rollout_gradients(PDEKind::Advection, 1001);
}

TEST_CASE("full-rollout parameter gradient matches finite differences: burgers") {
  check_rollout_gradients(PDEKind::Burgers, 2002);
}

TEST_CASE("full-rollout parameter gradient matches finite differences: ks") {
  check_rollout_gradients(PDEKind::KuramotoSivashinsky, 3003);
}

TEST_CASE("gradient of the initial condition flows through the rollout") {
  const RolloutProbe probe = make_rollout_probe(PDEKind::Advection, 4004);
  const ModelParams params = initialize_params(probe.scheme.shape, 5, 0.8);

  std::vector<StepTape> tapes;
  RolloutResult roll;
  (void)probe.loss(params, &tapes, &roll);
  const double denom = 8.0 * (probe.T + 1);
  std::vector<Vec> frame_adjoints(probe.T + 1);
  for (int k = 0; k <= probe.T; ++k) {
    frame_adjoints[k] = 2.0 * (roll.traj.frames[k] - probe.ref[k]) / denom;
  }
  Vec ic_bar;
  (void)backprop_rollout(probe.scheme, params, tapes, frame_adjoints, probe.dt,
                         probe.lambda / (3.0 * probe.T * 8), &ic_bar);

  const Vec fd = fd_gradient(
      [&](const Vec& u0) {
        RolloutProbe changed = probe;
        changed.ic.values = u0;
        return changed.loss(params);
      },
      probe.ic.values);
  for (int i = 0; i < 8; ++i) {
    CHECK(rel_err(fd[i], ic_bar[i]) < 1e-5);
  }
}

TEST_CASE("projection transpose is the coefficient-to-head backward map") {
  const LearnedScheme scheme =
      make_learned_scheme(default_pde_spec(PDEKind::Advection), 3, 4, 1);
  const auto& oc = scheme.constraints[0];
  // For C = Chat P^T + q, the pullback of a coefficient adjoint G is G P.
  const Mat G = random_mat(6, 5, 42);
  const Mat pulled = G * oc.projector;
  const Mat expected = G * oc.projector.transpose();
  CHECK((pulled - expected).cwiseAbs().maxCoeff() < 1e-14);  // symmetry
  // Feasible directions are untouched, infeasible directions annihilated.
  const Vec feasible_dir = oc.projector * random_vec(5, 43);
  CHECK(((oc.projector * feasible_dir) - feasible_dir).cwiseAbs().maxCoeff() <
        1e-12);
  const Vec infeasible = oc.A.transpose() * random_vec(static_cast<int>(oc.A.rows()), 44);
  CHECK((oc.projector * infeasible).cwiseAbs().maxCoeff() < 1e-12);
}

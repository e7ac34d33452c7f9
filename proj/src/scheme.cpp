#include "finitenet/scheme.hpp"

#include <cmath>
#include <stdexcept>

#include "finitenet/stencils.hpp"

namespace finitenet {

namespace {

int clamp_order(int requested, int width, int derivative) {
  return std::min(requested, width - derivative);
}

}  // namespace

LearnedScheme make_learned_scheme(const PDESpec& spec, int hidden_dim,
                                  int head_width, int constraint_order) {
  validate_pde_spec(spec);
  if (constraint_order < 1) {
    throw std::invalid_argument("constraint_order must be >= 1");
  }
  LearnedScheme s;
  s.spec = spec;
  s.constraint_order = constraint_order;
  s.offsets = centered_offsets(kStencilRadius);
  const int width = static_cast<int>(s.offsets.size());

  if (spec.discretization() == Discretization::FVM) {
    s.shape = ModelShape{width, hidden_dim, head_width, 1};
    s.constraints.push_back(build_face_constraint_system(
        std::min(constraint_order, width), s.offsets));
    s.c_opt = Mat(1, width);
    s.c_opt.row(0) = max_order_face_coefficients(s.offsets).transpose();
  } else {
    s.shape = ModelShape{width, hidden_dim, head_width, 3};
    s.c_opt = Mat(3, width);
    const int derivs[3] = {1, 2, 4};
    for (int j = 0; j < 3; ++j) {
      const int d = derivs[j];
      s.constraints.push_back(build_constraint_system(
          d, clamp_order(constraint_order, width, d), s.offsets));
      s.c_opt.row(j) = max_order_fdm_coefficients(d, s.offsets).transpose();
    }
  }
  return s;
}

LearnedScheme scheme_from_checkpoint(const PDESpec& spec,
                                     const CheckpointHeader& header) {
  if (header.kind != spec.kind) {
    throw std::runtime_error("checkpoint equation kind does not match config");
  }
  LearnedScheme s = make_learned_scheme(spec, header.hidden_dim,
                                        header.head_width,
                                        header.constraint_order);
  if (s.shape.n_coeff_sets != header.n_coeff_sets ||
      s.shape.input_dim != header.input_dim) {
    throw std::runtime_error("checkpoint shape does not match the equation");
  }
  return s;
}

Mat build_windows(const Vec& u, const std::vector<int>& offsets) {
  const int n = static_cast<int>(u.size());
  const int width = static_cast<int>(offsets.size());
  Mat X(n, width);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < width; ++k) X(i, k) = u[wrap_index(i + offsets[k], n)];
  }
  return X;
}

namespace {

// Batched LSTM cell + head. Fills gates, c_new, h_new, z, dc_raw.
void network_forward(const ModelParams& p, const Mat& X, StageTape& t) {
  const int H = p.shape.hidden_dim;
  const Eigen::Index n = X.rows();

  Mat pre = X * p.w_x.transpose() + t.h_prev * p.w_h.transpose();
  pre.rowwise() += p.b_g.transpose();

  t.gates.resize(n, 4 * H);
  t.gates.leftCols(H) =
      (1.0 / (1.0 + (-pre.leftCols(H).array()).exp())).matrix();
  t.gates.middleCols(H, H) =
      (1.0 / (1.0 + (-pre.middleCols(H, H).array()).exp())).matrix();
  t.gates.middleCols(2 * H, H) = pre.middleCols(2 * H, H).array().tanh().matrix();
  t.gates.rightCols(H) =
      (1.0 / (1.0 + (-pre.rightCols(H).array()).exp())).matrix();

  const auto gi = t.gates.leftCols(H).array();
  const auto gf = t.gates.middleCols(H, H).array();
  const auto gg = t.gates.middleCols(2 * H, H).array();
  const auto go = t.gates.rightCols(H).array();

  t.c_new = (gf * t.c_prev.array() + gi * gg).matrix();
  t.h_new = (go * t.c_new.array().tanh()).matrix();

  const Mat* z_prev = &t.h_new;
  for (int l = 0; l < 3; ++l) {
    Mat hp = *z_prev * p.head_w[l].transpose();
    hp.rowwise() += p.head_b[l].transpose();
    t.z[l] = hp.array().tanh().matrix();
    z_prev = &t.z[l];
  }
  t.dc_raw = t.z[2] * p.out_w.transpose();
  t.dc_raw.rowwise() += p.out_b.transpose();
}

void project_all_sets(const LearnedScheme& s, StageTape& t) {
  const int width = static_cast<int>(s.offsets.size());
  t.coeffs.resize(t.dc_raw.rows(), t.dc_raw.cols());
  for (int set = 0; set < s.shape.n_coeff_sets; ++set) {
    Mat chat = t.dc_raw.middleCols(set * width, width);
    chat.rowwise() += s.c_opt.row(set);
    const OrderConstraint& oc = s.constraints[set];
    Mat projected = chat * oc.projector.transpose();
    projected.rowwise() += oc.particular.transpose();
    t.coeffs.middleCols(set * width, width) = projected;
  }
}

void fvm_assemble(const LearnedScheme& s, const Vec& u, StageTape& t,
                  double dx) {
  const int n = static_cast<int>(u.size());
  const int width = static_cast<int>(s.offsets.size());
  const Mat& C = t.coeffs;

  t.left_face.resize(n);
  t.right_face.resize(n);
  for (int i = 0; i < n; ++i) {
    double vl = 0.0;
    for (int k = 0; k < width; ++k) {
      vl += C(i, k) * u[wrap_index(i + s.offsets[k], n)];
    }
    t.left_face[i] = vl;
    const int ip1 = wrap_index(i + 1, n);
    double vr = 0.0;
    for (int k = 0; k < width; ++k) {
      vr += C(ip1, k) * u[wrap_index(i + 1 - s.offsets[k], n)];
    }
    t.right_face[i] = vr;
  }

  t.flux.resize(n);
  if (s.spec.kind == PDEKind::Advection) {
    const double a = s.spec.wavespeed;
    t.flux = a * (a >= 0.0 ? t.left_face : t.right_face);
  } else {
    for (int i = 0; i < n; ++i) {
      t.flux[i] = godunov_flux_burgers(t.left_face[i], t.right_face[i]);
    }
  }
  t.rhs = flux_divergence(t.flux, dx);
}

void ks_assemble(const LearnedScheme& s, const Vec& u, StageTape& t,
                 double dx) {
  const int width = static_cast<int>(s.offsets.size());
  t.usq = u.array().square().matrix();
  t.d1 = apply_stencil(t.usq, t.coeffs.middleCols(0, width), s.offsets, dx, 1);
  t.d2 = apply_stencil(u, t.coeffs.middleCols(width, width), s.offsets, dx, 2);
  t.d4 =
      apply_stencil(u, t.coeffs.middleCols(2 * width, width), s.offsets, dx, 4);
  t.rhs = -(s.spec.hyperviscosity * t.d4 + t.d2 + 0.5 * t.d1);
}

}  // namespace

void learned_stage_forward(const LearnedScheme& scheme,
                           const ModelParams& params, const Vec& u,
                           const Mat& h_prev, const Mat& c_prev,
                           StageTape& tape) {
  tape.u = u;
  tape.h_prev = h_prev;
  tape.c_prev = c_prev;
  const Mat X = build_windows(u, scheme.offsets);
  network_forward(params, X, tape);
  project_all_sets(scheme, tape);
  const double dx = scheme.spec.domain_length / static_cast<double>(u.size());
  if (scheme.spec.discretization() == Discretization::FVM) {
    fvm_assemble(scheme, u, tape, dx);
  } else {
    ks_assemble(scheme, u, tape, dx);
  }
}

Vec learned_step_forward(const LearnedScheme& scheme,
                         const ModelParams& params, const Vec& u0,
                         const Mat& h0, const Mat& c0, double dt,
                         StepTape& tape) {
  learned_stage_forward(scheme, params, u0, h0, c0, tape.stage[0]);
  const Vec u1 = u0 + dt * tape.stage[0].rhs;

  learned_stage_forward(scheme, params, u1, tape.stage[0].h_new,
                        tape.stage[0].c_new, tape.stage[1]);
  const Vec u2 = 0.75 * u0 + 0.25 * u1 + 0.25 * dt * tape.stage[1].rhs;

  learned_stage_forward(scheme, params, u2, tape.stage[1].h_new,
                        tape.stage[1].c_new, tape.stage[2]);
  return (1.0 / 3.0) * u0 + (2.0 / 3.0) * u2 +
         (2.0 / 3.0) * dt * tape.stage[2].rhs;
}

RolloutResult rollout(const LearnedScheme& scheme, const ModelParams& params,
                      const GridField& ic, double dt, int n_steps,
                      std::vector<StepTape>* tapes) {
  if (params.shape != scheme.shape) {
    throw std::invalid_argument("rollout: parameter shape mismatch");
  }
  RolloutResult out;
  out.traj.grid = ic.grid;
  out.traj.dt = dt;
  out.traj.frames.reserve(n_steps + 1);
  out.traj.frames.push_back(ic.values);

  const int n = ic.grid.n_cells;
  Mat h = Mat::Zero(n, scheme.shape.hidden_dim);
  Mat c = Mat::Zero(n, scheme.shape.hidden_dim);

  StepTape scratch;
  for (int k = 1; k <= n_steps; ++k) {
    StepTape* tape = &scratch;
    if (tapes != nullptr) {
      tapes->emplace_back();
      tape = &tapes->back();
    }
    const Vec u_next = learned_step_forward(
        scheme, params, out.traj.frames.back(), h, c, dt, *tape);
    if (!all_finite(u_next)) {
      out.blowup_frame = k;
      if (tapes != nullptr) tapes->pop_back();
      break;
    }
    out.traj.frames.push_back(u_next);
    for (const StageTape& st : tape->stage) {
      out.reg_sum += st.dc_raw.squaredNorm();
    }
    out.coeff_evals += 3L * n;
    h = tape->stage[2].h_new;
    c = tape->stage[2].c_new;
  }
  return out;
}

std::pair<Vec, Vec> lstm_cell(const ModelParams& params, const Vec& window,
                              const Vec& h, const Vec& c) {
  StageTape t;
  t.h_prev = h.transpose();
  t.c_prev = c.transpose();
  Mat X = window.transpose();
  network_forward(params, X, t);
  return {t.h_new.row(0).transpose(), t.c_new.row(0).transpose()};
}

CoeffPrediction predict_coefficients(const LearnedScheme& scheme,
                                     const ModelParams& params,
                                     const Vec& window, const Vec& h,
                                     const Vec& c) {
  StageTape t;
  t.h_prev = h.transpose();
  t.c_prev = c.transpose();
  Mat X = window.transpose();
  network_forward(params, X, t);
  project_all_sets(scheme, t);

  const int width = static_cast<int>(scheme.offsets.size());
  CoeffPrediction out;
  out.coeffs.resize(scheme.shape.n_coeff_sets, width);
  out.dc_raw.resize(scheme.shape.n_coeff_sets, width);
  for (int set = 0; set < scheme.shape.n_coeff_sets; ++set) {
    out.coeffs.row(set) = t.coeffs.row(0).segment(set * width, width);
    out.dc_raw.row(set) = t.dc_raw.row(0).segment(set * width, width);
  }
  out.reg_sq = t.dc_raw.squaredNorm();
  out.h_new = t.h_new.row(0).transpose();
  out.c_new = t.c_new.row(0).transpose();
  return out;
}

}  // namespace finitenet

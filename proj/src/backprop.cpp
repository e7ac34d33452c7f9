#include <cmath>
#include <stdexcept>

#include "finitenet/scheme.hpp"

namespace finitenet {

namespace {

// Adjoint of the conservative update rhs_i = -(F_i - F_{i-1}) / dx.
Vec flux_divergence_backward(const Vec& rhs_bar, double dx) {
  const int n = static_cast<int>(rhs_bar.size());
  Vec flux_bar(n);
  for (int i = 0; i < n; ++i) {
    flux_bar[i] = (-rhs_bar[i] + rhs_bar[wrap_index(i + 1, n)]) / dx;
  }
  return flux_bar;
}

// Branch derivatives of godunov_flux_burgers, consistent with the forward
// tie-breaking (left branch wins ties).
void godunov_backward(double ul, double ur, double flux_bar, double& ul_bar,
                      double& ur_bar) {
  const double a = ul > 0.0 ? ul : 0.0;
  const double b = ur < 0.0 ? ur : 0.0;
  const double fa = 0.5 * a * a;
  const double fb = 0.5 * b * b;
  if (fa >= fb) {
    ul_bar += (ul > 0.0 ? ul : 0.0) * flux_bar;
  } else {
    ur_bar += (ur < 0.0 ? ur : 0.0) * flux_bar;
  }
}

void fvm_backward(const LearnedScheme& s, const StageTape& t, const Vec& rhs_bar,
                  double dx, Mat& coeffs_bar, Vec& u_bar) {
  const int n = static_cast<int>(t.u.size());
  const int width = static_cast<int>(s.offsets.size());
  const Vec flux_bar = flux_divergence_backward(rhs_bar, dx);

  Vec left_bar = Vec::Zero(n), right_bar = Vec::Zero(n);
  if (s.spec.kind == PDEKind::Advection) {
    if (s.spec.wavespeed >= 0.0) {
      left_bar = s.spec.wavespeed * flux_bar;
    } else {
      right_bar = s.spec.wavespeed * flux_bar;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      godunov_backward(t.left_face[i], t.right_face[i], flux_bar[i],
                       left_bar[i], right_bar[i]);
    }
  }

  const Mat& C = t.coeffs;
  for (int i = 0; i < n; ++i) {
    if (left_bar[i] != 0.0) {
      for (int k = 0; k < width; ++k) {
        const int j = wrap_index(i + s.offsets[k], n);
        coeffs_bar(i, k) += left_bar[i] * t.u[j];
        u_bar[j] += left_bar[i] * C(i, k);
      }
    }
    if (right_bar[i] != 0.0) {
      const int ip1 = wrap_index(i + 1, n);
      for (int k = 0; k < width; ++k) {
        const int j = wrap_index(i + 1 - s.offsets[k], n);
        coeffs_bar(ip1, k) += right_bar[i] * t.u[j];
        u_bar[j] += right_bar[i] * C(ip1, k);
      }
    }
  }
}

void ks_backward(const LearnedScheme& s, const StageTape& t, const Vec& rhs_bar,
                 double dx, Mat& coeffs_bar, Vec& u_bar) {
  const int n = static_cast<int>(t.u.size());
  const int width = static_cast<int>(s.offsets.size());

  const double inv_dx1 = 1.0 / dx;
  const double inv_dx2 = 1.0 / (dx * dx);
  const double inv_dx4 = inv_dx2 * inv_dx2;

  Vec usq_bar = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double d1_bar = -0.5 * rhs_bar[i] * inv_dx1;
    const double d2_bar = -rhs_bar[i] * inv_dx2;
    const double d4_bar = -s.spec.hyperviscosity * rhs_bar[i] * inv_dx4;
    for (int k = 0; k < width; ++k) {
      const int j = wrap_index(i + s.offsets[k], n);
      coeffs_bar(i, k) += d1_bar * t.usq[j];
      usq_bar[j] += d1_bar * t.coeffs(i, k);
      coeffs_bar(i, width + k) += d2_bar * t.u[j];
      u_bar[j] += d2_bar * t.coeffs(i, width + k);
      coeffs_bar(i, 2 * width + k) += d4_bar * t.u[j];
      u_bar[j] += d4_bar * t.coeffs(i, 2 * width + k);
    }
  }
  u_bar.array() += 2.0 * t.u.array() * usq_bar.array();
}

}  // namespace

void learned_stage_backward(const LearnedScheme& scheme,
                            const ModelParams& params, const StageTape& tape,
                            const Vec& rhs_bar, const Mat& h_new_bar_in,
                            const Mat& c_new_bar_in, double reg_adjoint,
                            Vec& u_bar, Mat& h_prev_bar, Mat& c_prev_bar,
                            ModelParams& grads) {
  const int H = scheme.shape.hidden_dim;
  const int width = static_cast<int>(scheme.offsets.size());
  const int n = static_cast<int>(tape.u.size());
  const double dx = scheme.spec.domain_length / static_cast<double>(n);

  u_bar = Vec::Zero(n);
  Mat coeffs_bar = Mat::Zero(n, scheme.shape.out_dim());
  if (scheme.spec.discretization() == Discretization::FVM) {
    fvm_backward(scheme, tape, rhs_bar, dx, coeffs_bar, u_bar);
  } else {
    ks_backward(scheme, tape, rhs_bar, dx, coeffs_bar, u_bar);
  }

  // Projection is a constant affine map: gradients pass through its
  // (symmetric) linear part.
  Mat dc_raw_bar(n, scheme.shape.out_dim());
  for (int set = 0; set < scheme.shape.n_coeff_sets; ++set) {
    dc_raw_bar.middleCols(set * width, width) =
        coeffs_bar.middleCols(set * width, width) *
        scheme.constraints[set].projector;
  }
  if (reg_adjoint != 0.0) {
    dc_raw_bar += 2.0 * reg_adjoint * tape.dc_raw;
  }

  // Output layer.
  grads.out_w.noalias() += dc_raw_bar.transpose() * tape.z[2];
  grads.out_b += dc_raw_bar.colwise().sum().transpose();
  Mat z_bar = dc_raw_bar * params.out_w;

  // Head layers in reverse; layer 0 consumes h_new.
  Mat h_new_bar = h_new_bar_in;
  for (int l = 2; l >= 0; --l) {
    const Mat pre_bar =
        (z_bar.array() * (1.0 - tape.z[l].array().square())).matrix();
    const Mat& below = l == 0 ? tape.h_new : tape.z[l - 1];
    grads.head_w[l].noalias() += pre_bar.transpose() * below;
    grads.head_b[l] += pre_bar.colwise().sum().transpose();
    z_bar = pre_bar * params.head_w[l];
  }
  h_new_bar += z_bar;

  // LSTM cell backward.
  const auto gi = tape.gates.leftCols(H).array();
  const auto gf = tape.gates.middleCols(H, H).array();
  const auto gg = tape.gates.middleCols(2 * H, H).array();
  const auto go = tape.gates.rightCols(H).array();
  const Eigen::ArrayXXd tanh_c = tape.c_new.array().tanh();

  const Eigen::ArrayXXd o_bar = h_new_bar.array() * tanh_c;
  const Eigen::ArrayXXd c_total_bar =
      c_new_bar_in.array() + h_new_bar.array() * go * (1.0 - tanh_c.square());

  const Eigen::ArrayXXd f_bar = c_total_bar * tape.c_prev.array();
  c_prev_bar = (c_total_bar * gf).matrix();
  const Eigen::ArrayXXd i_bar = c_total_bar * gg;
  const Eigen::ArrayXXd g_bar = c_total_bar * gi;

  Mat pre_bar(n, 4 * H);
  pre_bar.leftCols(H) = (i_bar * gi * (1.0 - gi)).matrix();
  pre_bar.middleCols(H, H) = (f_bar * gf * (1.0 - gf)).matrix();
  pre_bar.middleCols(2 * H, H) = (g_bar * (1.0 - gg.square())).matrix();
  pre_bar.rightCols(H) = (o_bar * go * (1.0 - go)).matrix();

  const Mat X = build_windows(tape.u, scheme.offsets);
  grads.w_x.noalias() += pre_bar.transpose() * X;
  grads.w_h.noalias() += pre_bar.transpose() * tape.h_prev;
  grads.b_g += pre_bar.colwise().sum().transpose();

  h_prev_bar = pre_bar * params.w_h;
  const Mat X_bar = pre_bar * params.w_x;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < width; ++k) {
      u_bar[wrap_index(i + scheme.offsets[k], n)] += X_bar(i, k);
    }
  }
}

ModelParams backprop_rollout(const LearnedScheme& scheme,
                             const ModelParams& params,
                             const std::vector<StepTape>& tapes,
                             const std::vector<Vec>& frame_adjoints,
                             double dt, double reg_adjoint, Vec* ic_adjoint,
                             int bptt_window) {
  const int K = static_cast<int>(tapes.size());
  if (static_cast<int>(frame_adjoints.size()) != K + 1) {
    throw std::invalid_argument(
        "backprop_rollout: need one frame adjoint per recorded frame");
  }
  ModelParams grads = make_zero_params(scheme.shape);
  if (K == 0) {
    if (ic_adjoint != nullptr) *ic_adjoint = frame_adjoints[0];
    return grads;
  }
  const int n = static_cast<int>(tapes[0].stage[0].u.size());
  const int H = scheme.shape.hidden_dim;

  // State adjoint after the final step is zero (nothing downstream reads it).
  Mat h_bar = Mat::Zero(n, H);
  Mat c_bar = Mat::Zero(n, H);
  Vec u_bar = frame_adjoints[K];
  const int stop = bptt_window > 0 ? std::max(0, K - bptt_window) : 0;

  Vec stage_u_bar;
  Mat h_prev_bar, c_prev_bar;
  for (int k = K; k > stop; --k) {
    const StepTape& tape = tapes[k - 1];

    // u3 = 1/3 u0 + 2/3 u2 + 2/3 dt L(u2)
    const Vec u3_bar = u_bar;
    learned_stage_backward(scheme, params, tape.stage[2],
                           Vec((2.0 / 3.0) * dt * u3_bar), h_bar, c_bar,
                           reg_adjoint, stage_u_bar, h_prev_bar, c_prev_bar,
                           grads);
    const Vec u2_bar = (2.0 / 3.0) * u3_bar + stage_u_bar;
    h_bar = h_prev_bar;
    c_bar = c_prev_bar;

    // u2 = 3/4 u0 + 1/4 u1 + 1/4 dt L(u1)
    learned_stage_backward(scheme, params, tape.stage[1],
                           Vec(0.25 * dt * u2_bar), h_bar, c_bar, reg_adjoint,
                           stage_u_bar, h_prev_bar, c_prev_bar, grads);
    const Vec u1_bar = 0.25 * u2_bar + stage_u_bar;
    h_bar = h_prev_bar;
    c_bar = c_prev_bar;

    // u1 = u0 + dt L(u0)
    learned_stage_backward(scheme, params, tape.stage[0], Vec(dt * u1_bar),
                           h_bar, c_bar, reg_adjoint, stage_u_bar, h_prev_bar,
                           c_prev_bar, grads);
    u_bar = u1_bar + 0.75 * u2_bar + (1.0 / 3.0) * u3_bar + stage_u_bar;
    h_bar = h_prev_bar;
    c_bar = c_prev_bar;

    u_bar += frame_adjoints[k - 1];
  }
  if (ic_adjoint != nullptr) {
    *ic_adjoint = stop == 0 ? u_bar : Vec(Vec::Zero(n));
  }
  return grads;
}

}  // namespace finitenet

#pragma once

#include <optional>
#include <vector>

#include "finitenet/constraints.hpp"
#include "finitenet/grid.hpp"
#include "finitenet/model.hpp"
#include "finitenet/pde.hpp"

namespace finitenet {

/// The learned solver for one equation: a shared LSTM + head evaluated per
/// grid point per substep, emitting perturbations of the maximum-order
/// stencil coefficients that are projected back onto the accuracy
/// constraints, then assembled into the same flux / derivative structure the
/// classical scheme uses.
///
/// FVM equations carry one face-coefficient set per point (the mirrored set
/// of the neighbour supplies the opposite face state); KS carries three sets
/// for the first, second and fourth derivatives.
struct LearnedScheme {
  PDESpec spec;
  ModelShape shape;
  int constraint_order = 1;
  std::vector<int> offsets;
  std::vector<OrderConstraint> constraints;  // one per coefficient set
  Mat c_opt;                                 // n_coeff_sets x width
};

LearnedScheme make_learned_scheme(const PDESpec& spec, int hidden_dim,
                                  int head_width, int constraint_order);

LearnedScheme scheme_from_checkpoint(const PDESpec& spec,
                                     const CheckpointHeader& header);

/// Everything one substep evaluation records, enough to run the exact
/// reverse pass.
struct StageTape {
  Vec u;               // stage input field
  Mat h_prev, c_prev;  // state entering the stage
  Mat gates;           // post-activation [i|f|g|o], n x 4H
  Mat c_new, h_new;    // n x H
  std::array<Mat, 3> z;  // head activations, n x W
  Mat dc_raw;          // n x 5S, pre-projection perturbations
  Mat coeffs;          // n x 5S, projected coefficients
  Vec left_face, right_face, flux;  // FVM intermediates
  Vec usq, d1, d2, d4;              // KS intermediates
  Vec rhs;
};

struct StepTape {
  std::array<StageTape, 3> stage;
};

/// One substep: evaluate the network at every grid point, project the
/// coefficients, assemble L(u). State advances once per evaluation.
void learned_stage_forward(const LearnedScheme& scheme,
                           const ModelParams& params, const Vec& u,
                           const Mat& h_prev, const Mat& c_prev,
                           StageTape& tape);

/// One SSPRK3 step; the LSTM state threads through the three stage
/// evaluations in order and the stage-3 state carries to the next step.
Vec learned_step_forward(const LearnedScheme& scheme,
                         const ModelParams& params, const Vec& u0,
                         const Mat& h0, const Mat& c0, double dt,
                         StepTape& tape);

struct RolloutResult {
  Trajectory traj;
  std::optional<int> blowup_frame;
  double reg_sum = 0.0;   // sum of |dc_raw|^2 over completed steps
  long coeff_evals = 0;   // completed per-point evaluations (3 n per step)
};

/// Roll the learned scheme for n_steps from a zero state, recording every
/// frame. Stops at the first non-finite frame (that step contributes
/// neither a frame nor regularizer terms). When `tapes` is given, one
/// StepTape per completed step is appended for the reverse pass.
RolloutResult rollout(const LearnedScheme& scheme, const ModelParams& params,
                      const GridField& ic, double dt, int n_steps,
                      std::vector<StepTape>* tapes = nullptr);

/// Reverse pass through a recorded rollout. frame_adjoints[k] is dL/du_k
/// for each recorded frame (k = 0..tapes.size()); reg_adjoint is
/// dL/d(reg_sum). Returns parameter gradients; optionally also dL/d(ic).
/// bptt_window > 0 truncates the reverse sweep that many steps back from
/// the final recorded frame.
ModelParams backprop_rollout(const LearnedScheme& scheme,
                             const ModelParams& params,
                             const std::vector<StepTape>& tapes,
                             const std::vector<Vec>& frame_adjoints,
                             double dt, double reg_adjoint,
                             Vec* ic_adjoint = nullptr, int bptt_window = 0);

/// Per-step reverse pass building block (exposed for unit tests). Adjoints
/// of the stage outputs (rhs, h_new, c_new, reg contribution) map to
/// adjoints of its inputs (u, h_prev, c_prev); parameter gradients
/// accumulate into `grads`.
void learned_stage_backward(const LearnedScheme& scheme,
                            const ModelParams& params, const StageTape& tape,
                            const Vec& rhs_bar, const Mat& h_new_bar,
                            const Mat& c_new_bar, double reg_adjoint,
                            Vec& u_bar, Mat& h_prev_bar, Mat& c_prev_bar,
                            ModelParams& grads);

/// Single-point wrappers matching the per-grid-point view of the model
/// (used by targeted tests; the solver always runs the batched path).
std::pair<Vec, Vec> lstm_cell(const ModelParams& params, const Vec& window,
                              const Vec& h, const Vec& c);

struct CoeffPrediction {
  Mat coeffs;  // n_coeff_sets x width, projected
  Mat dc_raw;  // n_coeff_sets x width
  double reg_sq = 0.0;
  Vec h_new, c_new;
};
CoeffPrediction predict_coefficients(const LearnedScheme& scheme,
                                     const ModelParams& params,
                                     const Vec& window, const Vec& h,
                                     const Vec& c);

/// Window matrix X(i, k) = u[i + offsets[k]], periodic.
Mat build_windows(const Vec& u, const std::vector<int>& offsets);

}  // namespace finitenet

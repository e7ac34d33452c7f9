#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "finitenet/equations.hpp"
#include "finitenet/scheme.hpp"

namespace finitenet {

/// Everything that fixes one experiment: the equation, the coarse/fine grid
/// pair, the coarse step size, and the IC / numerics settings.
struct ProblemSetup {
  PDESpec spec;
  int n_cells = 100;
  int refine = 4;
  double dt = 0.0;
  IcConfig ic;
  NumericsConfig numerics;

  Grid coarse_grid() const { return make_grid(spec.domain_length, n_cells); }
  Grid fine_grid() const {
    return make_grid(spec.domain_length, n_cells * refine);
  }
  RestrictionMode restriction_mode() const {
    return spec.discretization() == Discretization::FVM
               ? RestrictionMode::CellAverage
               : RestrictionMode::PointSample;
  }
};

struct TrainConfig {
  int n_epochs = 400;
  int minibatch = 5;
  int horizon = 100;  // T
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double lambda = 1e-3;            // dc regularization weight
  double blowup_penalty = 100.0;   // squared-error charge per missing point
  int bptt_window = 0;             // 0 = full-horizon reverse sweep
  int checkpoint_interval = 100;   // epochs between checkpoint hooks
  int jobs = 1;                    // concurrent minibatch rollouts
  std::uint64_t seed = 1;
  double init_scale = 1.0;
  int hidden_dim = 32;
  int head_width = 32;
  int constraint_order = 1;
};

/// Simulation loss: trajectory MSE plus the normalized perturbation
/// penalty. n_evals is the count of per-point coefficient evaluations the
/// reg_sum was accumulated over.
double loss_value(const Trajectory& traj, const Trajectory& ref,
                  double reg_sum, double lambda, double n_evals);

/// One training / evaluation case: the sampled IC, its restriction onto the
/// solver grid, and the reference trajectory at the coarse cadence.
struct CaseData {
  InitialCondition ic;
  GridField ic_coarse;
  Trajectory ref;
};

/// Draw the IC for `ic_seed` and build its reference over `horizon` steps.
/// Throws if the reference solver itself diverges (a configuration error).
CaseData make_case(const ProblemSetup& setup, std::uint64_t ic_seed,
                   int horizon);

struct CaseGrad {
  double loss = 0.0;
  Vec grad;
  bool blew_up = false;
  int blowup_frame = -1;
};

/// Loss and exact parameter gradient of one rollout against its reference.
/// A rollout that goes non-finite contributes the capped penalty for every
/// missing space-time point and gradients only through the finite prefix.
CaseGrad case_gradient(const LearnedScheme& scheme, const ModelParams& params,
                       const CaseData& data, double dt, int horizon,
                       double lambda, double blowup_penalty,
                       int bptt_window = 0);

struct MinibatchGrad {
  double loss = 0.0;  // summed over cases
  Vec grad;           // summed in case order
  int blowups = 0;
};

/// Summed loss and gradient over the minibatch. Cases run concurrently when
/// jobs > 1; the reduction is always in case order, so results match the
/// serial run bit for bit.
MinibatchGrad minibatch_gradient(const LearnedScheme& scheme,
                                 const ModelParams& params,
                                 const std::vector<CaseData>& cases, double dt,
                                 int horizon, double lambda,
                                 double blowup_penalty, int bptt_window,
                                 int jobs);

struct AdamState {
  Vec m, v;
  long t = 0;
};

AdamState make_adam_state(long n_params);

/// Standard Adam with bias correction.
void adam_step(Vec& params, const Vec& grad, AdamState& state, double lr,
               double beta1, double beta2, double eps);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double wall_seconds = 0.0;
  int blowups = 0;
};

struct TrainHooks {
  std::function<void(const EpochLog&)> on_epoch;
  std::function<void(int epoch, const ModelParams&, bool final)> on_checkpoint;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
};

/// Algorithm: per epoch draw `minibatch` fresh ICs, build references, roll
/// out with a zeroed state, accumulate the summed loss, take one Adam step.
/// Fully deterministic in (setup, config).
TrainResult train(const ProblemSetup& setup, const TrainConfig& config,
                  const TrainHooks& hooks = {});

}  // namespace finitenet

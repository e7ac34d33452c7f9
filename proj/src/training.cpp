#include "finitenet/training.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "finitenet/rng.hpp"

namespace finitenet {

double loss_value(const Trajectory& traj, const Trajectory& ref,
                  double reg_sum, double lambda, double n_evals) {
  return trajectory_mse(traj, ref) +
         (n_evals > 0 ? lambda * reg_sum / n_evals : 0.0);
}

CaseData make_case(const ProblemSetup& setup, std::uint64_t ic_seed,
                   int horizon) {
  CaseData data{sample_initial_condition(setup.spec, setup.ic, setup.numerics,
                                         ic_seed, setup.fine_grid()),
                {},
                {}};
  data.ic_coarse =
      restrict_field(data.ic.field, setup.refine, setup.restriction_mode());
  const SolveResult ref = reference_trajectory(
      setup.spec, setup.numerics, data.ic, setup.dt, horizon, setup.refine);
  if (ref.blowup_frame.has_value()) {
    throw std::runtime_error(
        "reference solver diverged at frame " +
        std::to_string(*ref.blowup_frame) +
        " (seed " + std::to_string(ic_seed) + "); check dt and grids");
  }
  data.ref = ref.traj;
  return data;
}

CaseGrad case_gradient(const LearnedScheme& scheme, const ModelParams& params,
                       const CaseData& data, double dt, int horizon,
                       double lambda, double blowup_penalty,
                       int bptt_window) {
  const int n = data.ic_coarse.grid.n_cells;
  const double denom = static_cast<double>(n) * (horizon + 1);
  const double reg_norm = 3.0 * horizon * n;

  std::vector<StepTape> tapes;
  tapes.reserve(horizon);
  const RolloutResult roll =
      rollout(scheme, params, data.ic_coarse, dt, horizon, &tapes);
  const int frames_done = static_cast<int>(roll.traj.frames.size());  // K+1

  CaseGrad out;
  out.blew_up = roll.blowup_frame.has_value();
  out.blowup_frame = roll.blowup_frame.value_or(-1);

  double mse_sum = 0.0;
  std::vector<Vec> frame_adjoints(frames_done);
  for (int k = 0; k < frames_done; ++k) {
    const Vec diff = roll.traj.frames[k] - data.ref.frames[k];
    mse_sum += diff.squaredNorm();
    frame_adjoints[k] = (2.0 / denom) * diff;
  }
  mse_sum += blowup_penalty * n * (horizon + 1 - frames_done);
  out.loss = mse_sum / denom + lambda * roll.reg_sum / reg_norm;

  const ModelParams grads =
      backprop_rollout(scheme, params, tapes, frame_adjoints, dt,
                       lambda / reg_norm, nullptr, bptt_window);
  out.grad = flatten_params(grads);
  return out;
}

MinibatchGrad minibatch_gradient(const LearnedScheme& scheme,
                                 const ModelParams& params,
                                 const std::vector<CaseData>& cases, double dt,
                                 int horizon, double lambda,
                                 double blowup_penalty, int bptt_window,
                                 int jobs) {
  const int n_cases = static_cast<int>(cases.size());
  std::vector<CaseGrad> per_case(n_cases);

  if (jobs <= 1 || n_cases <= 1) {
    for (int j = 0; j < n_cases; ++j) {
      per_case[j] = case_gradient(scheme, params, cases[j], dt, horizon,
                                  lambda, blowup_penalty, bptt_window);
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int workers = std::min(jobs, n_cases);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int j = next.fetch_add(1); j < n_cases; j = next.fetch_add(1)) {
          per_case[j] = case_gradient(scheme, params, cases[j], dt, horizon,
                                      lambda, blowup_penalty, bptt_window);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  MinibatchGrad out;
  out.grad = Vec::Zero(scheme.shape.param_count());
  for (const CaseGrad& cg : per_case) {  // fixed order: bitwise reproducible
    out.loss += cg.loss;
    out.grad += cg.grad;
    out.blowups += cg.blew_up ? 1 : 0;
  }
  return out;
}

AdamState make_adam_state(long n_params) {
  return AdamState{Vec::Zero(n_params), Vec::Zero(n_params), 0};
}

void adam_step(Vec& params, const Vec& grad, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  state.t += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v +
            (1.0 - beta2) * grad.array().square().matrix();
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  params.array() -= lr * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + eps);
}

TrainResult train(const ProblemSetup& setup, const TrainConfig& config,
                  const TrainHooks& hooks) {
  if (config.minibatch < 1 || config.horizon < 1 || config.n_epochs < 0) {
    throw std::invalid_argument("train: bad epoch/minibatch/horizon settings");
  }
  if (!(setup.dt > 0.0)) throw std::invalid_argument("train: dt must be positive");

  const LearnedScheme scheme =
      make_learned_scheme(setup.spec, config.hidden_dim, config.head_width,
                          config.constraint_order);
  ModelParams params =
      initialize_params(scheme.shape, config.seed, config.init_scale);
  Vec flat = flatten_params(params);
  AdamState adam = make_adam_state(flat.size());

  TrainResult result;
  for (int epoch = 1; epoch <= config.n_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<CaseData> cases;
    cases.reserve(config.minibatch);
    for (int j = 0; j < config.minibatch; ++j) {
      const std::uint64_t index =
          static_cast<std::uint64_t>(epoch - 1) * config.minibatch + j;
      const std::uint64_t ic_seed =
          substream(config.seed, "train-ic", index).next_u64();
      cases.push_back(make_case(setup, ic_seed, config.horizon));
    }

    const MinibatchGrad mb = minibatch_gradient(
        scheme, params, cases, setup.dt, config.horizon, config.lambda,
        config.blowup_penalty, config.bptt_window, config.jobs);
    if (!mb.grad.allFinite()) {
      throw std::runtime_error("train: non-finite gradient at epoch " +
                               std::to_string(epoch));
    }
    adam_step(flat, mb.grad, adam, config.learning_rate, config.beta1,
              config.beta2, config.adam_eps);
    params = unflatten_params(scheme.shape, flat);

    EpochLog log;
    log.epoch = epoch;
    log.loss = mb.loss;
    log.grad_norm = mb.grad.norm();
    log.blowups = mb.blowups;
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    result.log.push_back(log);
    if (hooks.on_epoch) hooks.on_epoch(log);
    if (hooks.on_checkpoint && config.checkpoint_interval > 0 &&
        epoch % config.checkpoint_interval == 0 && epoch != config.n_epochs) {
      hooks.on_checkpoint(epoch, params, false);
    }
  }
  if (hooks.on_checkpoint) {
    hooks.on_checkpoint(config.n_epochs, params, true);
  }
  result.params = params;
  return result;
}

}  // namespace finitenet

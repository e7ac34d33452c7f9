#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "finitenet/pde.hpp"
#include "finitenet/types.hpp"

namespace finitenet {

/// Dimensions of the learned coefficient predictor. One shared cell and head
/// are evaluated per grid point per stage; hidden_dim and head_width are
/// configurable so gradient checks can run on tiny instances.
struct ModelShape {
  int input_dim = kStencilWidth;
  int hidden_dim = 32;
  int head_width = 32;
  int n_coeff_sets = 1;  // 1 face set (FVM) or 3 derivative sets (KS)

  int out_dim() const { return kStencilWidth * n_coeff_sets; }
  long param_count() const;
  bool operator==(const ModelShape&) const = default;
};

/// LSTM gate weights (packed [input|forget|cell|output] along rows) plus a
/// three-layer tanh head and a linear output layer emitting the coefficient
/// perturbations.
struct ModelParams {
  ModelShape shape;
  Mat w_x;  // 4H x D
  Mat w_h;  // 4H x H
  Vec b_g;  // 4H
  std::array<Mat, 3> head_w;  // W x H, W x W, W x W
  std::array<Vec, 3> head_b;
  Mat out_w;  // out_dim x W
  Vec out_b;

  void set_zero();
};

ModelParams make_zero_params(const ModelShape& shape);

/// Uniform fan-in-scaled init for every dense matrix, zero biases except the
/// forget gate at +1. init_scale multiplies all matrix draws.
ModelParams initialize_params(const ModelShape& shape, std::uint64_t seed,
                              double init_scale = 1.0);

/// Fixed parameter order: w_x, w_h, b_g, head layers (w then b, in order),
/// out_w, out_b; matrices row-major.
Vec flatten_params(const ModelParams& p);
ModelParams unflatten_params(const ModelShape& shape, const Vec& flat);

/// Per-grid-point hidden and cell vectors carried across substeps, zeroed at
/// the start of every trajectory.
struct LSTMState {
  Mat h;  // n_cells x H
  Mat c;
};

LSTMState zero_state(int n_cells, int hidden_dim);

/// Versioned checkpoint header; everything needed to rebuild the scheme the
/// parameters belong to.
struct CheckpointHeader {
  std::uint32_t version = 1;
  PDEKind kind = PDEKind::Advection;
  std::int32_t input_dim = kStencilWidth;
  std::int32_t hidden_dim = 32;
  std::int32_t head_width = 32;
  std::int32_t n_coeff_sets = 1;
  std::int32_t constraint_order = 1;
};

/// Binary little-endian layout; parameter doubles round-trip exactly.
void save_checkpoint(const std::string& path, const CheckpointHeader& header,
                     const ModelParams& params);
std::pair<CheckpointHeader, ModelParams> load_checkpoint(
    const std::string& path);

}  // namespace finitenet

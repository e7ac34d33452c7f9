#include "finitenet/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "finitenet/rng.hpp"

namespace finitenet {

long ModelShape::param_count() const {
  const long H = hidden_dim, D = input_dim, W = head_width, O = out_dim();
  long count = 4 * H * D + 4 * H * H + 4 * H;  // LSTM
  count += W * H + W;                          // head layer 1
  count += 2 * (W * W + W);                    // head layers 2, 3
  count += O * W + O;                          // output layer
  return count;
}

void ModelParams::set_zero() {
  w_x.setZero();
  w_h.setZero();
  b_g.setZero();
  for (auto& w : head_w) w.setZero();
  for (auto& b : head_b) b.setZero();
  out_w.setZero();
  out_b.setZero();
}

ModelParams make_zero_params(const ModelShape& shape) {
  const int H = shape.hidden_dim, D = shape.input_dim, W = shape.head_width;
  ModelParams p;
  p.shape = shape;
  p.w_x = Mat::Zero(4 * H, D);
  p.w_h = Mat::Zero(4 * H, H);
  p.b_g = Vec::Zero(4 * H);
  p.head_w = {Mat::Zero(W, H), Mat::Zero(W, W), Mat::Zero(W, W)};
  p.head_b = {Vec::Zero(W), Vec::Zero(W), Vec::Zero(W)};
  p.out_w = Mat::Zero(shape.out_dim(), W);
  p.out_b = Vec::Zero(shape.out_dim());
  return p;
}

namespace {

void fill_uniform(Mat& m, RngStream& rng, double scale) {
  const double bound = scale / std::sqrt(static_cast<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rng.uniform(-bound, bound);
    }
  }
}

}  // namespace

ModelParams initialize_params(const ModelShape& shape, std::uint64_t seed,
                              double init_scale) {
  ModelParams p = make_zero_params(shape);
  RngStream rng = substream(seed, "weight-init");
  fill_uniform(p.w_x, rng, init_scale);
  fill_uniform(p.w_h, rng, init_scale);
  for (auto& w : p.head_w) fill_uniform(w, rng, init_scale);
  fill_uniform(p.out_w, rng, init_scale);
  // Forget-gate bias +1 keeps early memory open.
  p.b_g.segment(shape.hidden_dim, shape.hidden_dim).setOnes();
  return p;
}

namespace {

void append(Vec& flat, long& at, const Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) flat[at++] = m(i, j);
  }
}

void append(Vec& flat, long& at, const Vec& v) {
  flat.segment(at, v.size()) = v;
  at += v.size();
}

void take(const Vec& flat, long& at, Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = flat[at++];
  }
}

void take(const Vec& flat, long& at, Vec& v) {
  v = flat.segment(at, v.size());
  at += v.size();
}

}  // namespace

Vec flatten_params(const ModelParams& p) {
  Vec flat(p.shape.param_count());
  long at = 0;
  append(flat, at, p.w_x);
  append(flat, at, p.w_h);
  append(flat, at, p.b_g);
  for (int l = 0; l < 3; ++l) {
    append(flat, at, p.head_w[l]);
    append(flat, at, p.head_b[l]);
  }
  append(flat, at, p.out_w);
  append(flat, at, p.out_b);
  return flat;
}

ModelParams unflatten_params(const ModelShape& shape, const Vec& flat) {
  if (flat.size() != shape.param_count()) {
    throw std::invalid_argument("unflatten_params: size mismatch");
  }
  ModelParams p = make_zero_params(shape);
  long at = 0;
  take(flat, at, p.w_x);
  take(flat, at, p.w_h);
  take(flat, at, p.b_g);
  for (int l = 0; l < 3; ++l) {
    take(flat, at, p.head_w[l]);
    take(flat, at, p.head_b[l]);
  }
  take(flat, at, p.out_w);
  take(flat, at, p.out_b);
  return p;
}

LSTMState zero_state(int n_cells, int hidden_dim) {
  return LSTMState{Mat::Zero(n_cells, hidden_dim),
                   Mat::Zero(n_cells, hidden_dim)};
}

namespace {

constexpr char kMagic[4] = {'F', 'N', 'C', 'K'};

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void read_pod(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointHeader& header,
                     const ModelParams& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  write_pod(os, header.version);
  const std::uint32_t kind = static_cast<std::uint32_t>(header.kind);
  write_pod(os, kind);
  write_pod(os, header.input_dim);
  write_pod(os, header.hidden_dim);
  write_pod(os, header.head_width);
  write_pod(os, header.n_coeff_sets);
  write_pod(os, header.constraint_order);
  const Vec flat = flatten_params(params);
  const std::uint64_t count = static_cast<std::uint64_t>(flat.size());
  write_pod(os, count);
  os.write(reinterpret_cast<const char*>(flat.data()),
           static_cast<std::streamsize>(sizeof(double) * count));
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

std::pair<CheckpointHeader, ModelParams> load_checkpoint(
    const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  CheckpointHeader header;
  std::uint32_t kind = 0;
  read_pod(is, header.version);
  read_pod(is, kind);
  header.kind = static_cast<PDEKind>(kind);
  read_pod(is, header.input_dim);
  read_pod(is, header.hidden_dim);
  read_pod(is, header.head_width);
  read_pod(is, header.n_coeff_sets);
  read_pod(is, header.constraint_order);
  std::uint64_t count = 0;
  read_pod(is, count);
  if (header.version != 1) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  ModelShape shape{header.input_dim, header.hidden_dim, header.head_width,
                   header.n_coeff_sets};
  if (count != static_cast<std::uint64_t>(shape.param_count())) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  Vec flat(static_cast<long>(count));
  is.read(reinterpret_cast<char*>(flat.data()),
          static_cast<std::streamsize>(sizeof(double) * count));
  if (!is) throw std::runtime_error("checkpoint truncated: " + path);
  return {header, unflatten_params(shape, flat)};
}

}  // namespace finitenet

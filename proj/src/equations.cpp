#include "finitenet/equations.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "finitenet/rng.hpp"

namespace finitenet {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_position(double x, double length) {
  double r = std::fmod(x, length);
  return r < 0.0 ? r + length : r;
}
}  // namespace

double PiecewiseConstantDescriptor::value_at(double x,
                                             double domain_length) const {
  const double xw = wrap_position(x, domain_length);
  const auto it =
      std::upper_bound(breakpoints.begin(), breakpoints.end(), xw);
  return amplitudes[static_cast<std::size_t>(it - breakpoints.begin())];
}

double PiecewiseConstantDescriptor::integral(double lo, double hi,
                                             double domain_length) const {
  if (hi < lo) throw std::invalid_argument("piecewise integral: hi < lo");
  // Reduce to intervals inside [0, L), splitting at the wrap point.
  const double span = hi - lo;
  if (span >= domain_length) {
    double full = 0.0;
    double prev = 0.0;
    for (std::size_t j = 0; j < breakpoints.size(); ++j) {
      full += amplitudes[j] * (breakpoints[j] - prev);
      prev = breakpoints[j];
    }
    full += amplitudes.back() * (domain_length - prev);
    const int whole = static_cast<int>(span / domain_length);
    const double rest = span - whole * domain_length;
    return whole * full + (rest > 0.0 ? integral(lo, lo + rest, domain_length)
                                      : 0.0);
  }
  const double lo_w = wrap_position(lo, domain_length);
  const double hi_w = lo_w + span;
  if (hi_w > domain_length) {
    return integral(lo_w, domain_length, domain_length) +
           integral(0.0, hi_w - domain_length, domain_length);
  }
  // Plain interval inside the fundamental domain.
  double acc = 0.0;
  double left = lo_w;
  for (std::size_t j = 0; j < breakpoints.size() && left < hi_w; ++j) {
    if (breakpoints[j] <= left) continue;
    const double right = std::min(breakpoints[j], hi_w);
    acc += amplitudes[j] * (right - left);
    left = right;
  }
  if (left < hi_w) acc += amplitudes.back() * (hi_w - left);
  return acc;
}

double FourierDescriptor::value_at(double x, double domain_length) const {
  double v = 0.0;
  for (std::size_t m = 0; m < sin_coeffs.size(); ++m) {
    const double w = kTwoPi * static_cast<double>(m + 1) / domain_length;
    v += sin_coeffs[m] * std::sin(w * x) + cos_coeffs[m] * std::cos(w * x);
  }
  return v;
}

double FourierDescriptor::cell_average(double lo, double hi,
                                       double domain_length) const {
  const double width = hi - lo;
  double v = 0.0;
  for (std::size_t m = 0; m < sin_coeffs.size(); ++m) {
    const double w = kTwoPi * static_cast<double>(m + 1) / domain_length;
    v += sin_coeffs[m] * (std::cos(w * lo) - std::cos(w * hi)) / (w * width);
    v += cos_coeffs[m] * (std::sin(w * hi) - std::sin(w * lo)) / (w * width);
  }
  return v;
}

namespace {

GridField field_from_piecewise(const PiecewiseConstantDescriptor& desc,
                               const Grid& grid, Discretization mode,
                               double shift) {
  Vec values(grid.n_cells);
  if (mode == Discretization::FVM) {
    for (int i = 0; i < grid.n_cells; ++i) {
      const double lo = i * grid.dx - shift;
      values[i] = desc.integral(lo, lo + grid.dx, grid.domain_length) / grid.dx;
    }
  } else {
    for (int i = 0; i < grid.n_cells; ++i) {
      values[i] = desc.value_at(i * grid.dx - shift, grid.domain_length);
    }
  }
  return GridField{grid, std::move(values)};
}

GridField field_from_fourier(const FourierDescriptor& desc, const Grid& grid,
                             Discretization mode) {
  Vec values(grid.n_cells);
  if (mode == Discretization::FVM) {
    for (int i = 0; i < grid.n_cells; ++i) {
      const double lo = i * grid.dx;
      values[i] = desc.cell_average(lo, lo + grid.dx, grid.domain_length);
    }
  } else {
    for (int i = 0; i < grid.n_cells; ++i) {
      values[i] = desc.value_at(i * grid.dx, grid.domain_length);
    }
  }
  return GridField{grid, std::move(values)};
}

InitialCondition sample_advection_ic(const PDESpec& spec,
                                     const IcConfig& cfg, std::uint64_t seed,
                                     const Grid& fine_grid) {
  RngStream rng = substream(seed, "ic-advection");
  PiecewiseConstantDescriptor desc;
  const int n_break =
      rng.uniform_int(cfg.adv_breakpoints_min, cfg.adv_breakpoints_max);
  desc.breakpoints.resize(n_break);
  for (double& b : desc.breakpoints) {
    b = rng.uniform(0.0, spec.domain_length);
  }
  std::sort(desc.breakpoints.begin(), desc.breakpoints.end());
  desc.amplitudes.resize(n_break + 1);
  for (double& a : desc.amplitudes) {
    a = rng.uniform(cfg.adv_amplitude_lo, cfg.adv_amplitude_hi);
  }
  InitialCondition ic{field_from_piecewise(desc, fine_grid,
                                           Discretization::FVM, 0.0),
                      PDEKind::Advection, seed, desc};
  return ic;
}

InitialCondition sample_burgers_ic(const PDESpec& spec, const IcConfig& cfg,
                                   std::uint64_t seed, const Grid& fine_grid) {
  RngStream rng = substream(seed, "ic-burgers");
  FourierDescriptor desc;
  desc.sin_coeffs.resize(cfg.burgers_modes);
  desc.cos_coeffs.resize(cfg.burgers_modes);
  for (int k = 1; k <= cfg.burgers_modes; ++k) {
    desc.sin_coeffs[k - 1] = rng.uniform(-1.0 / k, 1.0 / k);
    desc.cos_coeffs[k - 1] = rng.uniform(-1.0 / k, 1.0 / k);
  }
  (void)spec;
  InitialCondition ic{field_from_fourier(desc, fine_grid, Discretization::FVM),
                      PDEKind::Burgers, seed, desc};
  return ic;
}

// --- KS attractor pool -----------------------------------------------------

std::string g_pool_cache_dir;  // guarded by g_pool_mutex
std::mutex g_pool_mutex;

struct KsPool {
  double snapshot_dt = 0.0;
  std::vector<Vec> snapshots;
};

std::uint64_t pool_key_hash(const PDESpec& spec, const NumericsConfig& num,
                            const IcConfig& cfg, const Grid& grid) {
  std::ostringstream key;
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g|", v);
    key << buf;
  };
  put(spec.hyperviscosity);
  put(spec.domain_length);
  key << grid.n_cells << '|' << num.ks_baseline_d4_width << '|';
  put(num.stability_safety);
  put(num.fine_cfl);
  put(cfg.ks_burn_in);
  put(cfg.ks_pool_span);
  put(cfg.ks_pool_snapshot_dt);
  key << cfg.ks_pool_seed << '|' << cfg.ks_seed_modes << '|';
  put(cfg.ks_seed_amplitude);
  return fnv1a_hash(key.str());
}

GridField ks_seed_field(const IcConfig& cfg, std::uint64_t seed,
                        const Grid& grid) {
  RngStream rng = substream(seed, "ic-ks-seed");
  FourierDescriptor desc;
  desc.sin_coeffs.resize(cfg.ks_seed_modes);
  desc.cos_coeffs.resize(cfg.ks_seed_modes);
  for (int k = 1; k <= cfg.ks_seed_modes; ++k) {
    desc.sin_coeffs[k - 1] =
        rng.uniform(-cfg.ks_seed_amplitude, cfg.ks_seed_amplitude);
    desc.cos_coeffs[k - 1] =
        rng.uniform(-cfg.ks_seed_amplitude, cfg.ks_seed_amplitude);
  }
  return field_from_fourier(desc, grid, Discretization::FDM);
}

bool load_pool_file(const std::string& path, int n_cells, KsPool& pool) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "KSPL") return false;
  std::uint32_t n32 = 0, count = 0;
  is.read(reinterpret_cast<char*>(&n32), sizeof n32);
  is.read(reinterpret_cast<char*>(&pool.snapshot_dt), sizeof pool.snapshot_dt);
  is.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!is || static_cast<int>(n32) != n_cells) return false;
  pool.snapshots.assign(count, Vec(n_cells));
  for (auto& snap : pool.snapshots) {
    is.read(reinterpret_cast<char*>(snap.data()),
            static_cast<std::streamsize>(sizeof(double)) * n_cells);
  }
  return static_cast<bool>(is);
}

void save_pool_file(const std::string& path, int n_cells, const KsPool& pool) {
  std::ofstream os(path, std::ios::binary);
  if (!os) return;  // cache is best-effort
  os.write("KSPL", 4);
  const std::uint32_t n32 = static_cast<std::uint32_t>(n_cells);
  const std::uint32_t count = static_cast<std::uint32_t>(pool.snapshots.size());
  os.write(reinterpret_cast<const char*>(&n32), sizeof n32);
  os.write(reinterpret_cast<const char*>(&pool.snapshot_dt),
           sizeof pool.snapshot_dt);
  os.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (const auto& snap : pool.snapshots) {
    os.write(reinterpret_cast<const char*>(snap.data()),
             static_cast<std::streamsize>(sizeof(double)) * n_cells);
  }
}

const KsPool& get_ks_pool(const PDESpec& spec, const NumericsConfig& numerics,
                          const IcConfig& cfg, const Grid& fine_grid) {
  static std::map<std::uint64_t, KsPool> cache;
  std::lock_guard<std::mutex> lock(g_pool_mutex);
  const std::uint64_t key = pool_key_hash(spec, numerics, cfg, fine_grid);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  KsPool pool;
  pool.snapshot_dt = cfg.ks_pool_snapshot_dt;
  std::string cache_path;
  if (!g_pool_cache_dir.empty()) {
    char name[64];
    std::snprintf(name, sizeof(name), "ks_pool_%016llx.bin",
                  static_cast<unsigned long long>(key));
    cache_path = (std::filesystem::path(g_pool_cache_dir) / name).string();
    if (load_pool_file(cache_path, fine_grid.n_cells, pool)) {
      return cache.emplace(key, std::move(pool)).first->second;
    }
  }

  GridField state = ks_seed_field(cfg, cfg.ks_pool_seed, fine_grid);
  if (!evolve_fine(spec, numerics, state.values, fine_grid.dx,
                   cfg.ks_burn_in)) {
    throw std::runtime_error("KS pool: burn-in diverged");
  }
  const int n_snaps =
      static_cast<int>(std::floor(cfg.ks_pool_span / pool.snapshot_dt)) + 1;
  pool.snapshots.reserve(n_snaps);
  pool.snapshots.push_back(state.values);
  for (int s = 1; s < n_snaps; ++s) {
    if (!evolve_fine(spec, numerics, state.values, fine_grid.dx,
                     pool.snapshot_dt)) {
      throw std::runtime_error("KS pool: attractor run diverged");
    }
    pool.snapshots.push_back(state.values);
  }
  if (!cache_path.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(g_pool_cache_dir, ec);
    save_pool_file(cache_path, fine_grid.n_cells, pool);
  }
  return cache.emplace(key, std::move(pool)).first->second;
}

InitialCondition sample_ks_ic(const PDESpec& spec, const IcConfig& cfg,
                              const NumericsConfig& numerics,
                              std::uint64_t seed, const Grid& fine_grid) {
  if (cfg.ks_use_pool) {
    const KsPool& pool = get_ks_pool(spec, numerics, cfg, fine_grid);
    RngStream rng = substream(seed, "ic-ks-offset");
    const double span =
        pool.snapshot_dt * static_cast<double>(pool.snapshots.size() - 1);
    const double offset = rng.uniform(0.0, span);
    const int base = std::min(
        static_cast<int>(offset / pool.snapshot_dt),
        static_cast<int>(pool.snapshots.size()) - 1);
    Vec state = pool.snapshots[base];
    const double extra = offset - base * pool.snapshot_dt;
    if (extra > 0.0 &&
        !evolve_fine(spec, numerics, state, fine_grid.dx, extra)) {
      throw std::runtime_error("KS IC: pool offset evolution diverged");
    }
    AttractorDescriptor desc{true, offset, 0.0};
    return InitialCondition{GridField{fine_grid, std::move(state)},
                            PDEKind::KuramotoSivashinsky, seed, desc};
  }
  GridField state = ks_seed_field(cfg, seed, fine_grid);
  if (!evolve_fine(spec, numerics, state.values, fine_grid.dx,
                   cfg.ks_burn_in)) {
    throw std::runtime_error("KS IC: burn-in diverged");
  }
  AttractorDescriptor desc{false, 0.0, cfg.ks_burn_in};
  return InitialCondition{std::move(state), PDEKind::KuramotoSivashinsky, seed,
                          desc};
}

}  // namespace

void set_pool_cache_dir(const std::string& dir) {
  std::lock_guard<std::mutex> lock(g_pool_mutex);
  g_pool_cache_dir = dir;
}

InitialCondition sample_initial_condition(const PDESpec& spec,
                                          const IcConfig& ic_config,
                                          const NumericsConfig& numerics,
                                          std::uint64_t seed,
                                          const Grid& fine_grid) {
  validate_pde_spec(spec);
  switch (spec.kind) {
    case PDEKind::Advection:
      return sample_advection_ic(spec, ic_config, seed, fine_grid);
    case PDEKind::Burgers:
      return sample_burgers_ic(spec, ic_config, seed, fine_grid);
    case PDEKind::KuramotoSivashinsky:
      return sample_ks_ic(spec, ic_config, numerics, seed, fine_grid);
  }
  throw std::logic_error("unreachable");
}

GridField evaluate_descriptor(const ICDescriptor& descriptor, const Grid& grid,
                              Discretization mode) {
  if (const auto* pw = std::get_if<PiecewiseConstantDescriptor>(&descriptor)) {
    return field_from_piecewise(*pw, grid, mode, 0.0);
  }
  if (const auto* fo = std::get_if<FourierDescriptor>(&descriptor)) {
    return field_from_fourier(*fo, grid, mode);
  }
  throw std::invalid_argument(
      "evaluate_descriptor: attractor states have no functional form");
}

GridField advection_exact(const InitialCondition& ic, double wavespeed,
                          double t, const Grid& grid, Discretization mode) {
  const auto* desc =
      std::get_if<PiecewiseConstantDescriptor>(&ic.descriptor);
  if (desc == nullptr) {
    throw std::invalid_argument(
        "advection_exact: descriptor is not piecewise-constant");
  }
  return field_from_piecewise(*desc, grid, mode, wavespeed * t);
}

SolveResult reference_trajectory(const PDESpec& spec,
                                 const NumericsConfig& numerics,
                                 const InitialCondition& ic, double dt,
                                 int n_steps, int refine) {
  if (refine < 1) {
    throw std::invalid_argument("reference_trajectory: refine >= 1");
  }
  const Grid& fine = ic.field.grid;
  if (fine.n_cells % refine != 0) {
    throw std::invalid_argument(
        "reference_trajectory: fine grid not divisible by refine");
  }
  const Grid coarse = make_grid(fine.domain_length, fine.n_cells / refine);

  SolveResult out;
  out.traj.grid = coarse;
  out.traj.dt = dt;
  out.traj.frames.reserve(n_steps + 1);

  if (spec.kind == PDEKind::Advection) {
    for (int k = 0; k <= n_steps; ++k) {
      out.traj.frames.push_back(
          advection_exact(ic, spec.wavespeed, k * dt, coarse,
                          Discretization::FVM)
              .values);
    }
    return out;
  }

  const RestrictionMode mode = spec.discretization() == Discretization::FVM
                                   ? RestrictionMode::CellAverage
                                   : RestrictionMode::PointSample;
  Vec u = ic.field.values;
  out.traj.frames.push_back(
      restrict_field(GridField{fine, u}, refine, mode).values);
  for (int k = 1; k <= n_steps; ++k) {
    if (!evolve_fine(spec, numerics, u, fine.dx, dt)) {
      out.blowup_frame = k;
      return out;
    }
    out.traj.frames.push_back(
        restrict_field(GridField{fine, u}, refine, mode).values);
  }
  return out;
}

void write_ic_descriptor(std::ostream& os, const InitialCondition& ic) {
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "kind = " << to_string(ic.kind) << "\n";
  os << "seed = " << ic.seed << "\n";
  if (const auto* pw = std::get_if<PiecewiseConstantDescriptor>(&ic.descriptor)) {
    os << "breakpoints =";
    for (double b : pw->breakpoints) os << ' ' << num(b);
    os << "\namplitudes =";
    for (double a : pw->amplitudes) os << ' ' << num(a);
    os << "\n";
  } else if (const auto* fo = std::get_if<FourierDescriptor>(&ic.descriptor)) {
    os << "sin_coeffs =";
    for (double c : fo->sin_coeffs) os << ' ' << num(c);
    os << "\ncos_coeffs =";
    for (double c : fo->cos_coeffs) os << ' ' << num(c);
    os << "\n";
  } else if (const auto* at = std::get_if<AttractorDescriptor>(&ic.descriptor)) {
    os << "attractor_source = " << (at->from_pool ? "pool" : "burn_in") << "\n";
    os << "offset_time = " << num(at->offset_time) << "\n";
    os << "burn_in = " << num(at->burn_in) << "\n";
  }
}

void write_ic_descriptor(const std::string& path, const InitialCondition& ic) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_ic_descriptor(os, ic);
}

}  // namespace finitenet

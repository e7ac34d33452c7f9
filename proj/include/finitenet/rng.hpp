#pragma once

#include <cstdint>
#include <string_view>

namespace finitenet {

/// Deterministic splitmix64 stream. All randomness in the toolkit flows from
/// one master seed through named substreams, so artifacts are reproducible
/// bit-for-bit and adding cases never perturbs earlier ones.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [lo, hi], both inclusive.
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Derive an independent stream from (master seed, purpose label, index).
inline RngStream substream(std::uint64_t master_seed, std::string_view purpose,
                           std::uint64_t index = 0) {
  RngStream mix(master_seed ^ fnv1a_hash(purpose));
  mix.next_u64();
  RngStream out(mix.next_u64() ^ (index * 0xD1B54A32D192ED03ull));
  out.next_u64();
  return out;
}

}  // namespace finitenet

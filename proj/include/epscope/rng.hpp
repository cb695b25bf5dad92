#pragma once

#include <cstdint>

namespace epscope {

// Counter-based splitmix64 stream. Substreams are derived from (seed, stream)
// so realization j of an ensemble draws from its own stream and results do
// not depend on evaluation order or worker count.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  SplitMix64(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(seed + 0x9E3779B97F4A7C15ULL * (stream + 1))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // uniform on [0, 1), 53-bit resolution
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform on [-w, w)
  double next_symmetric(double w) { return w * (2.0 * next_unit() - 1.0); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace epscope

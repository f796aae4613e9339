#pragma once

#include <cstdint>

namespace speclab {

// Counter-based PRNG (SplitMix64 finalizer over a keyed counter).
//
// Every draw is a pure function of (seed, stream, counter), so sampled
// objects are reproducible across machines, compilers and thread counts.
// We never use <random> distributions: their output is
// implementation-defined.
//
//   mix(z): z += 0x9E3779B97F4A7C15
//           z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//           z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//           return z ^ (z >> 31)
//
//   draw_i(seed, stream) = mix(mix(seed ^ (stream * 0xD2B74407B1CE6E93)) + i)
//
// uniform doubles take the top 53 bits: u = (draw >> 11) * 2^-53 in [0,1).
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(splitmix64(seed ^ (stream * 0xD2B74407B1CE6E93ULL))) {}

  std::uint64_t next_u64() { return splitmix64(base_ + counter_++); }

  // Uniform in [0,1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo,hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform in [-1,1).
  double symmetric() { return 2.0 * next_double() - 1.0; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace speclab

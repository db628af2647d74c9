#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace mixcheck {

// All randomness in the project flows through these generators so that a
// given seed reproduces results bit-for-bit on any platform.  The standard
// <random> distributions are implementation-defined and would break that.

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t s) : state(s) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

/// xoshiro256++, seeded through SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (-1, 1), strictly inside.
  double symmetric() { return (2.0 * unit() - 1.0) * (1.0 - 1e-12); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }
  std::uint64_t s_[4];
};

/// Derives an independent stream seed; used to split one user seed across
/// radii, slices, and grid rows deterministically.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 sm(seed ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
  return sm.next();
}

/// Number of worker threads: the MIXCHECK_THREADS environment variable if
/// set, otherwise the hardware count.
std::size_t worker_count();

/// Runs body(i) for i in [0, n).  Callers must write results into
/// index-addressed slots and reduce sequentially afterwards; that keeps
/// every report identical no matter how work is scheduled.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mixcheck

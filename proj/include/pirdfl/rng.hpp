#pragma once
#include <cmath>
#include <cstdint>

namespace pirdfl {

/// Deterministic PRNG with explicit stream derivation. All randomness in the
/// project flows through this type so that datasets, checkpoints and reports
/// are byte-identical across reruns of the same seed on any platform
/// (std::normal_distribution and friends are implementation-defined, so we
/// roll our own uniform/gaussian on top of xoshiro256++).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // splitmix64 expansion of the seed into the xoshiro state
    std::uint64_t z = seed;
    for (auto& w : state_) {
      z += 0x9e3779b97f4a7c15ULL;
      std::uint64_t x = z;
      x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
      x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
      w = x ^ (x >> 31);
    }
    gauss_cached_ = false;
  }

  /// Independent child stream, e.g. one per scene or per window.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix(seed, index));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    // modulo bias is negligible for the n used here (datasets, permutations)
    // but reject anyway to keep the stream exactly reproducible and unbiased
    const std::uint64_t limit = ~0ULL - ~0ULL % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  /// Standard normal via Box-Muller (pair cached).
  double gaussian() {
    if (gauss_cached_) {
      gauss_cached_ = false;
      return gauss_spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    gauss_spare_ = r * std::sin(a);
    gauss_cached_ = true;
    return r * std::cos(a);
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double gauss_spare_ = 0.0;
  bool gauss_cached_ = false;
};

}  // namespace pirdfl
